"""Multi-track automaton engine over Zeckendorf digit words.

A :class:`Dfa` is a complete deterministic automaton reading k-tuples of
binary digits, most significant digit first, one named track per variable.
The engine maintains one global invariant for predicate automata: the
accepted language is a subset of the valid-padding universe (no track ever
contains "11") and is closed under prepending and stripping all-zero columns,
so a word is accepted exactly when the tuple of naturals it decodes to
satisfies the predicate.  Complementation is therefore always taken relative
to the valid universe, never the raw tuple alphabet.

A :class:`Dfao` is a deterministic automaton with an output value per state,
computing a function from naturals to a finite set; its transitions may be
partial, with steps that cannot occur on valid input left undefined (an
implicit dead state of output 0 absorbs them).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from fibdecide.numeration import fib, zeck_encode

DEFAULT_STATE_CAP = 10**6

BOOL_OPS = {
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
    "xor": lambda a, b: a != b,
    "implies": lambda a, b: (not a) or b,
    "iff": lambda a, b: a == b,
}


class TrackSignatureError(ValueError):
    """Operands disagree on track names or arity."""


class ResourceLimitError(RuntimeError):
    """A construction exceeded its configured state cap."""


class AutomatonParseError(ValueError):
    """Malformed automaton text; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Dfa:
    """Complete deterministic multi-track automaton.

    `tracks` names the variables, one per digit position of the tuple
    alphabet.  A symbol is the integer packing of the column: the digit of
    track index t sits at bit (k-1-t).  `delta` has shape
    (n_states, 2**k); `accept` is a boolean vector; the initial state is 0
    unless stated otherwise.
    """

    __slots__ = ("tracks", "delta", "accept", "initial")

    def __init__(self, tracks, delta, accept, initial: int = 0):
        self.tracks = tuple(tracks)
        self.delta = np.ascontiguousarray(delta, dtype=np.int32)
        self.accept = np.ascontiguousarray(accept, dtype=bool)
        self.initial = initial
        if self.delta.ndim != 2 or self.delta.shape[1] != 1 << len(self.tracks):
            raise ValueError("transition table shape does not match track count")
        if len(self.accept) != self.delta.shape[0]:
            raise ValueError("acceptance vector length does not match state count")

    @property
    def n_states(self) -> int:
        return self.delta.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.delta.shape[1]

    @property
    def k(self) -> int:
        return len(self.tracks)

    def symbol(self, digits) -> int:
        """Pack one digit per track (in track order) into a symbol index."""
        s = 0
        for d in digits:
            s = (s << 1) | (d & 1)
        return s

    def digits(self, symbol: int):
        """Unpack a symbol index into one digit per track."""
        k = self.k
        return tuple((symbol >> (k - 1 - t)) & 1 for t in range(k))

    def track_index(self, name: str) -> int:
        try:
            return self.tracks.index(name)
        except ValueError:
            raise TrackSignatureError(f"unknown track {name!r} in {self.tracks}") from None

    def step(self, state: int, symbol: int) -> int:
        return int(self.delta[state, symbol])

    def accepts_word(self, word) -> bool:
        """Run a sequence of symbols (ints or digit tuples) from the initial state."""
        q = self.initial
        for s in word:
            if not isinstance(s, (int, np.integer)):
                s = self.symbol(s)
            q = int(self.delta[q, s])
        return bool(self.accept[q])

    def accepts(self, values: dict[str, int]) -> bool:
        """Decide the predicate on a variable assignment (canonical padding)."""
        word = encode_assignment(self.tracks, values)
        return self.accepts_word(word)

    def __repr__(self):
        return f"Dfa(tracks={self.tracks}, states={self.n_states})"


def encode_assignment(tracks, values: dict[str, int], min_length: int = 0):
    """Synchronized symbol word for an assignment, tracks padded to equal length."""
    words = {}
    length = min_length
    for t in tracks:
        w = zeck_encode(values[t])
        words[t] = w
        length = max(length, len(w))
    symbols = []
    for pos in range(length):
        s = 0
        for t in tracks:
            w = words[t]
            d = int(w[pos - (length - len(w))]) if pos >= length - len(w) else 0
            s = (s << 1) | d
        symbols.append(s)
    return symbols


def eval_assignments(dfa: Dfa, arrays: dict[str, np.ndarray]) -> np.ndarray:
    """Vectorized `accepts` over parallel value arrays (one per track).

    All words are padded to a common length; the padding-closure invariant
    makes the extra leading zero columns harmless.
    """
    sizes = {len(v) for v in arrays.values()}
    if len(sizes) != 1:
        raise ValueError("all value arrays must have the same length")
    count = sizes.pop()
    top = max(int(np.max(v)) if len(v) else 0 for v in arrays.values())
    weights = _weights_for(top)
    symbols = np.zeros((count, len(weights)), dtype=np.int32)
    for t, name in enumerate(dfa.tracks):
        digs = _digit_matrix(np.asarray(arrays[name], dtype=np.int64), weights)
        symbols |= digs << (dfa.k - 1 - t)
    state = np.full(count, dfa.initial, dtype=np.int32)
    for pos in range(symbols.shape[1]):
        state = dfa.delta[state, symbols[:, pos]]
    return dfa.accept[state]


def _weights_for(top: int) -> list[int]:
    """Descending Fibonacci weights F_m..F_2 covering values up to `top`."""
    ws = [1, 2]  # F_2, F_3
    while ws[-1] <= top:
        ws.append(ws[-1] + ws[-2])
    return list(reversed(ws))


def _digit_matrix(values: np.ndarray, weights) -> np.ndarray:
    """Greedy Zeckendorf digits of each value, one row per value, msd first."""
    rest = values.copy()
    digs = np.zeros((len(values), len(weights)), dtype=np.int32)
    for j, w in enumerate(weights):
        take = rest >= w
        digs[:, j] = take
        rest = rest - np.where(take, w, 0)
    return digs


# ---------------------------------------------------------------------------
# fundamental constructions


def valid_universe(tracks) -> Dfa:
    """Automaton of all words in which no track contains "11".

    `tracks` is a sequence of names or a bare track count.
    """
    if isinstance(tracks, int):
        tracks = tuple(f"x{i}" for i in range(tracks))
    tracks = tuple(tracks)
    k = len(tracks)
    n_sym = 1 << k
    dead = n_sym
    delta = np.empty((n_sym + 1, n_sym), dtype=np.int32)
    for prev in range(n_sym):
        for s in range(n_sym):
            delta[prev, s] = dead if (prev & s) else s
    delta[dead, :] = dead
    accept = np.ones(n_sym + 1, dtype=bool)
    accept[dead] = False
    return minimize(Dfa(tracks, delta, accept, initial=0))


def product(a: Dfa, b: Dfa, op: str) -> Dfa:
    """Synchronous product combining acceptance with a boolean connective."""
    if a.tracks != b.tracks:
        raise TrackSignatureError(f"track mismatch: {a.tracks} vs {b.tracks}")
    try:
        combine = BOOL_OPS[op]
    except KeyError:
        raise ValueError(f"unknown connective {op!r}") from None
    n_sym = a.n_symbols
    pair_ids: dict[tuple[int, int], int] = {(a.initial, b.initial): 0}
    pairs = [(a.initial, b.initial)]
    delta_rows = []
    i = 0
    while i < len(pairs):
        qa, qb = pairs[i]
        row_a = a.delta[qa]
        row_b = b.delta[qb]
        row = np.empty(n_sym, dtype=np.int32)
        for s in range(n_sym):
            key = (int(row_a[s]), int(row_b[s]))
            nid = pair_ids.get(key)
            if nid is None:
                nid = len(pairs)
                pair_ids[key] = nid
                pairs.append(key)
            row[s] = nid
        delta_rows.append(row)
        i += 1
    delta = np.vstack(delta_rows)
    acc = np.array(
        [bool(combine(bool(a.accept[qa]), bool(b.accept[qb]))) for qa, qb in pairs]
    )
    return minimize(Dfa(a.tracks, delta, acc, initial=0))


def complement(a: Dfa) -> Dfa:
    """Complement relative to the valid-padding universe of a's tracks."""
    flipped = Dfa(a.tracks, a.delta, ~a.accept, a.initial)
    return product(flipped, valid_universe(a.tracks), "and")


class Nfa:
    """Nondeterministic automaton used as an intermediate for projection and
    regular expression compilation.  Supports epsilon moves and multiple
    initial states."""

    def __init__(self, tracks):
        if isinstance(tracks, int):
            tracks = tuple(f"x{i}" for i in range(tracks))
        self.tracks = tuple(tracks)
        self.n_states = 0
        self.trans: list[dict[int, set[int]]] = []
        self.eps: list[set[int]] = []
        self.initials: set[int] = set()
        self.accept: set[int] = set()

    @property
    def n_symbols(self) -> int:
        return 1 << len(self.tracks)

    def add_state(self) -> int:
        self.trans.append({})
        self.eps.append(set())
        self.n_states += 1
        return self.n_states - 1

    def add_edge(self, src: int, symbol: int, dst: int):
        self.trans[src].setdefault(symbol, set()).add(dst)

    def add_eps(self, src: int, dst: int):
        self.eps[src].add(dst)

    def eps_closure(self, states) -> frozenset[int]:
        seen = set(states)
        stack = list(states)
        while stack:
            q = stack.pop()
            for r in self.eps[q]:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        return frozenset(seen)


def determinize(nfa: Nfa, cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Subset construction (reachable subsets only); the empty subset is the
    dead state, keeping the result complete."""
    n_sym = nfa.n_symbols
    start = nfa.eps_closure(nfa.initials)
    ids: dict[frozenset[int], int] = {start: 0}
    subsets = [start]
    rows = []
    i = 0
    while i < len(subsets):
        cur = subsets[i]
        row = np.empty(n_sym, dtype=np.int32)
        for s in range(n_sym):
            nxt = set()
            for q in cur:
                nxt |= nfa.trans[q].get(s, _EMPTY_SET)
            target = nfa.eps_closure(nxt) if nxt else _EMPTY_FROZEN
            nid = ids.get(target)
            if nid is None:
                nid = len(subsets)
                if nid >= cap:
                    raise ResourceLimitError(
                        f"determinization exceeded the cap of {cap} states"
                    )
                ids[target] = nid
                subsets.append(target)
            row[s] = nid
        rows.append(row)
        i += 1
    delta = np.vstack(rows)
    acc = np.array([bool(sub & nfa.accept) for sub in subsets])
    return Dfa(nfa.tracks, delta, acc, initial=0)


_EMPTY_SET: set[int] = set()
_EMPTY_FROZEN: frozenset[int] = frozenset()


def project(a: Dfa, track: str, cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Existential quantification: erase one track.

    The erased variable may need more significant digits than any remaining
    track, so the new initial behavior closes over prefixes that read
    arbitrary digits on the erased track while every remaining track reads 0.
    """
    t = a.track_index(track)
    rest = tuple(n for n in a.tracks if n != track)
    k_new = len(rest)
    bit = a.k - 1 - t
    low = (1 << bit) - 1

    def embed(s_red: int, d: int) -> int:
        return ((s_red >> bit) << (bit + 1)) | (d << bit) | (s_red & low)

    nfa = Nfa(rest)
    for _ in range(a.n_states):
        nfa.add_state()
    for q in range(a.n_states):
        row = a.delta[q]
        for s_red in range(1 << k_new):
            for d in (0, 1):
                nfa.add_edge(q, s_red, int(row[embed(s_red, d)]))
    # leading-zero closure: prefixes that are all zeros on remaining tracks
    seen = {a.initial}
    queue = deque([a.initial])
    while queue:
        q = queue.popleft()
        for d in (0, 1):
            r = int(a.delta[q, embed(0, d)])
            if r not in seen:
                seen.add(r)
                queue.append(r)
    nfa.initials = seen
    nfa.accept = set(np.flatnonzero(a.accept))
    return minimize(determinize(nfa, cap=cap))


def add_track(a: Dfa, name: str) -> Dfa:
    """Cylindrify: add an unconstrained (but valid) track, keeping names sorted."""
    if name in a.tracks:
        raise TrackSignatureError(f"track {name!r} already present")
    new_tracks = tuple(sorted(a.tracks + (name,)))
    t = new_tracks.index(name)
    bit = len(new_tracks) - 1 - t
    low = (1 << bit) - 1
    n_sym_new = 1 << len(new_tracks)
    # map each new symbol to the old symbol with the new track's digit removed
    reduced = np.array(
        [((s >> (bit + 1)) << bit) | (s & low) for s in range(n_sym_new)],
        dtype=np.int32,
    )
    delta = a.delta[:, reduced]
    lifted = Dfa(new_tracks, delta, a.accept, a.initial)
    return product(lifted, valid_universe(new_tracks), "and")


def reorder_tracks(a: Dfa, new_tracks) -> Dfa:
    """Permute tracks (same name set, new order)."""
    new_tracks = tuple(new_tracks)
    if sorted(new_tracks) != sorted(a.tracks):
        raise TrackSignatureError(f"{new_tracks} is not a permutation of {a.tracks}")
    k = a.k
    perm = [a.tracks.index(n) for n in new_tracks]
    remap = np.empty(a.n_symbols, dtype=np.int64)
    for s in range(a.n_symbols):
        out = 0
        for pos, src in enumerate(perm):
            out |= ((s >> (k - 1 - pos)) & 1) << (k - 1 - src)
        remap[s] = out
    # symbol s in the NEW order corresponds to old symbol remap[s]
    return Dfa(new_tracks, a.delta[:, remap], a.accept, a.initial)


def rename_tracks(a: Dfa, mapping: dict[str, str]) -> Dfa:
    """Rename tracks (must stay distinct) and restore sorted track order."""
    renamed = tuple(mapping.get(n, n) for n in a.tracks)
    if len(set(renamed)) != len(renamed):
        raise TrackSignatureError(f"renaming {mapping} collapses tracks {a.tracks}")
    b = Dfa(renamed, a.delta, a.accept, a.initial)
    return reorder_tracks(b, tuple(sorted(renamed)))


# ---------------------------------------------------------------------------
# minimization and language queries


def reachable(a: Dfa) -> Dfa:
    """Restrict to states reachable from the initial state (BFS order)."""
    order = []
    seen = np.full(a.n_states, -1, dtype=np.int32)
    seen[a.initial] = 0
    order.append(a.initial)
    i = 0
    while i < len(order):
        for s in range(a.n_symbols):
            t = int(a.delta[order[i], s])
            if seen[t] < 0:
                seen[t] = len(order)
                order.append(t)
        i += 1
    idx = np.array(order, dtype=np.int64)
    delta = seen[a.delta[idx]]
    return Dfa(a.tracks, delta, a.accept[idx], initial=0)


def minimize(a: Dfa) -> Dfa:
    """Canonical minimal complete automaton (Moore partition refinement,
    states renumbered in breadth-first symbol order)."""
    a = reachable(a)
    part = a.accept.astype(np.int64)
    n_classes = len(np.unique(part))
    while True:
        sig = np.column_stack([part, part[a.delta]])
        _, new_part = np.unique(sig, axis=0, return_inverse=True)
        new_n = new_part.max() + 1 if len(new_part) else 0
        if new_n == n_classes:
            part = new_part
            break
        part, n_classes = new_part, new_n
    # quotient: one representative per class
    reps = np.zeros(n_classes, dtype=np.int64)
    reps[part] = np.arange(a.n_states)  # any member works; last write wins
    delta_q = part[a.delta[reps]]
    accept_q = a.accept[reps]
    quotient = Dfa(a.tracks, delta_q, accept_q, initial=int(part[a.initial]))
    return _bfs_renumber(quotient)


def _bfs_renumber(a: Dfa) -> Dfa:
    """Deterministic state numbering: breadth-first from the initial state in
    symbol order.  Gives minimize() a canonical output."""
    order = [a.initial]
    pos = np.full(a.n_states, -1, dtype=np.int64)
    pos[a.initial] = 0
    i = 0
    while i < len(order):
        for s in range(a.n_symbols):
            t = int(a.delta[order[i], s])
            if pos[t] < 0:
                pos[t] = len(order)
                order.append(t)
        i += 1
    idx = np.array(order, dtype=np.int64)
    return Dfa(a.tracks, pos[a.delta[idx]], a.accept[idx], initial=0)


def live_mask(a: Dfa) -> np.ndarray:
    """Boolean mask of states from which an accepting state is reachable."""
    rev: list[list[int]] = [[] for _ in range(a.n_states)]
    for q in range(a.n_states):
        for s in range(a.n_symbols):
            rev[int(a.delta[q, s])].append(q)
    live = a.accept.copy()
    stack = list(np.flatnonzero(a.accept))
    while stack:
        q = stack.pop()
        for p in rev[q]:
            if not live[p]:
                live[p] = True
                stack.append(p)
    return live


def state_counts(a: Dfa) -> tuple[int, int]:
    """(live state count, complete state count) of the minimal automaton."""
    m = minimize(a)
    return int(np.count_nonzero(live_mask(m))), m.n_states


def is_empty(a: Dfa) -> bool:
    m = reachable(a)
    return not bool(m.accept.any())


def equivalent(a: Dfa, b: Dfa) -> bool:
    """Language equality (same track signature required)."""
    return is_empty(product(a, b, "xor"))


# ---------------------------------------------------------------------------
# automata with output


class Dfao:
    """Deterministic automaton with an output per state, over digits {0,1}.

    Transitions may be partial: a step that cannot occur on any valid
    Zeckendorf input may be left undefined, in which case running falls into
    an implicit dead state whose output is 0 (no contract applies there).
    """

    __slots__ = ("outputs", "trans", "initial")

    def __init__(self, outputs, trans, initial: int = 0):
        self.outputs = list(outputs)
        self.trans = [dict(t) for t in trans]
        self.initial = initial
        if len(self.outputs) != len(self.trans):
            raise ValueError("outputs and transitions disagree on state count")

    @property
    def n_states(self) -> int:
        return len(self.outputs)

    def run_word(self, word) -> int:
        """Output after reading a digit word (string or iterable of 0/1)."""
        q = self.initial
        for d in word:
            q = self.trans[q].get(int(d))
            if q is None:
                return 0
        return self.outputs[q]

    def run(self, n: int) -> int:
        """Output on the canonical representation of n."""
        return self.run_word(zeck_encode(n))

    def run_many(self, values: np.ndarray) -> np.ndarray:
        """Vectorized `run` over an array of naturals."""
        values = np.asarray(values, dtype=np.int64)
        top = int(values.max()) if len(values) else 0
        weights = _weights_for(top)
        digs = _digit_matrix(values, weights)
        dead = self.n_states
        delta = np.full((self.n_states + 1, 2), dead, dtype=np.int32)
        for q, t in enumerate(self.trans):
            for d, target in t.items():
                delta[q, d] = target
        outs = np.array(self.outputs + [0], dtype=np.int64)
        state = np.full(len(values), self.initial, dtype=np.int32)
        for j in range(digs.shape[1]):
            state = delta[state, digs[:, j]]
        return outs[state]

    def __repr__(self):
        return f"Dfao(states={self.n_states})"


def run_dfao(m: Dfao, n: int) -> int:
    """Output of the machine on the canonical representation of n."""
    return m.run(n)


def minimize_dfao(m: Dfao) -> Dfao:
    """Minimal machine computing the same outputs on all valid inputs.

    Moore refinement seeded by output values; undefined transitions are kept
    undefined and distinguish states from ones where the step is defined.
    """
    # restrict to reachable states
    order = [m.initial]
    pos = {m.initial: 0}
    i = 0
    while i < len(order):
        for d in (0, 1):
            t = m.trans[order[i]].get(d)
            if t is not None and t not in pos:
                pos[t] = len(order)
                order.append(t)
        i += 1
    outputs = [m.outputs[q] for q in order]
    trans = [
        {d: pos[t] for d, t in m.trans[q].items() if t in pos} for q in order
    ]
    n = len(order)
    # Moore refinement; None marks an undefined step
    part = {}
    for q in range(n):
        part.setdefault(outputs[q], len(part))
    cls = [part[outputs[q]] for q in range(n)]
    n_classes = len(set(cls))
    while True:
        sigs: dict[tuple, int] = {}
        new_cls = [0] * n
        for q in range(n):
            sig = (
                cls[q],
                None if 0 not in trans[q] else cls[trans[q][0]],
                None if 1 not in trans[q] else cls[trans[q][1]],
            )
            new_cls[q] = sigs.setdefault(sig, len(sigs))
        cls = new_cls
        if len(sigs) == n_classes:
            break
        n_classes = len(sigs)
    # quotient with canonical breadth-first numbering
    rep: dict[int, int] = {}
    for q in range(n):
        rep.setdefault(cls[q], q)
    renum: dict[int, int] = {}
    queue = deque([cls[0]])
    renum[cls[0]] = 0
    bfs = [cls[0]]
    while queue:
        c = queue.popleft()
        q = rep[c]
        for d in (0, 1):
            t = trans[q].get(d)
            if t is None:
                continue
            tc = cls[t]
            if tc not in renum:
                renum[tc] = len(bfs)
                bfs.append(tc)
                queue.append(tc)
    new_outputs = [outputs[rep[c]] for c in bfs]
    new_trans = []
    for c in bfs:
        q = rep[c]
        new_trans.append({d: renum[cls[t]] for d, t in trans[q].items()})
    return Dfao(new_outputs, new_trans, initial=0)


def canonical_form(m: Dfao):
    """Breadth-first canonical description (digit order 0 then 1) of the
    reachable part: tuple of (output, target-or-None, target-or-None)."""
    renum = {m.initial: 0}
    order = [m.initial]
    queue = deque([m.initial])
    while queue:
        q = queue.popleft()
        for d in (0, 1):
            t = m.trans[q].get(d)
            if t is not None and t not in renum:
                renum[t] = len(order)
                order.append(t)
                queue.append(t)
    form = []
    for q in order:
        t0 = m.trans[q].get(0)
        t1 = m.trans[q].get(1)
        form.append(
            (
                m.outputs[q],
                None if t0 is None else renum[t0],
                None if t1 is None else renum[t1],
            )
        )
    return tuple(form)


def iso_check(a: Dfao, b: Dfao) -> bool:
    """True iff the machines are isomorphic (up to state renaming)."""
    return canonical_form(a) == canonical_form(b)


# ---------------------------------------------------------------------------
# text format (shared by DFAOs and predicate automata)

FORMAT_TAG = "msd_fib"


def save_dfao(m: Dfao) -> str:
    """Serialize to the word-automaton text format (see `load_dfao`)."""
    lines = [FORMAT_TAG]
    for q in range(m.n_states):
        lines.append(f"{q} {m.outputs[q]}")
        for d in (0, 1):
            if d in m.trans[q]:
                lines.append(f"{d} -> {m.trans[q][d]}")
    return "\n".join(lines) + "\n"


def load_dfao(text: str) -> Dfao:
    """Parse the word-automaton text format.

    First line: the numeration tag `msd_fib`.  Then one block per state: a
    header `<id> <output>` followed by transition lines `<digit> -> <target>`.
    The first state listed is initial; ids must be consecutive from 0.
    Transitions a valid input can never take may be omitted.
    """
    outputs: list[int] = []
    trans: list[dict[int, int]] = []
    pending: list[tuple[int, int, int, int]] = []  # (src, digit, target, line)
    cur = -1
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != FORMAT_TAG:
                raise AutomatonParseError(
                    f"expected numeration tag {FORMAT_TAG!r}, got {line!r}", lineno
                )
            header_seen = True
            continue
        if "->" in line:
            left, _, right = line.partition("->")
            if cur < 0:
                raise AutomatonParseError("transition before any state header", lineno)
            try:
                digit = int(left)
                target = int(right)
            except ValueError:
                raise AutomatonParseError(f"malformed transition {line!r}", lineno) from None
            if digit not in (0, 1):
                raise AutomatonParseError(f"digit must be 0 or 1, got {digit}", lineno)
            if digit in trans[cur]:
                raise AutomatonParseError(
                    f"duplicate transition on digit {digit} from state {cur}", lineno
                )
            trans[cur][digit] = target
            pending.append((cur, digit, target, lineno))
        else:
            parts = line.split()
            if len(parts) != 2:
                raise AutomatonParseError(f"malformed state header {line!r}", lineno)
            try:
                sid = int(parts[0])
                out = int(parts[1])
            except ValueError:
                raise AutomatonParseError(f"malformed state header {line!r}", lineno) from None
            if sid != len(outputs):
                raise AutomatonParseError(
                    f"state ids must be consecutive; expected {len(outputs)}, got {sid}",
                    lineno,
                )
            outputs.append(out)
            trans.append({})
            cur = sid
    if not header_seen:
        raise AutomatonParseError("empty machine text", 1)
    if not outputs:
        raise AutomatonParseError("no states declared", 1)
    for src, digit, target, lineno in pending:
        if not 0 <= target < len(outputs):
            raise AutomatonParseError(
                f"transition {src} --{digit}--> {target} references an unknown state",
                lineno,
            )
    return Dfao(outputs, trans, initial=0)


def save_dfa(a: Dfa) -> str:
    """Serialize a predicate automaton: the header repeats the numeration tag
    once per track; acceptance is written as output 1 vs 0; transition lines
    list one digit per track before the arrow."""
    lines = [" ".join([FORMAT_TAG] * a.k) if a.k else FORMAT_TAG]
    order = list(range(a.n_states))
    if a.initial != 0:
        order = [a.initial] + [q for q in range(a.n_states) if q != a.initial]
    renum = {q: i for i, q in enumerate(order)}
    for q in order:
        lines.append(f"{renum[q]} {1 if a.accept[q] else 0}")
        for s in range(a.n_symbols):
            digs = " ".join(str(d) for d in a.digits(s)) if a.k else ""
            target = renum[int(a.delta[q, s])]
            lines.append(f"{digs} -> {target}".strip())
    return "\n".join(lines) + "\n"


def load_dfa(text: str, tracks) -> Dfa:
    """Parse a predicate automaton saved by `save_dfa`; `tracks` supplies the
    variable names (the format itself stores only the arity)."""
    if isinstance(tracks, int):
        tracks = tuple(f"x{i}" for i in range(tracks))
    tracks = tuple(tracks)
    k = len(tracks)
    n_sym = 1 << k
    outputs: list[int] = []
    rows: list[dict[int, int]] = []
    pending: list[tuple[int, int, int]] = []
    cur = -1
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            tags = line.split()
            expect = [FORMAT_TAG] * k if k else [FORMAT_TAG]
            if tags != expect:
                raise AutomatonParseError(
                    f"expected {len(expect)} copies of {FORMAT_TAG!r}, got {line!r}", lineno
                )
            header_seen = True
            continue
        if "->" in line:
            left, _, right = line.partition("->")
            digits = left.split()
            if len(digits) != k:
                raise AutomatonParseError(
                    f"expected {k} digits before '->', got {len(digits)}", lineno
                )
            try:
                sym = 0
                for d in digits:
                    sym = (sym << 1) | int(d)
                target = int(right)
            except ValueError:
                raise AutomatonParseError(f"malformed transition {line!r}", lineno) from None
            if cur < 0:
                raise AutomatonParseError("transition before any state header", lineno)
            if sym in rows[cur]:
                raise AutomatonParseError(f"duplicate transition {line!r}", lineno)
            rows[cur][sym] = target
            pending.append((target, lineno, cur))
        else:
            parts = line.split()
            if len(parts) != 2:
                raise AutomatonParseError(f"malformed state header {line!r}", lineno)
            sid, out = int(parts[0]), int(parts[1])
            if sid != len(outputs):
                raise AutomatonParseError(
                    f"state ids must be consecutive; expected {len(outputs)}, got {sid}",
                    lineno,
                )
            outputs.append(out)
            rows.append({})
            cur = sid
    if not outputs:
        raise AutomatonParseError("no states declared", 1)
    for target, lineno, _ in pending:
        if not 0 <= target < len(outputs):
            raise AutomatonParseError(f"unknown target state {target}", lineno)
    n = len(outputs)
    delta = np.full((n + 1, n_sym), n, dtype=np.int32)  # implicit dead completion
    for q, row in enumerate(rows):
        for sym, target in row.items():
            delta[q, sym] = target
    accept = np.array([bool(o) for o in outputs] + [False])
    return minimize(Dfa(tracks, delta, accept, initial=0))
