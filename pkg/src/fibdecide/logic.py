"""First-order predicate language over naturals in Fibonacci numeration.

The language mirrors the command style of automatic-sequence provers:
quantifiers `A` (for all) and `E` (exists) with comma-separated variables and
a body extending to the end of the enclosing formula, connectives
`& | ^ => <=> ~`, relations `= != < <= > >=` between linear terms,
sequence-value atoms `NAME[term]=@literal`, sequence-equality atoms
`NAME[t1]=NAME[t2]`, and predicate calls `$name(arg, ...)`.  An optional
leading `?msd_fib` selects the (only supported) numeration system.

Formulas compile bottom-up to multi-track automata: atoms come from a small
inventory of base automata (addition, comparison, constants, sequence
outputs), connectives become synchronous products, existential quantifiers
become track projections, and universal quantifiers use the `~E~` duality.
Every intermediate automaton is minimized.  A compiled automaton accepts
exactly the padded Zeckendorf encodings of the satisfying assignments of its
free variables (tracks in sorted variable order).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from fibdecide import automata as am
from fibdecide.automata import Dfa, Dfao, Nfa
from fibdecide.numeration import zeck_encode

NUMERATION_TAG = "msd_fib"

# Bound on the value-difference accumulators tracked while building the
# addition automaton.  States beyond it are provably unable to return to a
# zero difference; the build is additionally checked for stability against a
# larger bound and verified exhaustively (see verify_adder).
ADDER_DIFF_BOUND = 48


class ParseError(ValueError):
    """Syntax or scope error, with the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"at position {pos}: {message}")
        self.pos = pos


class CompileError(ValueError):
    """Semantic error while compiling a formula."""


class UnknownNameError(CompileError):
    """A `$name` call or `NAME[...]` atom refers to nothing in the store."""


# ---------------------------------------------------------------------------
# abstract syntax


@dataclass(frozen=True)
class Term:
    """Linear term: a sum of variables (with multiplicity) and a constant."""

    vars: tuple[str, ...]
    const: int

    def free_vars(self) -> frozenset[str]:
        return frozenset(self.vars)

    def __str__(self):
        parts = list(self.vars) + ([str(self.const)] if self.const or not self.vars else [])
        return "+".join(parts)


@dataclass(frozen=True)
class Compare:
    op: str  # = != < <= > >=
    left: Term
    right: Term


@dataclass(frozen=True)
class SeqValue:
    """`NAME[term] = @value` (or `!=`)."""

    name: str
    index: Term
    value: int
    negated: bool = False


@dataclass(frozen=True)
class SeqEqual:
    """`NAME[t1] = NAME[t2]` (or `!=`)."""

    left_name: str
    left_index: Term
    right_name: str
    right_index: Term
    negated: bool = False


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class BinOp:
    op: str  # and or xor implies iff
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "A" or "E"
    names: tuple[str, ...]
    body: "Formula"


Formula = Compare | SeqValue | SeqEqual | Call | Not | BinOp | Quantifier


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Compare):
        return f.left.free_vars() | f.right.free_vars()
    if isinstance(f, SeqValue):
        return f.index.free_vars()
    if isinstance(f, SeqEqual):
        return f.left_index.free_vars() | f.right_index.free_vars()
    if isinstance(f, Call):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= a.free_vars()
        return out
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, BinOp):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quantifier):
        return free_vars(f.body) - frozenset(f.names)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op><=>|=>|!=|<=|>=|[()\[\],+$@&|^~<>=?])"
    r")"
)

_VAR_RE = re.compile(r"[a-z][a-z0-9_]*$")


@dataclass
class _Token:
    kind: str  # num ident op end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group("num"):
            tokens.append(_Token("num", m.group("num"), m.start("num")))
        elif m.group("ident"):
            tokens.append(_Token("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(_Token("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent with the usual prover precedence: `~` binds tightest,
    then `&`, `^`, `|`, `=>`, `<=>`; a quantifier's body extends to the end of
    the current (sub)formula."""

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> _Token:
        t = self.next()
        if t.kind != "op" or t.text != op:
            raise ParseError(f"expected {op!r}, got {t.text!r}", t.pos)
        return t

    def parse(self) -> Formula:
        if self.peek().kind == "op" and self.peek().text == "?":
            self.next()
            tag = self.next()
            if tag.kind != "ident" or tag.text != NUMERATION_TAG:
                raise ParseError(
                    f"unsupported numeration system {tag.text!r} (only {NUMERATION_TAG})",
                    tag.pos,
                )
        f = self.parse_formula()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected trailing input {t.text!r}", t.pos)
        return f

    def parse_formula(self) -> Formula:
        return self.parse_iff()

    def parse_iff(self) -> Formula:
        f = self.parse_implies()
        while self.peek().kind == "op" and self.peek().text == "<=>":
            self.next()
            f = BinOp("iff", f, self.parse_implies())
        return f

    def parse_implies(self) -> Formula:
        f = self.parse_or()
        while self.peek().kind == "op" and self.peek().text == "=>":
            self.next()
            f = BinOp("implies", f, self.parse_or())
        return f

    def parse_or(self) -> Formula:
        f = self.parse_xor()
        while self.peek().kind == "op" and self.peek().text == "|":
            self.next()
            f = BinOp("or", f, self.parse_xor())
        return f

    def parse_xor(self) -> Formula:
        f = self.parse_and()
        while self.peek().kind == "op" and self.peek().text == "^":
            self.next()
            f = BinOp("xor", f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text == "&":
            self.next()
            f = BinOp("and", f, self.parse_unary())
        return f

    def _quantifier_split(self, t: _Token) -> tuple[str, str] | None:
        """Split a glued quantifier head like `At` / `Ej` into (kind, var)."""
        if t.kind != "ident" or len(t.text) < 2:
            return None
        kind, rest = t.text[0], t.text[1:]
        if kind in ("A", "E") and _VAR_RE.match(rest):
            return kind, rest
        return None

    def parse_unary(self) -> Formula:
        t = self.peek()
        if t.kind == "op" and t.text == "~":
            self.next()
            return Not(self.parse_unary())
        if t.kind == "op" and t.text == "(":
            # parenthesized formula, possibly the left side of a relation
            save = self.i
            try:
                self.next()
                f = self.parse_formula()
                self.expect_op(")")
                return f
            except ParseError:
                self.i = save
                return self.parse_atom()
        if t.kind == "ident" and t.text in ("A", "E"):
            self.next()
            return self.parse_quantifier(t.text, t.pos)
        split = self._quantifier_split(t)
        if split is not None:
            self.next()
            kind, first_var = split
            return self.parse_quantifier(kind, t.pos, first_var)
        return self.parse_atom()

    def parse_quantifier(self, kind: str, pos: int, first_var: str | None = None) -> Formula:
        names = []
        if first_var is None:
            v = self.next()
            if v.kind != "ident" or not _VAR_RE.match(v.text):
                raise ParseError(f"expected variable after {kind}, got {v.text!r}", v.pos)
            names.append(v.text)
        else:
            names.append(first_var)
        while self.peek().kind == "op" and self.peek().text == ",":
            self.next()
            v = self.next()
            if v.kind != "ident" or not _VAR_RE.match(v.text):
                raise ParseError(f"expected variable, got {v.text!r}", v.pos)
            names.append(v.text)
        for n in names:
            if n in self.bound:
                raise ParseError(f"variable {n!r} is already bound", pos)
        self.bound.extend(names)
        body = self.parse_formula()  # scope extends to the end of the formula
        del self.bound[-len(names):]
        return Quantifier(kind, tuple(names), body)

    def parse_atom(self) -> Formula:
        t = self.peek()
        if t.kind == "op" and t.text == "$":
            self.next()
            name = self.next()
            if name.kind != "ident":
                raise ParseError(f"expected predicate name after $, got {name.text!r}", name.pos)
            self.expect_op("(")
            args = [self.parse_term()]
            while self.peek().kind == "op" and self.peek().text == ",":
                self.next()
                args.append(self.parse_term())
            self.expect_op(")")
            return Call(name.text, tuple(args))
        if t.kind == "ident" and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].text == "[":
            return self.parse_seq_atom()
        left = self.parse_term()
        op = self.next()
        if op.kind != "op" or op.text not in ("=", "!=", "<", "<=", ">", ">="):
            raise ParseError(f"expected a relation, got {op.text!r}", op.pos)
        right = self.parse_term()
        return Compare(op.text, left, right)

    def parse_seq_atom(self) -> Formula:
        name = self.next()
        self.expect_op("[")
        index = self.parse_term()
        self.expect_op("]")
        op = self.next()
        if op.kind != "op" or op.text not in ("=", "!="):
            raise ParseError(
                f"sequence atoms support = and != only, got {op.text!r}", op.pos
            )
        negated = op.text == "!="
        t = self.peek()
        if t.kind == "op" and t.text == "@":
            self.next()
            num = self.next()
            if num.kind != "num":
                raise ParseError(f"expected output literal after @, got {num.text!r}", num.pos)
            return SeqValue(name.text, index, int(num.text), negated)
        other = self.next()
        if other.kind != "ident":
            raise ParseError(
                f"expected @literal or sequence name, got {other.text!r}", other.pos
            )
        self.expect_op("[")
        right_index = self.parse_term()
        self.expect_op("]")
        return SeqEqual(name.text, index, other.text, right_index, negated)

    def parse_term(self) -> Term:
        names: list[str] = []
        const = 0
        while True:
            t = self.next()
            if t.kind == "num":
                const += int(t.text)
            elif t.kind == "ident" and _VAR_RE.match(t.text):
                names.append(t.text)
            else:
                raise ParseError(f"expected a variable or number, got {t.text!r}", t.pos)
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "+":
                self.next()
                continue
            return Term(tuple(names), const)


def parse(text: str) -> Formula:
    """Parse predicate source into a formula tree with resolved scopes."""
    f = _Parser(text).parse()
    _check_scopes(f, frozenset())
    return f


def _check_scopes(f: Formula, bound: frozenset[str]):
    if isinstance(f, Quantifier):
        dup = frozenset(f.names) & bound
        if dup:
            raise ParseError(f"variables {sorted(dup)} bound twice", 0)
        _check_scopes(f.body, bound | frozenset(f.names))
    elif isinstance(f, Not):
        _check_scopes(f.body, bound)
    elif isinstance(f, BinOp):
        _check_scopes(f.left, bound)
        _check_scopes(f.right, bound)


# ---------------------------------------------------------------------------
# base automata


def _mask_step(prev: int, sym: int) -> int | None:
    """Next last-digit mask, or None on a "11" violation."""
    return None if prev & sym else sym


@lru_cache(maxsize=None)
def _equal_base() -> Dfa:
    """Two tracks carry the same word (hence the same value)."""
    # states: last shared digit 0/1, plus dead
    delta = np.full((3, 4), 2, dtype=np.int32)
    for prev in (0, 1):
        for s in range(4):
            a, b = s >> 1, s & 1
            if a == b and not (prev and a):
                delta[prev, s] = a
    accept = np.array([True, True, False])
    return am.minimize(Dfa(("x", "y"), delta, accept))


@lru_cache(maxsize=None)
def _less_base() -> Dfa:
    """Strict value comparison: same-length valid words compare radix-style."""
    # states 0..1: still equal (last digit); 2..5: decided less (last digits);
    # 6..9: decided greater; 10: dead
    def lt_state(la: int, lb: int) -> int:
        return 2 + 2 * la + lb

    def gt_state(la: int, lb: int) -> int:
        return 6 + 2 * la + lb

    delta = np.full((11, 4), 10, dtype=np.int32)
    for prev in (0, 1):
        for s in range(4):
            a, b = s >> 1, s & 1
            if (prev and a) or (prev and b):
                continue
            if a == b:
                delta[prev, s] = a
            elif a < b:
                delta[prev, s] = lt_state(a, b)
            else:
                delta[prev, s] = gt_state(a, b)
    for base, mk in ((2, lt_state), (6, gt_state)):
        for la in (0, 1):
            for lb in (0, 1):
                for s in range(4):
                    a, b = s >> 1, s & 1
                    if (la and a) or (lb and b):
                        continue
                    delta[base + 2 * la + lb, s] = mk(a, b)
    accept = np.zeros(11, dtype=bool)
    accept[2:6] = True
    return am.minimize(Dfa(("x", "y"), delta, accept))


@lru_cache(maxsize=None)
def _constant_base(value: int) -> Dfa:
    """Single track equals a fixed natural: the language 0*(value)_F."""
    word = zeck_encode(value)
    n = len(word)
    if n == 0:
        delta = np.array([[0, 1], [1, 1]], dtype=np.int32)
        return am.minimize(Dfa(("x",), delta, np.array([True, False])))
    dead = n + 1
    # state i: i digits of the word consumed; state 0 also absorbs leading zeros
    delta = np.full((n + 2, 2), dead, dtype=np.int32)
    delta[0, 0] = 0
    for i, d in enumerate(word):
        delta[i, int(d)] = i + 1
    accept = np.zeros(n + 2, dtype=bool)
    accept[n] = True
    return am.minimize(Dfa(("x",), delta, accept))


def _fib_window(count: int) -> list[int]:
    fibs = [0, 1]
    while len(fibs) < count:
        fibs.append(fibs[-1] + fibs[-2])
    return fibs


def _adder_prune_keep(da: int, db: int, fibs: list[int]) -> bool:
    """Necessary condition for a difference state to reach zero again.

    After m more columns the final difference is F_{m+1}*da + F_m*db plus a
    column contribution bounded by 2*(F_{m+3}-2) in absolute value; if no m
    can bring the two within range, the state is dead.  The scan range is far
    beyond the crossover of the Fibonacci envelopes, and the final automaton
    is independently checked for bound stability and against integer
    addition, so over-pruning would be caught.
    """
    for m in range(48):
        if abs(fibs[m + 1] * da + fibs[m] * db) <= 2 * (fibs[m + 3] - 2):
            return True
    return False


@lru_cache(maxsize=None)
def _adder_base(bound: int = ADDER_DIFF_BOUND) -> Dfa:
    """Three-track automaton for x + y = z over padded Zeckendorf words.

    Reading most significant digit first, appending a digit column multiplies
    the value contribution of every previous column by the Fibonacci shift
    (A, B) -> (A+B, A); the state tracks the pair of accumulated differences
    A(x)+A(y)-A(z) and B(x)+B(y)-B(z) together with the last digit of each
    track.  A word is accepted when the A-difference ends at zero.
    """
    fibs = _fib_window(64)
    start = (0, 0, 0, 0, 0)
    ids: dict[tuple[int, int, int, int, int] | None, int] = {start: 0}
    states: list[tuple[int, int, int, int, int] | None] = [start]
    rows = []
    i = 0
    while i < len(states):
        if states[i] is None:
            rows.append(np.full(8, ids[None], dtype=np.int32))
            i += 1
            continue
        da, db, lx, ly, lz = states[i]
        row = np.empty(8, dtype=np.int32)
        for s in range(8):
            a, b, c = (s >> 2) & 1, (s >> 1) & 1, s & 1
            if (lx and a) or (ly and b) or (lz and c):
                target = None
            else:
                delta_col = a + b - c
                nda = da + db + delta_col
                ndb = da + delta_col
                if abs(nda) > bound or abs(ndb) > bound or not _adder_prune_keep(nda, ndb, fibs):
                    target = None
                else:
                    target = (nda, ndb, a, b, c)
            nid = ids.get(target)
            if nid is None:
                nid = len(states)
                ids[target] = nid
                states.append(target)
            row[s] = nid
        rows.append(row)
        i += 1
    delta = np.vstack(rows)
    accept = np.array([st is not None and st[0] == 0 for st in states])
    return am.minimize(Dfa(("x", "y", "z"), delta, accept))


def adder() -> Dfa:
    """The addition automaton over tracks (x, y, z) accepting x + y = z."""
    return _adder_base()


def verify_adder(limit: int = 2000) -> None:
    """Check the addition automaton against integer addition for all
    x, y <= limit; raises AssertionError on any disagreement.  This gate must
    pass before compiled results are trusted."""
    a = adder()
    xs, ys = np.meshgrid(np.arange(limit + 1), np.arange(limit + 1), indexing="ij")
    xs = xs.ravel()
    ys = ys.ravel()
    ok = am.eval_assignments(a, {"x": xs, "y": ys, "z": xs + ys})
    if not bool(ok.all()):
        bad = np.flatnonzero(~ok)[0]
        raise AssertionError(f"adder rejects {xs[bad]} + {ys[bad]} = {xs[bad] + ys[bad]}")
    # spot-check rejections on shifted sums
    for shift in (1, 2, 5):
        sample = slice(0, len(xs), 97)
        bad_ok = am.eval_assignments(
            a, {"x": xs[sample], "y": ys[sample], "z": xs[sample] + ys[sample] + shift}
        )
        if bool(bad_ok.any()):
            idx = np.flatnonzero(bad_ok)[0]
            raise AssertionError(
                f"adder accepts {xs[sample][idx]} + {ys[sample][idx]} = "
                f"{xs[sample][idx] + ys[sample][idx] + shift}"
            )


@lru_cache(maxsize=None)
def ftm_dfao() -> Dfao:
    """Four-state machine computing the digit-sum parity of the input word."""
    # state = (parity, last digit); after a 1 another 1 cannot follow
    return Dfao(
        [0, 1, 1, 0],
        [
            {0: 0, 1: 1},  # (0,0)
            {0: 2},        # (1,1)
            {0: 2, 1: 3},  # (1,0)
            {0: 0},        # (0,1)
        ],
    )


def dfao_value_automaton(machine: Dfao, var: str, value: int) -> Dfa:
    """One-track predicate: running the machine on the track yields `value`.

    The machine must be insensitive to leading zeros (all machines produced
    or loaded by this package are)."""
    dead = machine.n_states
    delta = np.full((machine.n_states + 1, 2), dead, dtype=np.int32)
    for q, t in enumerate(machine.trans):
        for d, target in t.items():
            delta[q, d] = target
    accept = np.array([out == value for out in machine.outputs] + [False])
    raw = Dfa((var,), delta, accept, initial=machine.initial)
    return am.product(raw, am.valid_universe((var,)), "and")


# ---------------------------------------------------------------------------
# predicate store


class PredicateStore:
    """Named compiled predicates and word automata (DFAOs).

    Predicate parameters are the free variables of the defining formula in
    sorted order; calls bind arguments positionally.  A fresh store contains
    the sequence automaton FTM.
    """

    def __init__(self):
        self.predicates: dict[str, tuple[Dfa, tuple[str, ...]]] = {}
        self.words: dict[str, Dfao] = {}
        self.words["FTM"] = ftm_dfao()

    def add_predicate(self, name: str, dfa: Dfa, params: tuple[str, ...], overwrite: bool = False):
        if not overwrite and name in self.predicates:
            raise CompileError(f"predicate {name!r} is already defined")
        if dfa.tracks != tuple(sorted(params)):
            raise CompileError(
                f"automaton tracks {dfa.tracks} do not match parameters {params}"
            )
        self.predicates[name] = (dfa, tuple(params))

    def add_word(self, name: str, machine: Dfao, overwrite: bool = False):
        if not overwrite and name in self.words:
            raise CompileError(f"word automaton {name!r} is already defined")
        self.words[name] = machine

    def predicate(self, name: str) -> tuple[Dfa, tuple[str, ...]]:
        try:
            return self.predicates[name]
        except KeyError:
            raise UnknownNameError(f"unknown predicate ${name}") from None

    def word(self, name: str) -> Dfao:
        try:
            return self.words[name]
        except KeyError:
            raise UnknownNameError(f"unknown word automaton {name!r}") from None


# ---------------------------------------------------------------------------
# compiler


class _Compiler:
    def __init__(self, store: PredicateStore, cap: int):
        self.store = store
        self.cap = cap
        self.fresh_count = 0

    def fresh(self) -> str:
        self.fresh_count += 1
        return f"_t{self.fresh_count}"

    # -- term plumbing ------------------------------------------------------

    def term_chain(self, term: Term) -> tuple[str, list[Dfa], list[str]]:
        """Automata pinning a (fresh or original) variable to the term's value.

        Returns (result variable, constraint automata, fresh variables used).
        """
        items: list[str | int] = list(term.vars)
        if term.const or not items:
            items.append(term.const)
        parts: list[Dfa] = []
        fresh: list[str] = []

        def as_var(item: str | int) -> str:
            if isinstance(item, str):
                return item
            v = self.fresh()
            fresh.append(v)
            parts.append(am.rename_tracks(_constant_base(item), {"x": v}))
            return v

        cur = as_var(items[0])
        for item in items[1:]:
            nxt = as_var(item)
            out = self.fresh()
            fresh.append(out)
            parts.append(am.rename_tracks(adder(), {"x": cur, "y": nxt, "z": out}))
            cur = out
        return cur, parts, fresh

    def conjoin_project(self, main: Dfa, parts: list[Dfa], fresh: list[str]) -> Dfa:
        out = main
        for p in parts:
            out = self.combine("and", out, p)
        for v in fresh:
            if v in out.tracks:
                out = am.project(out, v, cap=self.cap)
        return out

    # -- automaton combination ----------------------------------------------

    def combine(self, op: str, a: Dfa, b: Dfa) -> Dfa:
        for name in b.tracks:
            if name not in a.tracks:
                a = am.add_track(a, name)
        for name in a.tracks:
            if name not in b.tracks:
                b = am.add_track(b, name)
        return am.product(a, b, op)

    def negate(self, a: Dfa) -> Dfa:
        return am.complement(a)

    # -- formula dispatch ----------------------------------------------------

    def compile(self, f: Formula) -> Dfa:
        if isinstance(f, Compare):
            return self.compile_compare(f)
        if isinstance(f, SeqValue):
            return self.compile_seq_value(f)
        if isinstance(f, SeqEqual):
            return self.compile_seq_equal(f)
        if isinstance(f, Call):
            return self.compile_call(f)
        if isinstance(f, Not):
            return self.negate(self.compile(f.body))
        if isinstance(f, BinOp):
            return self.combine(f.op, self.compile(f.left), self.compile(f.right))
        if isinstance(f, Quantifier):
            return self.compile_quantifier(f)
        raise TypeError(f"not a formula: {f!r}")

    def compile_quantifier(self, f: Quantifier) -> Dfa:
        if f.kind == "E":
            out = self.compile(f.body)
            for v in f.names:
                if v in out.tracks:
                    out = am.project(out, v, cap=self.cap)
            return out
        inner = Quantifier("E", f.names, Not(f.body))
        return self.negate(self.compile_quantifier(inner))

    def compile_compare(self, f: Compare) -> Dfa:
        op = f.op
        left, right = f.left, f.right
        if op in (">", ">="):
            op = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}[op]
            left, right = right, left
        if op == "!=":
            return self.negate(self.compile_compare(Compare("=", left, right)))
        if not left.vars and not right.vars:
            value = {"=": left.const == right.const, "<": left.const < right.const,
                     "<=": left.const <= right.const}[op]
            return _truth_automaton(value)
        lv, lparts, lfresh = self.term_chain(left)
        rv, rparts, rfresh = self.term_chain(right)
        if op == "=":
            base = _equal_base()
        elif op == "<":
            base = _less_base()
        else:  # <=
            base = am.product(_less_base(), _equal_base(), "or")
        if lv == rv:
            rel = _truth_automaton(op in ("=", "<="))
        else:
            rel = am.rename_tracks(base, {"x": lv, "y": rv})
        return self.conjoin_project(rel, lparts + rparts, lfresh + rfresh)

    def compile_seq_value(self, f: SeqValue) -> Dfa:
        machine = self.store.word(f.name)
        iv, parts, fresh = self.term_chain(f.index)
        atom = dfao_value_automaton(machine, iv, f.value)
        out = self.conjoin_project(atom, parts, fresh)
        return self.negate(out) if f.negated else out

    def compile_seq_equal(self, f: SeqEqual) -> Dfa:
        left = self.store.word(f.left_name)
        right = self.store.word(f.right_name)
        outputs = sorted(set(left.outputs) & set(right.outputs))
        out: Dfa | None = None
        for value in outputs:
            eq = self.combine(
                "and",
                self.compile_seq_value(SeqValue(f.left_name, f.left_index, value)),
                self.compile_seq_value(SeqValue(f.right_name, f.right_index, value)),
            )
            out = eq if out is None else self.combine("or", out, eq)
        if out is None:
            out = _truth_automaton(False)
        return self.negate(out) if f.negated else out

    def compile_call(self, f: Call) -> Dfa:
        dfa, params = self.store.predicate(f.name)
        if len(f.args) != len(params):
            raise CompileError(
                f"${f.name} takes {len(params)} arguments, got {len(f.args)}"
            )
        simple = [a.vars[0] if len(a.vars) == 1 and a.const == 0 else None for a in f.args]
        if all(v is not None for v in simple) and len(set(simple)) == len(simple):
            return am.rename_tracks(dfa, dict(zip(params, simple)))
        # general case: bind each parameter to a fresh variable equal to the arg
        fresh_params = [self.fresh() for _ in params]
        out = am.rename_tracks(dfa, dict(zip(params, fresh_params)))
        parts: list[Dfa] = []
        fresh: list[str] = list(fresh_params)
        for fp, arg in zip(fresh_params, f.args):
            av, aparts, afresh = self.term_chain(arg)
            parts.extend(aparts)
            fresh.extend(afresh)
            parts.append(am.rename_tracks(_equal_base(), {"x": fp, "y": av}))
        return self.conjoin_project(out, parts, fresh)


def _truth_automaton(value: bool) -> Dfa:
    delta = np.zeros((1, 1), dtype=np.int32)
    return Dfa((), delta, np.array([value]))


def compile(f: Formula | str, store: PredicateStore | None = None,
            cap: int = am.DEFAULT_STATE_CAP) -> Dfa:
    """Compile a formula (or source text) to its minimal predicate automaton."""
    if isinstance(f, str):
        f = parse(f)
    if store is None:
        store = PredicateStore()
    return _Compiler(store, cap).compile(f)


def decide(f: Formula | str, store: PredicateStore | None = None,
           cap: int = am.DEFAULT_STATE_CAP) -> bool:
    """Truth value of a closed formula."""
    if isinstance(f, str):
        f = parse(f)
    fv = free_vars(f)
    if fv:
        raise CompileError(f"sentence has free variables: {sorted(fv)}")
    dfa = compile(f, store, cap)
    m = am.reachable(dfa)
    nonempty = bool(m.accept.any())
    # a closed formula's automaton accepts everything or nothing
    assert bool(m.accept[m.initial]) == nonempty, "projection closure violated"
    return nonempty


# ---------------------------------------------------------------------------
# regular expressions over digit words


class RegexError(ValueError):
    """Malformed digit regular expression."""


def _regex_parse(pattern: str):
    """Parse into an AST of ('sym', d) | ('cat', parts) | ('alt', parts) | ('star', p)."""
    pos = 0

    def parse_alt():
        nonlocal pos
        parts = [parse_cat()]
        while pos < len(pattern) and pattern[pos] == "|":
            pos += 1
            parts.append(parse_cat())
        return ("alt", parts) if len(parts) > 1 else parts[0]

    def parse_cat():
        nonlocal pos
        parts = []
        while pos < len(pattern) and pattern[pos] not in "|)":
            parts.append(parse_rep())
        return ("cat", parts)

    def parse_rep():
        nonlocal pos
        node = parse_base()
        while pos < len(pattern) and pattern[pos] == "*":
            pos += 1
            node = ("star", node)
        return node

    def parse_base():
        nonlocal pos
        if pos >= len(pattern):
            raise RegexError("unexpected end of pattern")
        ch = pattern[pos]
        if ch in "01":
            pos += 1
            return ("sym", int(ch))
        if ch == "(":
            pos += 1
            node = parse_alt()
            if pos >= len(pattern) or pattern[pos] != ")":
                raise RegexError(f"unbalanced parenthesis at {pos}")
            pos += 1
            return node
        raise RegexError(f"unexpected character {ch!r} at {pos}")

    node = parse_alt()
    if pos != len(pattern):
        raise RegexError(f"unexpected {pattern[pos]!r} at {pos}")
    return node


def compile_regex(pattern: str, var: str = "x", cap: int = am.DEFAULT_STATE_CAP) -> Dfa:
    """Compile a digit regular expression (symbols 0/1, `|`, `*`, grouping)
    to a one-track automaton, intersected with the valid-padding universe."""
    ast = _regex_parse(pattern)
    nfa = Nfa((var,))

    def build(node) -> tuple[int, int]:
        kind = node[0]
        if kind == "sym":
            s = nfa.add_state()
            t = nfa.add_state()
            nfa.add_edge(s, node[1], t)
            return s, t
        if kind == "cat":
            s = nfa.add_state()
            cur = s
            for part in node[1]:
                ps, pt = build(part)
                nfa.add_eps(cur, ps)
                cur = pt
            return s, cur
        if kind == "alt":
            s = nfa.add_state()
            t = nfa.add_state()
            for part in node[1]:
                ps, pt = build(part)
                nfa.add_eps(s, ps)
                nfa.add_eps(pt, t)
            return s, t
        if kind == "star":
            s = nfa.add_state()
            t = nfa.add_state()
            ps, pt = build(node[1])
            nfa.add_eps(s, t)
            nfa.add_eps(s, ps)
            nfa.add_eps(pt, ps)
            nfa.add_eps(pt, t)
            return s, t
        raise RegexError(f"bad node {node!r}")

    start, end = build(ast)
    nfa.initials = {start}
    nfa.accept = {end}
    dfa = am.determinize(nfa, cap=cap)
    return am.product(dfa, am.valid_universe((var,)), "and")
