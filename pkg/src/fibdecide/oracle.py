"""Brute-force ground truth for the Fibonacci-Thue-Morse sequence.

Everything here is computed directly from the definition of the sequence on a
finite prefix: factor (subword) counts, right-special factor counts, and the
first difference of the subword complexity function.  Results are certified by
a doubling check: a value for factor length n is only reported when the first
and second half of the generated prefix agree on it, otherwise a
:class:`StabilityError` is raised.  A finite prefix can only ever undercount
the factors of the infinite word, so agreement under doubling is the practical
certificate that the count has converged.

Factor counting uses exact integer re-ranking of windows (doubling the window
length, as in suffix-array construction) rather than hashing, so no result
depends on hash collisions.
"""

from __future__ import annotations

import numpy as np

from fibdecide.numeration import ftm_value

DEFAULT_PREFIX_LENGTH = 1 << 20

# The only values the first difference of the complexity function ever takes
# for this sequence; used as a cheap sanity screen by callers.
KNOWN_DIFFERENCE_VALUES = frozenset({1, 2, 4, 6, 8, 10})


class StabilityError(ValueError):
    """Requested factor length exceeds what the prefix can certify."""


def generate(length: int) -> np.ndarray:
    """Return the first `length` terms of the sequence as a uint8 array.

    Block recurrence: for F_k <= n < F_{k+1} the greedy Zeckendorf step gives
    digit-sum(n) = 1 + digit-sum(n - F_k), so each Fibonacci block of the
    sequence is the complement of the prefix of length F_{k-1}.
    """
    if length < 1:
        raise ValueError("prefix length must be positive")
    bits = np.zeros(length, dtype=np.uint8)
    lo, hi = 1, 2  # F_2, F_3
    while lo < length:
        end = min(hi, length)
        bits[lo:end] = bits[: end - lo] ^ 1
        lo, hi = hi, lo + hi
    return bits


class FactorCounter:
    """Exact factor statistics of a bit sequence prefix, with stability checks.

    Rank arrays for power-of-two window lengths are built lazily; a window of
    arbitrary length n is identified by the pair of ranks of its two
    (overlapping) power-of-two sub-windows.  Two windows get the same pair if
    and only if they are equal, so all counts are exact.
    """

    def __init__(self, bits: np.ndarray):
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.length = len(self.bits)
        self.half = self.length // 2
        self._ranks: list[np.ndarray] = [self.bits.astype(np.int32)]

    def _rank_array(self, level: int) -> np.ndarray:
        """Rank array for window length 2**level (lazily extended)."""
        while len(self._ranks) <= level:
            prev = self._ranks[-1].astype(np.int64)
            size = 1 << (len(self._ranks) - 1)
            n_pos = self.length - 2 * size + 1
            if n_pos <= 0:
                raise StabilityError(
                    f"prefix of length {self.length} is too short for windows of {2 * size}"
                )
            key = prev[:n_pos] * (self.length + 1) + prev[size : size + n_pos]
            _, inv = np.unique(key, return_inverse=True)
            self._ranks.append(inv.astype(np.int32))
        return self._ranks[level]

    def _window_keys(self, n: int) -> np.ndarray:
        """int64 keys identifying bits[i:i+n] for every start i in [0, length-n]."""
        if n == 1:
            return self.bits.astype(np.int64)
        level = n.bit_length() - 1  # largest power of two <= n
        size = 1 << level
        base = self._rank_array(level).astype(np.int64)
        n_pos = self.length - n + 1
        if n_pos <= 0:
            raise StabilityError(f"no windows of length {n} in prefix of {self.length}")
        return base[:n_pos] * (self.length + 1) + base[n - size : n - size + n_pos]

    def _distinct(self, keys: np.ndarray, limit: int) -> int:
        """Distinct count among the first `limit` keys."""
        if limit <= 0:
            raise StabilityError("window range is empty")
        return int(np.unique(keys[:limit]).size)

    def complexity(self, n: int) -> int:
        """Number of distinct length-n factors, certified by the doubling check."""
        if n < 0:
            raise ValueError("factor length must be nonnegative")
        if n == 0:
            return 1
        keys = self._window_keys(n)
        in_half = self.half - n + 1
        full = self._distinct(keys, self.length - n + 1)
        part = self._distinct(keys, in_half)
        if part != full:
            raise StabilityError(
                f"factor count for n={n} has not stabilized "
                f"({part} in half prefix vs {full} in full prefix)"
            )
        return full

    def _right_special(self, n: int, limit: int) -> int:
        """Count factors x of length n with x0 and x1 both occurring, start < limit."""
        if limit <= 0:
            raise StabilityError("window range is empty")
        ext = self.bits[n : n + limit].astype(np.int64)
        if n == 0:
            return 1 if np.unique(ext).size == 2 else 0
        fid = self._window_keys(n)[:limit]
        pair = np.unique(fid * 2 + ext)
        if pair.size < 2:
            return 0
        # fid has both extensions iff keys 2*fid and 2*fid+1 are both present,
        # i.e. consecutive sorted keys differ by 1 with the lower one even
        return int(np.count_nonzero((np.diff(pair) == 1) & (pair[:-1] % 2 == 0)))

    def right_special_count(self, n: int) -> int:
        """Number of right-special length-n factors, certified by doubling."""
        if n < 0:
            raise ValueError("factor length must be nonnegative")
        full = self._right_special(n, self.length - n)
        part = self._right_special(n, self.half - n)
        if part != full:
            raise StabilityError(
                f"right-special count for n={n} has not stabilized "
                f"({part} in half prefix vs {full} in full prefix)"
            )
        return full

    def first_difference(self, count: int) -> list[int]:
        """The sequence rho(n+1) - rho(n) for n = 0..count-1, via right-special counts."""
        return [self.right_special_count(n) for n in range(count)]


def complexity(bits: np.ndarray, n: int) -> int:
    """Distinct length-n factor count of the prefix; see FactorCounter."""
    return FactorCounter(bits).complexity(n)


def right_special_count(bits: np.ndarray, n: int) -> int:
    """Right-special length-n factor count of the prefix; see FactorCounter."""
    return FactorCounter(bits).right_special_count(n)


def first_difference_sequence(bits: np.ndarray, count: int) -> list[int]:
    """First `count` values of the complexity first difference."""
    return FactorCounter(bits).first_difference(count)


def table(bits: np.ndarray, count: int) -> str:
    """Plain-text table `n<TAB>rho(n)<TAB>d(n)` for n = 0..count-1."""
    counter = FactorCounter(bits)
    lines = []
    for n in range(count):
        lines.append(f"{n}\t{counter.complexity(n)}\t{counter.right_special_count(n)}")
    return "\n".join(lines) + "\n"


def sequence_value(n: int) -> int:
    """Single sequence value, straight from the numeration definition."""
    return ftm_value(n)
