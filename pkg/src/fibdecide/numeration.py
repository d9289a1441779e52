"""Zeckendorf (Fibonacci) numeration.

Every natural number has a unique representation as a sum of non-consecutive
Fibonacci numbers F_2, F_3, ... (with F_0 = 0, F_1 = 1).  A representation is
written most-significant-digit first as a binary word: the word w of length t
stands for sum(w[i] * F_{t+2-i} for i = 1..t, 1-indexed).  The canonical word
for n has no leading zero and never contains "11"; the canonical word for 0 is
the empty word.  Decoding tolerates leading zeros, so every "11"-free word is
a (possibly padded) representation of exactly one natural number.

All functions are pure; digit words are plain strings over "0"/"1".
"""

from __future__ import annotations

from functools import lru_cache


class InvalidRepresentationError(ValueError):
    """Raised for digit words that are not valid Zeckendorf representations."""


@lru_cache(maxsize=None)
def fib(k: int) -> int:
    """Return the k-th Fibonacci number (F_0 = 0, F_1 = 1).

    Python integers are unbounded, so no overflow is possible; negative
    indices are rejected.
    """
    if k < 0:
        raise ValueError(f"Fibonacci index must be nonnegative, got {k}")
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def fibs_below(limit: int) -> list[int]:
    """Return [F_2, F_3, ...] with all entries <= limit, in increasing order."""
    out = []
    a, b = 1, 2  # F_2, F_3
    while a <= limit:
        out.append(a)
        a, b = b, a + b
    return out


def zeck_encode(n: int) -> str:
    """Return the canonical Zeckendorf word for n (empty word for 0).

    Greedy construction: repeatedly subtract the largest Fibonacci number
    not exceeding the remainder.  The result never starts with "0" and never
    contains "11".
    """
    if n < 0:
        raise ValueError(f"cannot encode negative number {n}")
    if n == 0:
        return ""
    weights = fibs_below(n)  # F_2 .. F_m, increasing
    digits = []
    rest = n
    for w in reversed(weights):
        if w <= rest:
            digits.append("1")
            rest -= w
        else:
            digits.append("0")
    assert rest == 0
    return "".join(digits)


def zeck_decode(word: str) -> int:
    """Decode a digit word; leading zeros are ignored, "11" is an error."""
    n = 0
    prev = "0"
    t = len(word)
    for i, d in enumerate(word):
        if d not in "01":
            raise InvalidRepresentationError(f"digit {d!r} at position {i} is not 0 or 1")
        if d == "1":
            if prev == "1":
                raise InvalidRepresentationError(
                    f"consecutive 1 digits at positions {i - 1},{i}"
                )
            n += fib(t + 1 - i)  # position i (0-indexed) weighs F_{t+2-(i+1)}
        prev = d
    return n


def ftm_value(n: int) -> int:
    """The Fibonacci-Thue-Morse sequence: digit-sum of (n) in Zeckendorf, mod 2."""
    if n < 0:
        raise ValueError(f"sequence index must be nonnegative, got {n}")
    return zeck_encode(n).count("1") & 1
