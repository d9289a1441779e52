"""Toolkit for deciding first-order statements about Fibonacci-automatic sequences.

Numbers are written in Zeckendorf (Fibonacci) numeration, predicates on
naturals are compiled to multi-track automata, and functions from naturals
to a finite set are represented as automata with output (DFAOs).  On top of
the automaton engine sit a small first-order predicate language, linear
representations of counting functions, and a brute-force oracle used to
cross-check every computed result.
"""

from fibdecide.numeration import fib, ftm_value, zeck_decode, zeck_encode

__all__ = ["fib", "ftm_value", "zeck_decode", "zeck_encode"]

__version__ = "0.1.0"
