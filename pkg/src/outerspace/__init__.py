"""Exact computations on Culler-Vogtmann outer space and its simplicial boundary."""

from outerspace.words import CyclicWord, Word, cyclic_reduce, enumerate_cyclic_words

__version__ = "0.1.0"

__all__ = ["CyclicWord", "Word", "cyclic_reduce", "enumerate_cyclic_words"]
