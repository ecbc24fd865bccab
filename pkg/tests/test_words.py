import random

import pytest
from hypothesis import given, strategies as st

import oracles
from outerspace.words import (
    CyclicWord, Word, WordSyntaxError, apply_substitution, cyclic_reduce, enumerate_cyclic_words,
    is_cyclically_reduced, is_proper_power, reduce,
)

raw_words = st.lists(st.integers(0, 5), max_size=14)


def test_reduce_examples():
    assert reduce([0, 1]) == Word()
    assert str(reduce([0, 2, 3, 0])) == "aa"
    assert str(reduce("abAB")) == "abAB"


def test_parse_and_print():
    assert str(Word("a b·A")) == "abA"
    assert Word("") == Word()
    with pytest.raises(WordSyntaxError):
        Word("abc", rank=2)
    with pytest.raises(WordSyntaxError):
        Word("a1")


def test_cyclic_reduce_examples():
    c, g = cyclic_reduce("baB")
    assert (str(c), str(g)) == ("a", "b")
    c, g = cyclic_reduce("abAB")
    assert (str(c), str(g)) == ("abAB", "")
    c, g = cyclic_reduce("Acac")
    assert str(c) == "acAc"
    assert g * c * g.inverse() == Word("Acac")


def test_cyclic_reduce_against_conjugation_search():
    for w in oracles.all_cyclic_words(2, 3) | {""}:
        for pre in ["", "a", "B", "ab", "Ba"]:
            s = oracles.free_reduce(pre + w + oracles.inv(pre))
            c, g = cyclic_reduce(s)
            assert g * c * g.inverse() == Word(s)
            assert is_cyclically_reduced(c)
            assert oracles.conjugate(str(c), s)
            assert str(c) == oracles.canon(s)


def test_proper_powers():
    assert is_proper_power("abab") == (Word("ab"), 2)
    assert is_proper_power("ab") is None
    assert is_proper_power("aabaab") == (Word("aab"), 2)
    assert is_proper_power("aaaa") == (Word("a"), 4)
    root, k = is_proper_power("bababB")  # b (ab)^2 b^-1 after reduction
    assert k == 2 and root ** 2 == Word("bababB")
    with pytest.raises(ValueError):
        is_proper_power("")


def test_substitution_examples():
    assert str(apply_substitution("ab", ["a", "ba"])) == "aba"
    assert apply_substitution("aA", ["abb", "Ba"]) == Word()
    assert str(apply_substitution("abAB", ["b", "a"])) == "baBA"


def test_enumeration_examples():
    assert [str(w) for w in enumerate_cyclic_words(1, 2)] == ["a", "A", "aa", "AA"]
    assert [str(w) for w in enumerate_cyclic_words(2, 1)] == ["a", "A", "b", "B"]
    assert len(list(enumerate_cyclic_words(2, 2))) == 12


@pytest.mark.parametrize("rank,n", [(1, 6), (2, 6), (3, 4)])
def test_enumeration_matches_brute_force(rank, n):
    ours = [str(w) for w in enumerate_cyclic_words(rank, n)]
    assert len(ours) == len(set(ours))
    assert set(ours) == oracles.all_cyclic_words(rank, n)
    keys = [Word(w).shortlex_key() for w in ours]
    assert keys == sorted(keys)


def test_cyclic_word_does_not_identify_inverse():
    assert CyclicWord("ab") != CyclicWord("BA")
    assert CyclicWord("ba") == CyclicWord("ab")


@given(raw_words)
def test_reduce_idempotent(s):
    assert reduce(reduce(s)) == reduce(s)


@given(raw_words, raw_words)
def test_product_length_parity(u, v):
    u, v = Word(u), Word(v)
    n = len(u * v)
    assert n <= len(u) + len(v) and (len(u) + len(v) - n) % 2 == 0


@given(raw_words, raw_words)
def test_cyclic_reduce_conjugation_invariant(g, w):
    g, w = Word(g), Word(w)
    assert cyclic_reduce(g * w * g.inverse())[0] == cyclic_reduce(w)[0]


@given(st.lists(st.integers(0, 3), min_size=1, max_size=6), st.integers(2, 4))
def test_power_exponent_multiple(root, k):
    r = cyclic_reduce(Word(root))[0]
    if not r:
        return
    res = is_proper_power(Word(r) ** k)
    assert res is not None and res[1] % k == 0


def test_cyclic_words_are_reduced():
    rng = random.Random(3)
    for w in enumerate_cyclic_words(3, 5):
        assert is_cyclically_reduced(w)
        if rng.random() < 0.05:
            assert CyclicWord(w) == w
