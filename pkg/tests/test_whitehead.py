import random

import pytest

import oracles
from outerspace.whitehead import (
    NONSIMPLE, PRIMITIVE, SIMPLE, WhiteheadGraph, all_moves, certify, enumerate_primitive_classes,
    invert_automorphism, is_disconnected_or_has_cutpoint, is_primitive, is_simple, nielsen_reduce,
    nielsen_reduce_tuple, simple_by_search, type2_moves, whitehead_graph, whitehead_minimize,
)
from outerspace.words import Word, apply_substitution, enumerate_cyclic_words, letter


def test_graph_of_commutator_is_four_cycle():
    g = whitehead_graph("abAB", 2)
    a, A, b, B = (letter(1), letter(1, -1), letter(2), letter(2, -1))
    pairs = {frozenset((x, y)) for x, y, _ in g.edges}
    assert pairs == {frozenset(p) for p in [(a, B), (b, a), (A, b), (B, A)]}
    assert g.edge_count == 4
    assert not is_disconnected_or_has_cutpoint(g)


def test_graph_examples():
    g = whitehead_graph("aa", 1)
    assert g.edges == ((0, 1, 2),)
    g = whitehead_graph("ab", 2)
    assert {frozenset((x, y)) for x, y, _ in g.edges} == {frozenset((0, 3)), frozenset((2, 1))}
    assert is_disconnected_or_has_cutpoint(g)
    path = WhiteheadGraph(2, ((0, 2, 1), (1, 2, 1)))  # a - b - A, B isolated
    assert is_disconnected_or_has_cutpoint(path)


def test_edge_count_invariant():
    for w in enumerate_cyclic_words(3, 4):
        assert whitehead_graph(w, 3).edge_count == len(w)


def test_graph_rejects_empty():
    with pytest.raises(ValueError):
        whitehead_graph("", 2)


def test_moves_match_hand_written_automorphisms():
    # package move tables versus the string oracle's explicit list
    ours = set()
    for mv in all_moves(2):
        imgs = mv.letter_images(2)
        ours.add(tuple(str(Word(imgs[c])) for c in range(4)))
    theirs = set()
    for img in oracles.whitehead_automorphisms(2):
        theirs.add(tuple(img[c] for c in "aAbB"))
    assert ours == theirs


def test_minimize_examples():
    m, moves = whitehead_minimize("abAB", 2)
    assert len(m) == 4 and moves == []
    m, _ = whitehead_minimize("aabb", 2)
    assert len(m) == 4
    m, _ = whitehead_minimize("abb", 2)
    assert len(m) == 1


def test_primitive_examples():
    assert is_primitive("a", 2)
    assert not is_primitive("abAB", 2)
    assert is_primitive("bcaC", 3)
    with pytest.raises(ValueError):
        is_primitive("", 2)


def test_simple_examples():
    assert is_simple("a", 2)
    assert not is_simple("abAB", 2)
    assert not is_simple("aabb", 2)
    assert is_simple("aa", 2)
    assert not is_simple("aa", 1)


def test_certificates_replay():
    for w, want in [("bcaC", PRIMITIVE), ("abb", PRIMITIVE), ("abAB", NONSIMPLE), ("aabb", NONSIMPLE),
                    ("aa", SIMPLE), ("abcabC", None)]:
        cert = certify(w, 3 if "c" in w.lower() else 2)
        assert cert.check()
        if want:
            assert cert.verdict == want


@pytest.mark.parametrize("rank,n", [(2, 6), (3, 4)])
def test_is_simple_agrees_with_move_search(rank, n):
    for w in enumerate_cyclic_words(rank, n):
        assert is_simple(w, rank) == (simple_by_search(w, rank) is not None), str(w)


def test_primitive_implies_simple():
    for w in enumerate_cyclic_words(3, 4):
        if is_primitive(w, 3):
            assert is_simple(w, 3)


def test_minimal_nonsimple_words_have_two_connected_graphs():
    for w in enumerate_cyclic_words(2, 6):
        m, moves = whitehead_minimize(w, 2)
        if not moves and not is_simple(w, 2):
            assert not is_disconnected_or_has_cutpoint(whitehead_graph(w, 2))


def test_verdicts_invariant_under_moves():
    rng = random.Random(11)
    moves = all_moves(3)
    words = list(enumerate_cyclic_words(3, 5))
    for _ in range(300):
        w = rng.choice(words)
        mv = rng.choice(moves)
        u = mv.apply_cyclic(w, 3)
        assert is_primitive(w, 3) == is_primitive(u, 3)
        assert is_simple(w, 3) == is_simple(u, 3)


def test_nielsen_examples():
    assert nielsen_reduce_tuple(["a", "b"], 2)[0]
    assert nielsen_reduce_tuple(["ab", "b"], 2)[0]
    assert not nielsen_reduce_tuple(["ab", "ba"], 2)[0]
    assert not nielsen_reduce_tuple(["aa", "b"], 2)[0]


def test_nielsen_against_stallings_folding():
    rng = random.Random(7)
    for _ in range(400):
        n = rng.choice([2, 3])
        if rng.random() < 0.5:
            ws = oracles.random_automorphism(rng, n, rng.randint(1, 6))
        else:
            ws = [oracles.free_reduce("".join(rng.choice(oracles.alphabet(n)) for _ in range(rng.randint(1, 4))))
                  for _ in range(n)]
        if not all(ws):
            continue
        assert nielsen_reduce_tuple(ws, n)[0] == oracles.stallings_is_basis(ws, n), ws


def test_nielsen_reduce_tracks_expressions():
    ws = [Word("abA"), Word("aab")]
    reduced, exprs = nielsen_reduce(ws, 2)
    for r, e in zip(reduced, exprs):
        assert apply_substitution(e, ws) == r


def test_invert_automorphism():
    rng = random.Random(2)
    for _ in range(100):
        n = rng.choice([2, 3])
        imgs = oracles.random_automorphism(rng, n, 5)
        back = invert_automorphism(imgs, n)
        for i in range(n):
            x = Word([2 * i])
            assert apply_substitution(apply_substitution(x, back), imgs) == x
            assert apply_substitution(apply_substitution(x, imgs), back) == x


def test_enumerate_primitive_classes():
    assert [str(w) for w in enumerate_primitive_classes(2, 1)] == ["a", "A", "b", "B"]
    two = {str(w) for w in enumerate_primitive_classes(2, 2)}
    assert two == {"a", "A", "b", "B", "ab", "aB", "Ab", "AB"}
    assert "abAB" not in {str(w) for w in enumerate_primitive_classes(2, 4)}
    with pytest.raises(ValueError):
        enumerate_primitive_classes(1, 2)


def test_primitive_orbit_rank_three():
    ours = {str(w) for w in enumerate_cyclic_words(3, 4) if is_primitive(w, 3)}
    assert ours == oracles.primitive_orbit(3, 4)


def test_type2_move_count():
    # multiplier m, subsets of the other 2N-2 letters
    assert len(type2_moves(2)) == 4 * 4
    assert len(type2_moves(3)) == 6 * 16
