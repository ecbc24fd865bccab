"""Simplicial boundary trees: one-edge splittings with point vertex trees and
their pulls.

An ``hnn`` splitting has vertex group ``A = <x_1..x_{N-1}>`` and stable letter
``t = x_N``; the Bass-Serre edge ``e`` runs from the vertex fixed by ``A``
(end 1) to the vertex fixed by ``t A t^-1`` (end 2).  An ``amalgam``
splitting at index ``k`` has ``A_1 = <x_1..x_k>`` at end 1 and
``A_2 = <x_{k+1}..x_N>`` at end 2.  A pull at end ``i`` by ``g_i`` glues the
initial segment of length ``l_i`` of ``e`` at that end to its ``g_i``
translate; for an hnn end-2 pull the element acting is ``t g_2 t^-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from outerspace.marked_graph import format_fraction, parse_length
from outerspace.stretch import (
    CIRCLE, DOUBLY_DEGENERATE_BARBELL, VERTEX, CandidateLoop, StretchReport, StretchRow, ratio,
)
from outerspace.whitehead import is_primitive, is_simple
from outerspace.words import (
    CyclicWord, Word, WordSyntaxError, _strip_conjugation, enumerate_cyclic_words, is_cyclically_reduced,
    is_proper_power,
)

HNN = "hnn"
AMALGAM = "amalgam"


class TreeFormatError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SplittingTree:
    rank: int
    kind: str
    edge_length: Fraction = Fraction(1)
    split_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "edge_length", Fraction(self.edge_length))
        if self.kind not in (HNN, AMALGAM):
            raise TreeFormatError("kind", f"expected 'hnn' or 'amalgam', got {self.kind!r}")
        if not isinstance(self.rank, int) or self.rank < 1:
            raise TreeFormatError("rank", "must be a positive integer")
        if self.edge_length <= 0:
            raise TreeFormatError("edge_length", "must be positive")
        if self.kind == HNN:
            if self.rank < 2:
                raise TreeFormatError("rank", "an hnn splitting needs rank >= 2")
            if self.split_index is not None:
                raise TreeFormatError("split_index", "only meaningful for amalgams")
        elif not isinstance(self.split_index, int) or not 1 <= self.split_index <= self.rank - 1:
            raise TreeFormatError("split_index", f"must satisfy 1 <= k <= {self.rank - 1}")

    def factor_of(self, code: int) -> int:
        """Which vertex group (1 or 2) a letter lies in; 0 for the stable letter."""
        i = code >> 1
        if self.kind == HNN:
            return 0 if i == self.rank - 1 else 1
        return 1 if i < self.split_index else 2

    def generators_at(self, end: int) -> range:
        """0-based generator indices of the vertex group at ``end``."""
        if self.kind == HNN:
            return range(self.rank - 1)
        return range(self.split_index) if end == 1 else range(self.split_index, self.rank)


@dataclass(frozen=True)
class PullSpec:
    end: int
    element: Word
    length: Fraction

    def __post_init__(self):
        object.__setattr__(self, "element", Word(self.element))
        object.__setattr__(self, "length", Fraction(self.length))


def _canonical_element(g: Word) -> Word:
    gi = g.inverse()
    return gi if gi.shortlex_key() < g.shortlex_key() else g


def in_cyclic_subgroup(u: Word, g: Word) -> bool:
    """Is ``u`` a nonzero power of ``g``?  ``g`` must be cyclically reduced."""
    n, m = len(u), len(g)
    if n == 0 or n % m:
        return False
    k = n // m
    return tuple(u) == tuple(g) * k or tuple(u) == tuple(g.inverse()) * k


@dataclass(frozen=True)
class PulledTree:
    base: SplittingTree
    pulls: tuple[PullSpec, ...] = ()

    def __post_init__(self):
        pulls = tuple(sorted(self.pulls, key=lambda p: p.end))
        object.__setattr__(self, "pulls", pulls)
        b = self.base
        ends = [p.end for p in pulls]
        if len(set(ends)) != len(ends):
            raise TreeFormatError("pulls", "at most one pull per end")
        total = Fraction(0)
        for i, p in enumerate(pulls):
            where = f"pulls[{i}]"
            if p.end not in (1, 2):
                raise TreeFormatError(f"{where}.end", "must be 1 or 2")
            g = p.element
            if not g:
                raise TreeFormatError(f"{where}.element", "must be nontrivial")
            if not is_cyclically_reduced(g):
                raise TreeFormatError(f"{where}.element", "must be cyclically reduced")
            if is_proper_power(g) is not None:
                raise TreeFormatError(f"{where}.element", "must not be a proper power")
            allowed = set(b.generators_at(p.end))
            if any(c >> 1 not in allowed for c in g):
                raise TreeFormatError(f"{where}.element", "must lie in the vertex group at that end")
            if p.length < 0 or p.length > b.edge_length:
                raise TreeFormatError(f"{where}.length", "must satisfy 0 <= l_i <= l")
            total += p.length
        if total > b.edge_length:
            raise TreeFormatError("pulls", "pulled lengths must satisfy l_1 + l_2 <= l")

    @property
    def rank(self) -> int:
        return self.base.rank

    def pull_at(self, end: int) -> PullSpec | None:
        for p in self.pulls:
            if p.end == end and p.length > 0:
                return p
        return None

    def effective_pulls(self) -> tuple[PullSpec, ...]:
        return tuple(p for p in self.pulls if p.length > 0)

    def normalized(self) -> tuple:
        """Comparison key: trivial pulls dropped, elements up to inversion."""
        return (self.base, tuple((p.end, _canonical_element(p.element), p.length) for p in self.effective_pulls()))

    def translation_length(self, w: Word | str) -> Fraction:
        return translation_length_boundary(self, w)

    def to_json(self) -> dict:
        doc = {"type": "pulled_tree", "rank": self.rank, "kind": self.base.kind,
               "edge_length": format_fraction(self.base.edge_length),
               "pulls": [{"end": p.end, "element": str(p.element), "length": format_fraction(p.length)}
                         for p in self.pulls]}
        if self.base.kind == AMALGAM:
            doc["split_index"] = self.base.split_index
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PulledTree":
        if not isinstance(doc, dict):
            raise TreeFormatError("document", "expected a JSON object")
        if doc.get("type") != "pulled_tree":
            raise TreeFormatError("type", f"expected 'pulled_tree', got {doc.get('type')!r}")
        for key in ("rank", "kind"):
            if key not in doc:
                raise TreeFormatError(key, "missing field")
        rank = doc["rank"]
        if not isinstance(rank, int) or isinstance(rank, bool):
            raise TreeFormatError("rank", "must be an integer")
        try:
            el = parse_length(doc.get("edge_length", "1"), "edge_length")
        except ValueError as exc:
            raise TreeFormatError("edge_length", str(exc)) from None
        base = SplittingTree(rank, doc["kind"], el, doc.get("split_index"))
        pulls = []
        for i, p in enumerate(doc.get("pulls", [])):
            for key in ("end", "element", "length"):
                if not isinstance(p, dict) or key not in p:
                    raise TreeFormatError(f"pulls[{i}].{key}", "missing field")
            try:
                g = Word(str(p["element"]), rank)
            except WordSyntaxError as exc:
                raise TreeFormatError(f"pulls[{i}].element", str(exc)) from None
            try:
                li = parse_length(p["length"], f"pulls[{i}].length")
            except ValueError as exc:
                raise TreeFormatError(f"pulls[{i}].length", str(exc)) from None
            pulls.append(PullSpec(p["end"], g, li))
        return cls(base, tuple(pulls))

    @classmethod
    def load(cls, path) -> "PulledTree":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def splitting(rank: int, kind: str = HNN, edge_length=1, split_index: int | None = None,
              pulls: Iterable[tuple[int, str | Word, object]] = ()) -> PulledTree:
    """Shorthand: ``splitting(3, pulls=[(1, "abAB", "2/5")])``."""
    base = SplittingTree(rank, kind, Fraction(edge_length), split_index)
    return PulledTree(base, tuple(PullSpec(e, Word(g, rank), Fraction(l)) for e, g, l in pulls))


# --- syllables and the length formula ---


@dataclass(frozen=True)
class SyllableForm:
    """Cyclic normal form.  hnn blocks are ``(t-exponent, A-syllable after
    it)``; amalgam blocks are ``(factor, syllable)``."""

    kind: str
    elliptic: bool
    blocks: tuple[tuple[int, Word], ...]

    def __str__(self) -> str:
        if self.elliptic:
            return "elliptic"
        if self.kind == HNN:
            return " ".join(("t" if s > 0 else "T") + (f" [{a}]" if a else "") for s, a in self.blocks)
        return " | ".join(str(a) for _, a in self.blocks)


def syllable_decompose(PT: PulledTree | SplittingTree, w: Word | str) -> SyllableForm:
    base = PT.base if isinstance(PT, PulledTree) else PT
    w = tuple(Word(w, base.rank))
    if not w:
        raise ValueError("the trivial word has no syllable decomposition")
    i, j = _strip_conjugation(w)
    core = w[i:j]
    n = len(core)
    if base.kind == HNN:
        starts = [p for p, c in enumerate(core) if base.factor_of(c) == 0]
        if not starts:
            return SyllableForm(HNN, True, ((0, Word._raw(core)),))
        blocks = []
        for a, b in zip(starts, starts[1:] + [starts[0] + n]):
            syl = tuple(core[(a + 1 + r) % n] for r in range(b - a - 1))
            blocks.append((-1 if core[a] & 1 else 1, Word._raw(syl)))
        return SyllableForm(HNN, False, tuple(blocks))
    facs = [base.factor_of(c) for c in core]
    cuts = [p for p in range(n) if facs[p] != facs[p - 1]]
    if not cuts:
        return SyllableForm(AMALGAM, True, ((facs[0], Word._raw(core)),))
    blocks = []
    for a, b in zip(cuts, cuts[1:] + [cuts[0] + n]):
        blocks.append((facs[a], Word._raw(tuple(core[r % n] for r in range(a, b)))))
    return SyllableForm(AMALGAM, False, tuple(blocks))


def _length_from_form(PT: PulledTree, form: SyllableForm) -> Fraction:
    if form.elliptic:
        return Fraction(0)
    l = PT.base.edge_length
    p1, p2 = PT.pull_at(1), PT.pull_at(2)
    blocks = form.blocks
    total = len(blocks) * l
    if PT.base.kind == HNN:
        for k, (s, a) in enumerate(blocks):
            s_next = blocks[(k + 1) % len(blocks)][0]
            if p1 and s < 0 < s_next and in_cyclic_subgroup(a, p1.element):
                total -= 2 * p1.length
            if p2 and s_next < 0 < s and in_cyclic_subgroup(a, p2.element):
                total -= 2 * p2.length
    else:
        for f, a in blocks:
            p = p1 if f == 1 else p2
            if p and in_cyclic_subgroup(a, p.element):
                total -= 2 * p.length
    assert total >= 0, "pulled lengths violate l_1 + l_2 <= l"
    return max(total, Fraction(0))


def translation_length_boundary(PT: PulledTree, w: Word | str) -> Fraction:
    w = Word(w, PT.rank)
    if not w:
        return Fraction(0)
    return _length_from_form(PT, syllable_decompose(PT, w))


# --- independent oracle: walk the Bass-Serre path and fold turns ---


def _tree_path(base: SplittingTree, w: Word) -> list[tuple[Word, int, int]]:
    """Edges ``(label g, end left from, end arrived at)`` on the geodesic from
    the base vertex to ``w`` times it; ``g`` names the edge ``g e``."""
    path = []
    prefix = Word()
    if base.kind == HNN:
        for c in w:
            step = Word([c])
            if base.factor_of(c) == 0:
                if c & 1:
                    path.append((prefix * step, 2, 1))
                else:
                    path.append((prefix, 1, 2))
            prefix = prefix * step
        return path
    at = 1
    for c in w:
        f = base.factor_of(c)
        if f != at:
            path.append((prefix, at, f))
            at = f
        prefix = prefix * Word([c])
    if at == 2:
        path.append((prefix, 2, 1))
    return path


def _path_distance(PT: PulledTree, w: Word) -> Fraction:
    base = PT.base
    path = _tree_path(base, w)
    d = len(path) * base.edge_length
    t = Word([2 * (base.rank - 1)])
    for (g, _, arrive), (h, leave, _) in zip(path, path[1:]):
        if arrive != leave:
            continue
        p = PT.pull_at(arrive)
        if p is None:
            continue
        diff = g.inverse() * h
        if base.kind == HNN and arrive == 2:
            diff = t.inverse() * diff * t
        if in_cyclic_subgroup(diff, p.element):
            d -= 2 * p.length
    return d


def folding_oracle_length(PT: PulledTree, w: Word | str) -> Fraction:
    w = Word(w, PT.rank)
    d1 = len(_tree_path(PT.base, w))
    d2 = len(_tree_path(PT.base, w * w))
    if not w or d2 == d1:
        raise ValueError(f"{w} is elliptic in the splitting")
    # for elliptic isometries d(x, w^2 x) <= d(x, w x), so clamping gives 0
    return max(Fraction(0), _path_distance(PT, w * w) - _path_distance(PT, w))


# --- pulls and equivalence ---


def is_special_pull(PT: PulledTree) -> bool:
    pulls = PT.effective_pulls()
    if not pulls:
        raise ValueError("tree has no pull with positive length")
    if PT.base.kind != HNN:
        return False
    return all(not is_simple(p.element, PT.rank - 1) for p in pulls)


def _special_or_base(PT: PulledTree) -> bool:
    return not PT.effective_pulls() or is_special_pull(PT)


@dataclass(frozen=True)
class EquivalenceReport:
    relation_tested: str
    verdict: bool
    witness: CyclicWord | None = None
    max_len_checked: int | None = None
    lengths: tuple[Fraction, Fraction] | None = None

    def to_json(self, decimal: bool = False) -> dict:
        from outerspace.stretch import format_value
        doc = {"relation_tested": self.relation_tested, "verdict": self.verdict,
               "witness": str(self.witness) if self.witness is not None else None,
               "max_len_checked": self.max_len_checked}
        if self.lengths is not None:
            doc["witness_lengths"] = [format_value(x, decimal) for x in self.lengths]
        return doc

    def render(self, decimal: bool = False) -> str:
        from outerspace.stretch import format_value
        s = f"{self.relation_tested}: {'true' if self.verdict else 'false'}"
        if self.max_len_checked is not None:
            s += f" (words of length <= {self.max_len_checked})"
        if self.witness is not None:
            s += f"\nwitness: {self.witness}"
            if self.lengths is not None:
                s += f"  lengths {format_value(self.lengths[0], decimal)} vs {format_value(self.lengths[1], decimal)}"
        return s


def _check_same_rank(PT: PulledTree, PT2: PulledTree) -> None:
    if PT.rank != PT2.rank:
        raise ValueError(f"rank mismatch: {PT.rank} vs {PT2.rank}")


def special_pull_equivalent(PT: PulledTree, PT2: PulledTree) -> EquivalenceReport:
    _check_same_rank(PT, PT2)
    if PT.normalized() == PT2.normalized():
        return EquivalenceReport("special_pull", True)
    verdict = (PT.base == PT2.base and PT.base.kind == HNN
               and _special_or_base(PT) and _special_or_base(PT2))
    return EquivalenceReport("special_pull", verdict)


CLASSES = ("primitive", "simple", "all")


def _in_class(w: Word, cls: str, rank: int) -> bool:
    if cls == "all":
        return True
    if cls == "primitive":
        return is_primitive(w, rank)
    return is_simple(w, rank)


def spectrum_compare(PT: PulledTree, PT2: PulledTree, cls: str = "primitive", max_len: int = 8) -> EquivalenceReport:
    """Compare lengths on every conjugacy class of length <= ``max_len`` in
    the class; the witness is the shortlex-first discrepancy."""
    _check_same_rank(PT, PT2)
    if cls not in CLASSES:
        raise ValueError(f"class must be one of {CLASSES}")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    for w in enumerate_cyclic_words(PT.rank, max_len):
        a = PT.translation_length(w)
        b = PT2.translation_length(w)
        if a != b and _in_class(w, cls, PT.rank):
            return EquivalenceReport(cls, False, w, max_len, (a, b))
    return EquivalenceReport(cls, True, None, max_len)


def enumerate_candidates_boundary(PT: PulledTree) -> list[CandidateLoop]:
    shape = CIRCLE if PT.base.kind == HNN else DOUBLY_DEGENERATE_BARBELL
    return [CandidateLoop(VERTEX), CandidateLoop(shape)]


# --- stretch lower bound ---


def _subgroup_word_search(rank_letters: Sequence[int], gens: Sequence[Word], max_len: int) -> Word | None:
    """Shortest reduced word over ``rank_letters`` outside every ``<g>``."""
    letters = [2 * i + s for i in rank_letters for s in (0, 1)]
    layer = [()]
    for n in range(1, max_len + 1):
        nxt = []
        for u in layer:
            for c in letters:
                if u and u[-1] == c ^ 1:
                    continue
                v = u + (c,)
                word = Word._raw(v)
                if not any(in_cyclic_subgroup(word, g) for g in gens):
                    return word
                nxt.append(v)
        layer = nxt
    return None


@dataclass(frozen=True)
class _Arc:
    src: int
    dst: int
    syllable: Word
    length: int
    f: Fraction
    f2: Fraction


def _arc_weight(PT: PulledTree, s: int, s_next: int, a: Word) -> Fraction:
    l = PT.base.edge_length
    if PT.base.kind == HNN:
        p1, p2 = PT.pull_at(1), PT.pull_at(2)
        v = l
        if p1 and s < 0 < s_next and in_cyclic_subgroup(a, p1.element):
            v -= 2 * p1.length
        if p2 and s_next < 0 < s and in_cyclic_subgroup(a, p2.element):
            v -= 2 * p2.length
        return v
    p = PT.pull_at(s)
    return l - 2 * p.length if p and in_cyclic_subgroup(a, p.element) else l


def _block_automaton(PT: PulledTree, PT2: PulledTree, max_len: int) -> list[_Arc]:
    """Closed walks are exactly the cyclic normal forms, up to replacing each
    syllable by the shortest one with the same subgroup memberships."""
    base = PT.base
    arcs = []
    if base.kind == HNN:
        gens = {_canonical_element(p.element) for T in (PT, PT2) for p in T.effective_pulls()}
        reps = sorted(gens, key=Word.shortlex_key)
        other = _subgroup_word_search(base.generators_at(1), reps, max_len)
        if other is not None:
            reps.append(other)
        for s in (1, -1):
            for s2 in (1, -1):
                syls = reps + ([Word()] if s == s2 else [])
                for a in syls:
                    arcs.append(_Arc(s, s2, a, 1 + len(a), _arc_weight(PT, s, s2, a), _arc_weight(PT2, s, s2, a)))
        return arcs
    for f in (1, 2):
        gens = {_canonical_element(p.element) for T in (PT, PT2) for p in T.effective_pulls() if p.end == f}
        reps = sorted(gens, key=Word.shortlex_key)
        other = _subgroup_word_search(base.generators_at(f), reps, max_len)
        if other is not None:
            reps.append(other)
        for a in reps:
            arcs.append(_Arc(f, 3 - f, a, len(a), _arc_weight(PT, f, 3 - f, a), _arc_weight(PT2, f, 3 - f, a)))
    return arcs


def _best_closed_walk(arcs: Sequence[_Arc], max_len: int, score):
    """Closed walk of total length <= ``max_len`` maximising the additive
    tuple ``score(arc)`` (compared lexicographically, added componentwise);
    returns ``(value, arcs)`` or ``None``."""
    states = sorted({a.src for a in arcs} | {a.dst for a in arcs})
    best = None
    for s0 in states:
        table = {(0, s0): (None, None)}
        value = {(0, s0): None}
        for n in range(max_len):
            for s in states:
                key = (n, s)
                if key not in table:
                    continue
                cur = value[key]
                for arc in arcs:
                    if arc.src != s or n + arc.length > max_len:
                        continue
                    sc = score(arc)
                    v = sc if cur is None else tuple(x + y for x, y in zip(cur, sc))
                    k2 = (n + arc.length, arc.dst)
                    if k2 not in value or v > value[k2]:
                        value[k2] = v
                        table[k2] = (key, arc)
        for n in range(1, max_len + 1):
            key = (n, s0)
            if key in value and (best is None or value[key] > best[0]):
                walk = []
                k = key
                while table[k][0] is not None:
                    prev, arc = table[k]
                    walk.append(arc)
                    k = prev
                best = (value[key], walk[::-1])
    return best


def _walk_word(base: SplittingTree, walk: Sequence[_Arc]) -> CyclicWord:
    codes: list[int] = []
    t = 2 * (base.rank - 1)
    for arc in walk:
        if base.kind == HNN:
            codes.append(t if arc.src > 0 else t + 1)
        codes.extend(arc.syllable)
    return CyclicWord(codes)


def stretch_lower_bound(PT: PulledTree, PT2: PulledTree, max_len: int) -> StretchReport:
    """Exact maximum of ``||w||_PT2 / ||w||_PT`` over conjugacy classes of
    length at most ``max_len`` (0/0 = 0, x/0 = inf).

    When both trees share a splitting the lengths depend only on the
    sequence of syllable types, so the search runs over closed walks of a
    small block automaton: an infinite ratio is looked for first, then the
    finite maximum is found by Dinkelbach iteration.  Otherwise every class
    is enumerated."""
    _check_same_rank(PT, PT2)
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    b1, b2 = PT.base, PT2.base
    if (b1.kind, b1.split_index) != (b2.kind, b2.split_index):
        return _brute_lower_bound(PT, PT2, max_len)
    arcs = _block_automaton(PT, PT2, max_len)
    best = _best_closed_walk(arcs, max_len, lambda a: (-a.f, a.f2))
    if best is None:
        return StretchReport(Fraction(0), None, (), exact=False, max_len=max_len)
    (neg_f, f2), walk = best
    if neg_f == 0 and f2 > 0:
        return _report(PT, PT2, _walk_word(b1, walk), max_len)
    lam = Fraction(0)
    walk = None
    while True:
        res = _best_closed_walk(arcs, max_len, lambda a, lam=lam: (a.f2 - lam * a.f,))
        (value,), cand = res
        if value <= 0:
            break
        f = sum((a.f for a in cand), Fraction(0))
        lam = sum((a.f2 for a in cand), Fraction(0)) / f
        walk = cand
    if walk is None:
        return StretchReport(Fraction(0), None, (), exact=False, max_len=max_len)
    report = _report(PT, PT2, _walk_word(b1, walk), max_len)
    assert report.factor == lam
    return report


def _report(PT: PulledTree, PT2: PulledTree, w: CyclicWord, max_len: int) -> StretchReport:
    root = is_proper_power(w)
    if root is not None:
        w = CyclicWord(root[0])
    a, b = PT.translation_length(w), PT2.translation_length(w)
    r = ratio(b, a)
    return StretchReport(r, w, (StretchRow(w, None, a, b, r),), exact=False, max_len=max_len)


def _brute_lower_bound(PT: PulledTree, PT2: PulledTree, max_len: int) -> StretchReport:
    best, row = Fraction(0), None
    for w in enumerate_cyclic_words(PT.rank, max_len):
        a, b = PT.translation_length(w), PT2.translation_length(w)
        if a == 0 and b == 0:
            continue
        r = ratio(b, a)
        if row is None or r > best:
            best, row = r, StretchRow(w, None, a, b, r)
    if row is None:
        return StretchReport(Fraction(0), None, (), exact=False, max_len=max_len)
    return StretchReport(best, row.word, (row,), exact=False, max_len=max_len)
