"""Candidate loops and the Lipschitz stretch between marked graphs.

By White's theorem the supremum of ``||g||_T2 / ||g||_T`` is attained on a
candidate of ``T``: an embedded circle, a bouquet of two embedded circles,
or a barbell.  Those are finitely many, so the stretch factor is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from outerspace.marked_graph import MarkedGraph, format_fraction, reverse_path
from outerspace.words import CyclicWord, enumerate_cyclic_words

CIRCLE = "circle"
BOUQUET = "bouquet"
BARBELL = "barbell"
SIMPLY_DEGENERATE_BARBELL = "simply_degenerate_barbell"
DOUBLY_DEGENERATE_BARBELL = "doubly_degenerate_barbell"
VERTEX = "vertex"
SHAPES = (CIRCLE, BOUQUET, BARBELL, SIMPLY_DEGENERATE_BARBELL, DOUBLY_DEGENERATE_BARBELL, VERTEX)


@dataclass(frozen=True)
class CandidateLoop:
    shape: str
    edge_path: tuple[int, ...] = ()
    word: CyclicWord | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")


def ratio(num: Fraction, den: Fraction) -> Fraction | float:
    """``num/den`` with 0/0 = 0 and x/0 = inf."""
    if den == 0:
        return Fraction(0) if num == 0 else math.inf
    return Fraction(num) / den


def format_value(x, decimal: bool = False) -> str:
    if x == math.inf:
        return "inf"
    x = Fraction(x)
    if decimal:
        return f"{float(x):.12g}"
    return format_fraction(x)


@dataclass(frozen=True)
class StretchRow:
    word: CyclicWord
    shape: str | None
    len_T: Fraction
    len_T2: Fraction
    ratio: Fraction | float


@dataclass(frozen=True)
class StretchReport:
    factor: Fraction | float
    witness: CyclicWord | None
    rows: tuple[StretchRow, ...] = ()
    exact: bool = True
    max_len: int | None = None

    @property
    def lam(self):
        return self.factor

    def to_json(self, decimal: bool = False) -> dict:
        doc = {
            "type": "stretch_report",
            "exact": self.exact,
            "lambda": format_value(self.factor, decimal),
            "witness": str(self.witness) if self.witness is not None else None,
            "candidates": [
                {"word": str(r.word), "shape": r.shape, "length_T": format_value(r.len_T, decimal),
                 "length_T2": format_value(r.len_T2, decimal), "ratio": format_value(r.ratio, decimal)}
                for r in self.rows
            ],
        }
        if self.max_len is not None:
            doc["max_len"] = self.max_len
        return doc

    def render(self, decimal: bool = False) -> str:
        head = ("word", "shape", "||.||_T", "||.||_T2", "ratio")
        body = [(str(r.word), r.shape or "-", format_value(r.len_T, decimal), format_value(r.len_T2, decimal),
                 format_value(r.ratio, decimal)) for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in [head] + body]
        label = "lambda" if self.exact else f"lambda >= (words of length <= {self.max_len})"
        lines.append(f"{label}: {format_value(self.factor, decimal)}")
        lines.append(f"witness: {self.witness if self.witness is not None else '-'}")
        return "\n".join(lines)


# --- cycle enumeration ---


def _simple_cycles(T: MarkedGraph) -> list[tuple[int, ...]]:
    """Embedded circles, one oriented representative per edge set."""
    g = T.graph
    order = {v: i for i, v in enumerate(g.vertices)}
    found: dict[frozenset[int], tuple[int, ...]] = {}

    for root in g.vertices:
        r = order[root]

        def dfs(v, path, seen):
            for oe in g.outgoing[v]:
                u = g.end(oe)
                if order[u] < r:
                    continue
                k = oe >> 1
                if path and k == path[-1] >> 1 and g.edges[k].origin != g.edges[k].terminus:
                    continue
                if u == root:
                    cyc = tuple(path) + (oe,)
                    key = frozenset(c >> 1 for c in cyc)
                    if len(key) == len(cyc) and key not in found:
                        found[key] = cyc
                elif u not in seen:
                    seen.add(u)
                    path.append(oe)
                    dfs(u, path, seen)
                    path.pop()
                    seen.discard(u)

        dfs(root, [], {root})
    return list(found.values())


def _vertices_of(T: MarkedGraph, cyc: Sequence[int]) -> list[str]:
    return [T.graph.start(c) for c in cyc]


def _rotate_to(T: MarkedGraph, cyc: Sequence[int], v: str) -> tuple[int, ...]:
    i = _vertices_of(T, cyc).index(v)
    return tuple(cyc[i:]) + tuple(cyc[:i])


def _paths_between(T: MarkedGraph, sources: set[str], targets: set[str]) -> list[tuple[int, ...]]:
    """Embedded paths from ``sources`` to ``targets`` whose interior avoids both."""
    g = T.graph
    blocked = sources | targets
    out = []

    def dfs(v, path, seen):
        for oe in g.outgoing[v]:
            u = g.end(oe)
            if u in targets:
                out.append(tuple(path) + (oe,))
            elif u not in blocked and u not in seen:
                seen.add(u)
                path.append(oe)
                dfs(u, path, seen)
                path.pop()
                seen.discard(u)

    for s in sorted(sources, key=g.vertices.index):
        dfs(s, [], {s})
    return out


def _oriented_word(T: MarkedGraph, loop: tuple[int, ...]) -> tuple[tuple[int, ...], CyclicWord]:
    # a loop and its reverse are the same candidate; keep the shortlex-smaller word
    w = T.loop_word(loop)
    wi = w.inverse()
    if wi.shortlex_key() < w.shortlex_key():
        return reverse_path(loop), wi
    return loop, w


def enumerate_candidates(T: MarkedGraph) -> list[CandidateLoop]:
    cycles = _simple_cycles(T)
    vsets = [set(_vertices_of(T, c)) for c in cycles]
    raw: list[tuple[str, tuple[int, ...]]] = [(CIRCLE, c) for c in cycles]
    for i in range(len(cycles)):
        for j in range(i + 1, len(cycles)):
            common = vsets[i] & vsets[j]
            if len(common) == 1:
                (v,) = common
                g1 = _rotate_to(T, cycles[i], v)
                g2 = _rotate_to(T, cycles[j], v)
                raw.append((BOUQUET, g1 + g2))
                raw.append((BOUQUET, g1 + reverse_path(g2)))
            elif not common:
                for eta in _paths_between(T, vsets[i], vsets[j]):
                    p, q = T.graph.start(eta[0]), T.graph.end(eta[-1])
                    g1 = _rotate_to(T, cycles[i], p)
                    g2 = _rotate_to(T, cycles[j], q)
                    raw.append((BARBELL, g1 + eta + g2 + reverse_path(eta)))
    out = []
    for shape, loop in raw:
        loop, w = _oriented_word(T, loop)
        out.append(CandidateLoop(shape, loop, w))
    out.sort(key=lambda c: (SHAPES.index(c.shape), c.word.shortlex_key()))
    return out


def candidate_word_bound(T: MarkedGraph) -> int:
    return max(len(c.word) for c in enumerate_candidates(T))


def _check_ranks(T: MarkedGraph, T2: MarkedGraph) -> None:
    if T.rank != T2.rank:
        raise ValueError(f"rank mismatch: {T.rank} vs {T2.rank}")


def _best(rows: Sequence[StretchRow]) -> tuple[Fraction | float, CyclicWord | None]:
    best, witness = Fraction(0), None
    for r in rows:
        if witness is None or r.ratio > best or (r.ratio == best and r.word.shortlex_key() < witness.shortlex_key()):
            best, witness = r.ratio, r.word
    return best, witness


def stretch_factor(T: MarkedGraph, T2: MarkedGraph) -> StretchReport:
    _check_ranks(T, T2)
    rows = []
    for c in enumerate_candidates(T):
        a = T.translation_length(c.word)
        b = T2.translation_length(c.word)
        rows.append(StretchRow(c.word, c.shape, a, b, ratio(b, a)))
    lam, witness = _best(rows)
    return StretchReport(lam, witness, tuple(rows))


def lipschitz_distance(T: MarkedGraph, T2: MarkedGraph) -> float:
    lam = stretch_factor(T.normalize_covolume(), T2.normalize_covolume()).factor
    return math.log(lam)


def brute_force_stretch(T: MarkedGraph, T2: MarkedGraph, max_len: int) -> StretchReport:
    """Maximum ratio over every conjugacy class of length at most ``max_len``;
    the witness is the shortlex-first maximiser."""
    _check_ranks(T, T2)
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    best, witness, row = Fraction(0), None, None
    for w in enumerate_cyclic_words(T.rank, max_len):
        a = T.translation_length(w)
        b = T2.translation_length(w)
        r = ratio(b, a)
        if witness is None or r > best:
            best, witness, row = r, w, StretchRow(w, None, a, b, r)
    return StretchReport(best, witness, (row,), exact=False, max_len=max_len)


def report_json(report: StretchReport, decimal: bool = False) -> str:
    return json.dumps(report.to_json(decimal), sort_keys=True, indent=2)
