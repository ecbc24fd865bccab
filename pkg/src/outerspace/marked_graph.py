"""Marked metric graphs: points of unprojectivized outer space.

Oriented edges are encoded like letters: edge ``k`` forwards is ``2*k`` and
backwards ``2*k + 1``.  The marking stores, for each generator, a closed edge
path at the base vertex; the reverse direction (edge paths to words) goes
through the spanning tree and an inverted automorphism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from outerspace.whitehead import invert_automorphism, nielsen_reduce_tuple
from outerspace.words import CyclicWord, Word, apply_substitution, cyclic_reduce


class GraphFormatError(ValueError):
    """Invalid marked-graph data; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def parse_length(value, where: str = "length") -> Fraction:
    """Exact rational from ``"p/q"``, a decimal string or an int."""
    if isinstance(value, bool):
        raise GraphFormatError(where, "boolean is not a length")
    try:
        if isinstance(value, float):
            value = repr(value)
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise GraphFormatError(where, f"cannot parse {value!r} as a rational") from None


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Edge:
    id: str
    origin: str
    terminus: str
    length: Fraction


def reverse_path(path: Sequence[int]) -> tuple[int, ...]:
    return tuple(c ^ 1 for c in reversed(path))


def tighten(path: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for c in path:
        if stack and stack[-1] == c ^ 1:
            stack.pop()
        else:
            stack.append(c)
    return tuple(stack)


def cyclically_tighten(path: Iterable[int]) -> tuple[int, ...]:
    p = tighten(path)
    i, j = 0, len(p) - 1
    while i < j and p[i] == p[j] ^ 1:
        i += 1
        j -= 1
    return p[i:j + 1]


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphFormatError("vertices", "duplicate vertex name")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise GraphFormatError("edges", "duplicate edge id")
        for e in self.edges:
            if e.origin not in vs or e.terminus not in vs:
                raise GraphFormatError(f"edges[{e.id}]", "endpoint is not a listed vertex")
            if e.length <= 0:
                raise GraphFormatError(f"edges[{e.id}].length", "lengths must be positive")

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: k for k, e in enumerate(self.edges)}

    def start(self, oe: int) -> str:
        e = self.edges[oe >> 1]
        return e.terminus if oe & 1 else e.origin

    def end(self, oe: int) -> str:
        e = self.edges[oe >> 1]
        return e.origin if oe & 1 else e.terminus

    def length(self, oe: int) -> Fraction:
        return self.edges[oe >> 1].length

    def path_length(self, path: Iterable[int]) -> Fraction:
        return sum((self.edges[c >> 1].length for c in path), Fraction(0))

    def valence(self, v: str) -> int:
        return sum((e.origin == v) + (e.terminus == v) for e in self.edges)

    @cached_property
    def outgoing(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {v: [] for v in self.vertices}
        for k, e in enumerate(self.edges):
            out[e.origin].append(2 * k)
            out[e.terminus].append(2 * k + 1)
        return out

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for oe in self.outgoing[v]:
                u = self.end(oe)
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        return len(seen) == len(self.vertices)

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def volume(self) -> Fraction:
        return sum((e.length for e in self.edges), Fraction(0))

    def check_path(self, path: Sequence[int], where: str) -> None:
        for a, b in zip(path, path[1:]):
            if self.end(a) != self.start(b):
                raise GraphFormatError(where, "consecutive edges do not share an endpoint")

    def scaled(self, lam: Fraction) -> "MetricGraph":
        return MetricGraph(self.vertices, tuple(replace(e, length=e.length * lam) for e in self.edges))

    def spanning_tree(self, root: str | None = None) -> frozenset[str]:
        """Breadth-first spanning tree, preferring earlier edges."""
        root = root if root is not None else self.vertices[0]
        seen = {root}
        tree = []
        todo = [root]
        while todo:
            nxt = []
            for v in todo:
                for oe in self.outgoing[v]:
                    u = self.end(oe)
                    if u not in seen:
                        seen.add(u)
                        tree.append(self.edges[oe >> 1].id)
                        nxt.append(u)
            todo = nxt
        return frozenset(tree)


@dataclass(frozen=True)
class Marking:
    base: str
    spanning_tree: frozenset[str]
    generator_paths: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class MarkedGraph:
    """A metric graph with an identification of its fundamental group with F_N."""

    graph: MetricGraph
    marking: Marking
    rank: int = field(init=False)

    def __post_init__(self):
        g, m = self.graph, self.marking
        object.__setattr__(self, "rank", len(m.generator_paths))
        if not g.is_connected():
            raise GraphFormatError("edges", "graph is not connected")
        for v in g.vertices:
            if g.valence(v) < 2:
                raise GraphFormatError("vertices", f"vertex {v!r} has valence {g.valence(v)} (graph must be minimal)")
        if g.betti() != self.rank:
            raise GraphFormatError("rank", f"graph has first Betti number {g.betti()}, marking gives {self.rank} generators")
        if m.base not in g.vertices:
            raise GraphFormatError("marking.base", f"unknown vertex {m.base!r}")
        for eid in m.spanning_tree:
            if eid not in g.edge_index:
                raise GraphFormatError("spanning_tree", f"unknown edge {eid!r}")
        if len(m.spanning_tree) != len(g.vertices) - 1 or not self._tree_spans():
            raise GraphFormatError("spanning_tree", "edges do not form a spanning tree")
        for i, p in enumerate(m.generator_paths):
            where = f"marking.paths[{i}]"
            if p:
                g.check_path(p, where)
                if g.start(p[0]) != m.base or g.end(p[-1]) != m.base:
                    raise GraphFormatError(where, "path is not closed at the base vertex")
        ok, _ = nielsen_reduce_tuple(self.marking_words, self.rank)
        if not ok:
            raise GraphFormatError("marking.paths", "paths do not induce an isomorphism onto the fundamental group")

    def _tree_spans(self) -> bool:
        g = self.graph
        tree = {g.edge_index[e] for e in self.marking.spanning_tree}
        seen = {g.vertices[0]}
        todo = [g.vertices[0]]
        while todo:
            v = todo.pop()
            for oe in g.outgoing[v]:
                if oe >> 1 in tree:
                    u = g.end(oe)
                    if u not in seen:
                        seen.add(u)
                        todo.append(u)
        return len(seen) == len(g.vertices)

    # --- fundamental group bookkeeping ---

    @cached_property
    def free_edges(self) -> tuple[int, ...]:
        """Edges outside the spanning tree, in edge order; these index the
        free basis of the fundamental group at the base vertex."""
        tree = self.marking.spanning_tree
        return tuple(k for k, e in enumerate(self.graph.edges) if e.id not in tree)

    def collapse(self, path: Iterable[int]) -> Word:
        """Word in the free-edge basis obtained by crushing the spanning tree."""
        pos = {k: i for i, k in enumerate(self.free_edges)}
        out = []
        for c in path:
            i = pos.get(c >> 1)
            if i is not None:
                out.append(2 * i + (c & 1))
        return Word(out)

    @cached_property
    def marking_words(self) -> list[Word]:
        return [self.collapse(p) for p in self.marking.generator_paths]

    @cached_property
    def _inverse_marking(self) -> list[Word]:
        return invert_automorphism(self.marking_words, self.rank)

    @cached_property
    def _tree_paths(self) -> dict[str, tuple[int, ...]]:
        """Tree path from the base vertex to every vertex."""
        g = self.graph
        tree = {g.edge_index[e] for e in self.marking.spanning_tree}
        paths = {self.marking.base: ()}
        todo = [self.marking.base]
        while todo:
            v = todo.pop()
            for oe in g.outgoing[v]:
                if oe >> 1 in tree:
                    u = g.end(oe)
                    if u not in paths:
                        paths[u] = paths[v] + (oe,)
                        todo.append(u)
        return paths

    def loop_word(self, loop: Sequence[int]) -> CyclicWord:
        """Conjugacy class in F_N represented by a closed edge path."""
        if not loop:
            return CyclicWord()
        self.graph.check_path(tuple(loop) + (loop[0],), "loop")
        tp = self._tree_paths[self.graph.start(loop[0])]
        based = tp + tuple(loop) + reverse_path(tp)
        return cyclic_reduce(apply_substitution(self.collapse(based), self._inverse_marking))[0]

    # --- metric ---

    @cached_property
    def _images(self) -> list[tuple[int, ...]]:
        return [tighten(p) for p in self.marking.generator_paths]

    def image_path(self, w: Word | str) -> tuple[int, ...]:
        imgs = self._images
        out: list[int] = []
        for c in Word(w):
            p = imgs[c >> 1]
            if c & 1:
                for x in reversed(p):
                    x ^= 1
                    if out and out[-1] == x ^ 1:
                        out.pop()
                    else:
                        out.append(x)
            else:
                for x in p:
                    if out and out[-1] == x ^ 1:
                        out.pop()
                    else:
                        out.append(x)
        return tuple(out)

    def translation_length(self, w: Word | str) -> Fraction:
        return self.graph.path_length(cyclically_tighten(self.image_path(w)))

    def quotient_volume(self) -> Fraction:
        return self.graph.volume()

    def rescale(self, lam) -> "MarkedGraph":
        lam = Fraction(lam)
        if lam <= 0:
            raise ValueError("scale factor must be positive")
        return MarkedGraph(self.graph.scaled(lam), self.marking)

    def normalize_covolume(self) -> "MarkedGraph":
        return self.rescale(1 / self.quotient_volume())

    def remark(self, images: Sequence[Word | str]) -> "MarkedGraph":
        """Precompose the marking with the automorphism ``x_i -> images[i]``,
        so that ``||w||`` of the result is ``||phi(w)||`` here."""
        words = [Word(im) for im in images]
        if len(words) != self.rank or not nielsen_reduce_tuple(words, self.rank)[0]:
            raise ValueError("substitution is not an automorphism")
        paths = tuple(self.image_path(u) for u in words)
        return MarkedGraph(self.graph, replace(self.marking, generator_paths=paths))

    # --- serialisation ---

    def edge_ref(self, oe: int) -> str:
        eid = self.graph.edges[oe >> 1].id
        return "~" + eid if oe & 1 else eid

    def to_json(self) -> dict:
        g = self.graph
        return {
            "type": "marked_graph",
            "rank": self.rank,
            "vertices": list(g.vertices),
            "edges": [{"id": e.id, "from": e.origin, "to": e.terminus, "length": format_fraction(e.length)} for e in g.edges],
            "spanning_tree": [e.id for e in g.edges if e.id in self.marking.spanning_tree],
            "marking": {"base": self.marking.base,
                        "paths": [[self.edge_ref(c) for c in p] for p in self.marking.generator_paths]},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MarkedGraph":
        if not isinstance(doc, dict):
            raise GraphFormatError("document", "expected a JSON object")
        if doc.get("type") != "marked_graph":
            raise GraphFormatError("type", f"expected 'marked_graph', got {doc.get('type')!r}")
        try:
            rank = doc["rank"]
            raw_vertices = doc["vertices"]
            raw_edges = doc["edges"]
            tree = doc["spanning_tree"]
            marking = doc["marking"]
            base = marking["base"]
            raw_paths = marking["paths"]
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(str(exc).strip("'"), "missing field") from None
        if not isinstance(rank, int) or rank < 1:
            raise GraphFormatError("rank", "must be a positive integer")
        edges = []
        for i, e in enumerate(raw_edges):
            try:
                edges.append(Edge(str(e["id"]), str(e["from"]), str(e["to"]),
                                  parse_length(e["length"], f"edges[{i}].length")))
            except (KeyError, TypeError) as exc:
                raise GraphFormatError(f"edges[{i}]", f"missing field {exc}") from None
        graph = MetricGraph(tuple(str(v) for v in raw_vertices), tuple(edges))
        if len(raw_paths) != rank:
            raise GraphFormatError("marking.paths", f"expected {rank} paths, got {len(raw_paths)}")
        paths = []
        for i, p in enumerate(raw_paths):
            codes = []
            for ref in p:
                ref = str(ref)
                rev = ref.startswith("~")
                eid = ref[1:] if rev else ref
                if eid not in graph.edge_index:
                    raise GraphFormatError(f"marking.paths[{i}]", f"unknown edge {ref!r}")
                codes.append(2 * graph.edge_index[eid] + rev)
            paths.append(tuple(codes))
        return cls(graph, Marking(str(base), frozenset(str(t) for t in tree), tuple(paths)))

    @classmethod
    def load(cls, path) -> "MarkedGraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def translation_length(T: MarkedGraph, w: Word | str) -> Fraction:
    return T.translation_length(w)


def quotient_volume(T: MarkedGraph) -> Fraction:
    return T.quotient_volume()


def rescale(T: MarkedGraph, lam) -> MarkedGraph:
    return T.rescale(lam)


def normalize_covolume(T: MarkedGraph) -> MarkedGraph:
    return T.normalize_covolume()


def remark(T: MarkedGraph, images: Sequence[Word | str]) -> MarkedGraph:
    return T.remark(images)


# --- constructors ---


def standard_marking(graph: MetricGraph, base: str | None = None,
                     tree: Iterable[str] | None = None) -> MarkedGraph:
    """Mark ``graph`` by its free edges: generator ``i`` runs through the
    tree to the ``i``-th edge outside ``tree``, across it, and back."""
    base = base if base is not None else graph.vertices[0]
    tree = frozenset(tree) if tree is not None else graph.spanning_tree(base)
    idx = graph.edge_index
    tree_k = {idx[e] for e in tree}
    paths = {base: ()}
    todo = [base]
    while todo:
        v = todo.pop()
        for oe in graph.outgoing[v]:
            if oe >> 1 in tree_k and graph.end(oe) not in paths:
                paths[graph.end(oe)] = paths[v] + (oe,)
                todo.append(graph.end(oe))
    gens = []
    for k, e in enumerate(graph.edges):
        if k in tree_k:
            continue
        gens.append(paths[e.origin] + (2 * k,) + reverse_path(paths[e.terminus]))
    return MarkedGraph(graph, Marking(base, tree, tuple(tighten(p) for p in gens)))


def rose(*lengths) -> MarkedGraph:
    edges = tuple(Edge(f"e{i}", "v", "v", Fraction(l)) for i, l in enumerate(lengths))
    return standard_marking(MetricGraph(("v",), edges))


def barbell(u, v, eta) -> MarkedGraph:
    """Loops ``u`` at ``p`` and ``v`` at ``q`` joined by an arc ``eta``;
    marked by ``a -> u`` and ``b -> eta v eta^-1``."""
    g = MetricGraph(("p", "q"), (Edge("u", "p", "p", Fraction(u)), Edge("eta", "p", "q", Fraction(eta)),
                                 Edge("v", "q", "q", Fraction(v))))
    return standard_marking(g, "p", ["eta"])


def theta(l1, l2, l3) -> MarkedGraph:
    """Two vertices joined by three edges; ``a -> e1 ~e0``, ``b -> e2 ~e0``."""
    g = MetricGraph(("p", "q"), (Edge("e0", "p", "q", Fraction(l1)), Edge("e1", "p", "q", Fraction(l2)),
                                 Edge("e2", "p", "q", Fraction(l3))))
    return standard_marking(g, "p", ["e0"])


def merge_valence_two(T: MarkedGraph) -> MarkedGraph:
    """Erase valence-2 vertices other than the base, concatenating edges."""
    while True:
        g, m = T.graph, T.marking
        target = None
        for v in g.vertices:
            if v == m.base or g.valence(v) != 2:
                continue
            inc = g.outgoing[v]
            if len({c >> 1 for c in inc}) == 2:
                target = v
                break
        if target is None:
            return T
        T = _merge_at(T, target)


def _merge_at(T: MarkedGraph, v: str) -> MarkedGraph:
    g, m = T.graph, T.marking
    out1, out2 = g.outgoing[v]
    e_in = out1 ^ 1  # arrives at v
    f_out = out2  # leaves v
    ke, kf = e_in >> 1, f_out >> 1
    new_edge = Edge(g.edges[ke].id + "+" + g.edges[kf].id, g.start(e_in), g.end(f_out),
                    g.length(e_in) + g.length(f_out))
    keep = [k for k in range(len(g.edges)) if k not in (ke, kf)]
    new_edges = tuple(g.edges[k] for k in keep) + (new_edge,)
    renum = {k: i for i, k in enumerate(keep)}
    nk = len(keep)

    def convert(path):
        out = []
        p = list(path)
        i = 0
        while i < len(p):
            c = p[i]
            if c == e_in:
                assert p[i + 1] == f_out
                out.append(2 * nk)
                i += 2
                continue
            if c == f_out ^ 1:
                assert p[i + 1] == e_in ^ 1
                out.append(2 * nk + 1)
                i += 2
                continue
            out.append(2 * renum[c >> 1] + (c & 1))
            i += 1
        return tuple(out)

    ids = {g.edges[ke].id, g.edges[kf].id}
    tree = set(m.spanning_tree) - ids
    if ids <= m.spanning_tree:
        tree.add(new_edge.id)
    graph = MetricGraph(tuple(x for x in g.vertices if x != v), new_edges)
    paths = tuple(convert(tighten(p)) for p in m.generator_paths)
    return MarkedGraph(graph, Marking(m.base, frozenset(tree), paths))
