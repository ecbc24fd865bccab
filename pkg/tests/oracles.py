"""Independent reference implementations used only by the tests.

Everything here works on plain strings or small dicts and deliberately
avoids the package's own move tables, necklace enumeration and folding
code, so agreement is a genuine cross-check.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from outerspace.boundary import AMALGAM, HNN, PulledTree, PullSpec, SplittingTree
from outerspace.marked_graph import Edge, MarkedGraph, MetricGraph, standard_marking
from outerspace.words import Word, is_cyclically_reduced, is_proper_power


# --- strings ---

def inv(s: str) -> str:
    return s[::-1].swapcase()


def free_reduce(s: str) -> str:
    out = []
    for ch in s:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def cyc_reduce(s: str) -> str:
    s = free_reduce(s)
    while len(s) > 1 and s[0] == s[-1].swapcase():
        s = s[1:-1]
    return s


ORDER = {}
for _i, _c in enumerate("abcdefghijklmnopqrstuvwxyz"):
    ORDER[_c] = 2 * _i
    ORDER[_c.upper()] = 2 * _i + 1


def canon(s: str) -> str:
    """Least rotation under a < A < b < B < ..., by brute force."""
    s = cyc_reduce(s)
    if not s:
        return s
    return min((s[i:] + s[:i] for i in range(len(s))), key=lambda r: [ORDER[c] for c in r])


def conjugate(u: str, v: str) -> bool:
    cu, cv = cyc_reduce(u), cyc_reduce(v)
    return len(cu) == len(cv) and (cv in cu + cu if cu else not cv)


def alphabet(rank: int) -> list[str]:
    return [c for i in range(rank) for c in ("abcdefghijklmnopqrstuvwxyz"[i], "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[i])]


def all_cyclic_words(rank: int, max_len: int) -> set[str]:
    """Every conjugacy class up to ``max_len`` by plain product enumeration."""
    letters = alphabet(rank)
    out = set()
    for n in range(1, max_len + 1):
        for t in itertools.product(letters, repeat=n):
            s = "".join(t)
            if free_reduce(s) == s and not (len(s) > 1 and s[0] == s[-1].swapcase()):
                out.add(canon(s))
    return out


def whitehead_automorphisms(rank: int) -> list[dict[str, str]]:
    """Letter images of every Whitehead automorphism, written out by hand."""
    letters = alphabet(rank)
    autos = []
    # permutations and inversions of generators
    for perm in itertools.permutations(range(rank)):
        for signs in itertools.product((1, -1), repeat=rank):
            img = {}
            for i in range(rank):
                tgt = letters[2 * perm[i]] if signs[i] == 1 else letters[2 * perm[i] + 1]
                img[letters[2 * i]] = tgt
                img[letters[2 * i + 1]] = inv(tgt)
            autos.append(img)
    for m in letters:
        others = [x for x in letters if x not in (m, inv(m))]
        for bits in itertools.product((0, 1), repeat=len(others)):
            S = {m} | {x for x, b in zip(others, bits) if b}
            img = {}
            for x in letters:
                if x in (m, inv(m)):
                    img[x] = x
                    continue
                pre = inv(m) if inv(x) in S else ""
                post = m if x in S else ""
                img[x] = pre + x + post
            autos.append(img)
    return autos


def apply_images(s: str, img: dict[str, str]) -> str:
    return free_reduce("".join(img[c] for c in s))


def primitive_orbit(rank: int, cap: int) -> set[str]:
    """Breadth-first search from ``a`` under Whitehead automorphisms, never
    leaving length ``cap``.  Complete below the cap because every
    non-minimal word has a strictly shortening Whitehead move."""
    autos = whitehead_automorphisms(rank)
    seen = {"a"}
    frontier = ["a"]
    while frontier:
        nxt = []
        for w in frontier:
            for img in autos:
                u = canon(apply_images(w, img))
                if len(u) <= cap and u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    return seen


# --- Stallings folding ---

def stallings_is_basis(words: list[str], rank: int) -> bool:
    """Do ``words`` freely generate F_rank?  Fold the wedge of petals and
    check for the one-vertex rose with every letter; then count."""
    if len(words) != rank:
        return False
    # graph: dict (vertex, letter) -> vertex, letters lower/upper
    edges: set[tuple[int, str, int]] = set()
    nv = 1
    for w in words:
        w = free_reduce(w)
        if not w:
            return False
        prev = 0
        for i, ch in enumerate(w):
            nxt = 0 if i == len(w) - 1 else nv
            if nxt:
                nv += 1
            edges.add((prev, ch, nxt))
            prev = nxt
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    changed = True
    while changed:
        changed = False
        out: dict[tuple[int, str], int] = {}
        for (u, ch, v) in list(edges):
            u, v = find(u), find(v)
            for a, c, b in ((u, ch, v), (v, inv(ch), u)):
                key = (a, c)
                if key in out and find(out[key]) != find(b):
                    parent[find(out[key])] = find(b)
                    changed = True
                else:
                    out[key] = b
        edges = {(find(u), ch, find(v)) for u, ch, v in edges}
    verts = {find(x) for x in range(nv)}
    labels = {ch.lower() for _, ch, _ in edges}
    return len(verts) == 1 and labels == set(alphabet(rank)[::2])


# --- random marked graphs ---

def random_lengths(rng: random.Random, k: int) -> list[Fraction]:
    return [Fraction(rng.randint(1, 16), 4) for _ in range(k)]


def random_graph(rng: random.Random, rank: int, max_edges: int = 6) -> MetricGraph:
    """Connected multigraph with Betti number ``rank``, no vertex of
    valence below 3, at most ``max_edges`` edges."""
    while True:
        nv = rng.randint(1, min(2 * rank - 2, max_edges - rank + 1))
        ne = nv + rank - 1
        if ne > max_edges:
            continue
        ends = [(rng.randrange(nv), rng.randrange(nv)) for _ in range(ne)]
        val = [0] * nv
        for a, b in ends:
            val[a] += 1
            val[b] += 1
        if min(val) < 3:
            continue
        names = [f"v{i}" for i in range(nv)]
        lengths = random_lengths(rng, ne)
        edges = tuple(Edge(f"e{k}", names[a], names[b], lengths[k]) for k, (a, b) in enumerate(ends))
        g = MetricGraph(tuple(names), edges)
        if g.is_connected():
            return g


def random_automorphism(rng: random.Random, rank: int, steps: int = 3) -> list[str]:
    """Product of a few random elementary Nielsen moves, as letter images."""
    imgs = alphabet(rank)[::2]
    for _ in range(steps):
        i, j = rng.sample(range(rank), 2) if rank > 1 else (0, 0)
        kind = rng.randrange(3)
        if kind == 0 and rank > 1:
            imgs[i] = free_reduce(imgs[i] + (imgs[j] if rng.random() < 0.5 else inv(imgs[j])))
        elif kind == 1 and rank > 1:
            imgs[i] = free_reduce((imgs[j] if rng.random() < 0.5 else inv(imgs[j])) + imgs[i])
        else:
            imgs[i] = inv(imgs[i])
    return imgs


def random_marked_graph(rng: random.Random, rank: int, max_edges: int = 6, twist: int = 0) -> MarkedGraph:
    g = random_graph(rng, rank, max_edges)
    base = rng.choice(g.vertices)
    T = standard_marking(g, base)
    if twist:
        T = T.remark(random_automorphism(rng, rank, twist))
    return T


# --- tight loops in a graph, classified by shape ---

def tight_loops(T: MarkedGraph, max_edges: int) -> list[tuple[int, ...]]:
    """Cyclically tight closed edge paths crossing each edge at most twice."""
    g = T.graph
    out = []
    ne = len(g.edges)

    def extend(path, count):
        if len(path) > max_edges:
            return
        last = path[-1]
        for oe in range(2 * ne):
            if g.start(oe) != g.end(last) or oe == last ^ 1 or count[oe >> 1] == 2:
                continue
            count[oe >> 1] += 1
            path.append(oe)
            if g.end(oe) == g.start(path[0]) and oe != path[0] ^ 1:
                out.append(tuple(path))
            extend(path, count)
            path.pop()
            count[oe >> 1] -= 1

    for first in range(2 * ne):
        count = [0] * ne
        count[first >> 1] = 1
        if g.end(first) == g.start(first):
            out.append((first,))
        extend([first], count)
    return out


def classify_loop(T: MarkedGraph, loop: tuple[int, ...]):
    """Return (shape, structure key) or None for non-candidates."""
    g = T.graph
    mult: dict[int, list[int]] = {}
    for oe in loop:
        mult.setdefault(oe >> 1, []).append(oe)
    once = {k for k, v in mult.items() if len(v) == 1}
    twice = {k for k, v in mult.items() if len(v) == 2}
    if any(v[0] == v[1] for k, v in mult.items() if len(v) == 2):
        return None  # barbell arcs are crossed once each way
    visits: dict[str, int] = {}
    for oe in loop:
        visits[g.start(oe)] = visits.get(g.start(oe), 0) + 1
    if not twice:
        reps = [v for v, c in visits.items() if c > 1]
        if not reps:
            return ("circle", frozenset(once))
        if len(reps) == 1 and visits[reps[0]] == 2:
            return ("bouquet", frozenset(once))
        return None
    # barbell: once-edges form two vertex-disjoint embedded circles, twice-edges an arc
    comp = _components(g, once)
    if len(comp) != 2:
        return None
    for vs, es in comp:
        if len(es) != len(vs):
            return None  # not a single circle
        for v in vs:
            deg = sum((g.edges[k].origin == v) + (g.edges[k].terminus == v) for k in es)
            if deg != 2:
                return None
    arcs = _components(g, twice)
    if len(arcs) != 1:
        return None
    arc_vs, arc_es = arcs[0]
    degs = {v: sum((g.edges[k].origin == v) + (g.edges[k].terminus == v) for k in twice) for v in arc_vs}
    if len(arc_es) != len(arc_vs) - 1 or any(d > 2 for d in degs.values()):
        return None
    ends = [v for v, d in degs.items() if d == 1]
    (c1, _), (c2, _) = comp
    if len(ends) != 2 or not ((ends[0] in c1 and ends[1] in c2) or (ends[0] in c2 and ends[1] in c1)):
        return None
    if any(v in c1 or v in c2 for v in arc_vs if v not in ends):
        return None
    return ("barbell", frozenset(once) | frozenset(-1 - k for k in twice))


def _components(g, edge_ids):
    adj = {}
    for k in edge_ids:
        e = g.edges[k]
        adj.setdefault(e.origin, set()).add((e.terminus, k))
        adj.setdefault(e.terminus, set()).add((e.origin, k))
    seen = set()
    comps = []
    for v in adj:
        if v in seen:
            continue
        vs, es, todo = {v}, set(), [v]
        seen.add(v)
        while todo:
            x = todo.pop()
            for y, k in adj[x]:
                es.add(k)
                if y not in seen:
                    seen.add(y)
                    vs.add(y)
                    todo.append(y)
        comps.append((vs, es))
    return comps


# --- random pulled trees ---

def random_element(rng: random.Random, gens: list[int], max_len: int) -> Word:
    while True:
        w = Word([2 * rng.choice(gens) + rng.randint(0, 1) for _ in range(rng.randint(1, max_len))])
        if w and is_cyclically_reduced(w) and is_proper_power(w) is None:
            return w


def random_pulled_tree(rng: random.Random, ranks=(2, 3, 4)) -> PulledTree:
    n = rng.choice(ranks)
    kind = rng.choice([HNN, AMALGAM])
    base = SplittingTree(n, kind, Fraction(rng.randint(1, 6), rng.randint(1, 3)),
                         rng.randint(1, n - 1) if kind == AMALGAM else None)
    l = base.edge_length
    c = rng.random()
    if c < 0.2:
        l1 = l * Fraction(rng.randint(0, 8), 8)
        l2 = l - l1
    elif c < 0.3:
        l1, l2 = l, Fraction(0)
    else:
        l1 = l * Fraction(rng.randint(0, 4), 8)
        l2 = l * Fraction(rng.randint(0, 4), 8)
    pulls = []
    for end, li in ((1, l1), (2, l2)):
        if rng.random() < 0.85:
            pulls.append(PullSpec(end, random_element(rng, list(base.generators_at(end)), rng.choice([1, 2, 4])), li))
    return PulledTree(base, tuple(pulls))


def with_patterns(rng: random.Random, PT: PulledTree, w: Word) -> Word:
    """Splice a pulled pattern into ``w`` so the folded turns actually occur."""
    b, n = PT.base, PT.rank
    p = rng.choice(PT.pulls) if PT.pulls else None
    if p is None or rng.random() < 0.4:
        return w
    t = Word([2 * (n - 1)])
    g = p.element ** rng.choice([1, -1, 2])
    if b.kind == HNN:
        return (t.inverse() * g * t if p.end == 1 else t * g * t.inverse()) * w
    return g * w
