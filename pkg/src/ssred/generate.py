"""Seeded random instances and exhaustive small families for the test suites."""
from __future__ import annotations

import math
import os
import random
from collections import Counter
from itertools import permutations, product
from typing import Iterator

from .covers import CoverDatum, validate_cover
from .graph import DualGraph, Edge, canonicalize, omega_degree, sorted_ids
from .models import Model, model_diagnostics

DEFAULT_SEED = 20240917


def default_seed() -> int:
    raw = os.environ.get("SSRED_SEED")
    return int(raw) if raw else DEFAULT_SEED


def make_rng(seed: int | None = None) -> random.Random:
    return random.Random(default_seed() if seed is None else seed)


# --------------------------------------------------------------------------
# graphs


def random_graph(
    rng: random.Random,
    max_vertices: int = 8,
    max_genus: int = 3,
    max_thickness: int = 4,
    extra_edges: int = 3,
    legs: int = 0,
) -> DualGraph:
    """A random connected graph: a random tree plus a few extra edges
    (loops and parallel edges allowed)."""
    n = rng.randint(1, max_vertices)
    names = [f"v{i}" for i in range(n)]
    genera = {v: rng.randint(0, max_genus) for v in names}
    ends = [(names[rng.randrange(i)], names[i]) for i in range(1, n)]
    for _ in range(rng.randint(0, extra_edges)):
        ends.append((rng.choice(names), rng.choice(names)))
    edges = {f"e{k}": Edge(pair, rng.randint(1, max_thickness)) for k, pair in enumerate(ends)}
    leg_map = {f"p{k}": rng.choice(names) for k in range(legs)}
    return DualGraph(genera, edges, leg_map)


def random_regular_model(rng: random.Random, max_vertices: int = 6, max_genus: int = 2) -> Model:
    """A random model: regular top, random valid exceptional set."""
    while True:
        g = random_graph(rng, max_vertices, max_genus, 1, extra_edges=2)
        candidates = [
            v for v in g.vertices if not (g.genera[v] == 0 and g.valence(v) == 1)
        ]
        ex = {v for v in candidates if rng.random() < 0.6}
        if not model_diagnostics(g, ex):
            return Model(g, frozenset(ex))


# --------------------------------------------------------------------------
# exhaustive tops


def _prufer_trees(n: int) -> Iterator[list[tuple[int, int]]]:
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, w = (i for i in range(n) if degree[i] == 1)
        edges.append((u, w))
        yield edges


def _shape(n: int, pairs: list[tuple[int, int]]) -> DualGraph:
    names = [f"v{i}" for i in range(n)]
    return DualGraph(
        {v: 0 for v in names},
        {f"e{k}": Edge((names[a], names[b]), 1) for k, (a, b) in enumerate(pairs)},
    )


def enumerate_shapes(max_vertices: int = 6, max_first_betti: int = 1, min_vertices: int = 1) -> list[DualGraph]:
    """Connected multigraphs (loops allowed) up to isomorphism, all
    vertices genus 0.  Unlabeled trees are grown one edge at a time; every
    graph of first Betti number k arises from one of number k - 1 by
    adding an edge."""
    out: list[DualGraph] = []
    for n in range(min_vertices, max_vertices + 1):
        layer: dict[bytes, tuple[list[tuple[int, int]], DualGraph]] = {}
        for pairs in _prufer_trees(n):
            g = _shape(n, pairs)
            layer.setdefault(canonicalize(g), (pairs, g))
        out.extend(g for _, g in layer.values())
        for _ in range(max_first_betti):
            grown: dict[bytes, tuple[list[tuple[int, int]], DualGraph]] = {}
            for pairs, _g in layer.values():
                for a in range(n):
                    for b in range(a, n):
                        more = pairs + [(a, b)]
                        g = _shape(n, more)
                        grown.setdefault(canonicalize(g), (more, g))
            out.extend(g for _, g in grown.values())
            layer = grown
    return out


def enumerate_tops(
    max_vertices: int = 6,
    max_first_betti: int = 1,
    genera: tuple[int, ...] = (0, 1, 2),
    min_vertices: int = 1,
) -> list[DualGraph]:
    """Connected regular graphs up to isomorphism with at most
    ``max_vertices`` vertices and first Betti number at most
    ``max_first_betti``, every vertex genus drawn from ``genera``."""
    tops = []
    for shape in enumerate_shapes(max_vertices, max_first_betti, min_vertices):
        order = shape.vertices
        autos = [[order.index(p[v]) for v in order] for p in vertex_automorphisms(shape)]
        seen = set()
        for labels in product(genera, repeat=len(order)):
            # labeling l is equivalent to l o p for every automorphism p
            key = min(tuple(labels[p[i]] for i in range(len(order))) for p in autos)
            if key in seen:
                continue
            seen.add(key)
            tops.append(DualGraph(dict(zip(order, labels)), dict(shape.edges)))
    return tops


def valid_exceptional_sets(top: DualGraph) -> Iterator[frozenset[str]]:
    """Every exceptional set making ``top`` (regular, unmarked) a valid model."""
    allowed = [
        v for v in top.vertices
        if not (top.genera[v] == 0 and top.valence(v) == 1) and not top.legs_at(v)
    ]
    comps = top.components()
    for mask in range(1 << len(allowed)):
        ex = frozenset(v for i, v in enumerate(allowed) if mask >> i & 1)
        if not any(comp <= ex for comp in comps):
            yield ex


def vertex_automorphisms(g: DualGraph) -> list[dict[str, str]]:
    """Vertex permutations preserving genera, leg counts and the edge
    multiset (with thicknesses).  Brute force; meant for tiny graphs."""
    def local(v: str) -> tuple:
        around = []
        for eid in g.incident_edges(v):
            e = g.edges[eid]
            other = e.ends[1] if e.ends[0] == v else e.ends[0]
            around.append((e.thickness, e.is_loop, g.genera[other]))
        return g.genera[v], len(g.legs_at(v)), tuple(sorted(around))

    classes: dict[tuple, list[str]] = {}
    for v in g.vertices:
        classes.setdefault(local(v), []).append(v)
    groups = list(classes.values())
    edges = Counter((*sorted(e.ends), e.thickness) for e in g.edges.values())
    out = []
    for images in product(*(permutations(grp) for grp in groups)):
        perm = {v: w for grp, img in zip(groups, images) for v, w in zip(grp, img)}
        moved = Counter(
            (*sorted((perm[e.ends[0]], perm[e.ends[1]])), e.thickness) for e in g.edges.values()
        )
        if moved == edges:
            out.append(perm)
    return out


def exceptional_set_orbits(top: DualGraph) -> Iterator[frozenset[str]]:
    """One valid exceptional set per orbit under the automorphisms of
    ``top``; isomorphic models are skipped."""
    autos = vertex_automorphisms(top)
    order = top.vertices
    seen = set()
    for ex in valid_exceptional_sets(top):
        key = min(tuple(sorted(order.index(perm[v]) for v in ex)) for perm in autos)
        if key in seen:
            continue
        seen.add(key)
        yield ex


# --------------------------------------------------------------------------
# covers


def _random_partition(rng: random.Random, items: list[int]) -> list[list[int]]:
    if not items:
        return []
    k = rng.randint(1, len(items))
    blocks: dict[int, list[int]] = {}
    for x in items:
        blocks.setdefault(rng.randrange(k), []).append(x)
    return sorted(blocks.values())


def _refine_to_divisors(rng: random.Random, block: list[int], t: int) -> list[list[int]]:
    """Split ``block`` into random pieces whose sizes divide ``t``."""
    out = []
    rest = list(block)
    rng.shuffle(rest)
    while rest:
        sizes = [s for s in range(1, len(rest) + 1) if t % s == 0]
        s = rng.choice(sizes)
        out.append(sorted(rest[:s]))
        rest = rest[s:]
    return out


def random_target(rng: random.Random, max_vertices: int = 5, legs: int = 0) -> DualGraph:
    """Sparse targets with many rational leaves and bridges, thicknesses
    with many divisors so dilations can occur."""
    n = rng.randint(1, max_vertices)
    names = [f"w{i}" for i in range(n)]
    genera = {v: rng.choice((0, 0, 0, 1, 2)) for v in names}
    ends = [(names[rng.randrange(i)], names[i]) for i in range(1, n)]
    for _ in range(rng.choice((0, 0, 1))):
        ends.append((rng.choice(names), rng.choice(names)))
    edges = {f"y{k}": Edge(pair, rng.choice((1, 2, 3, 4, 6))) for k, pair in enumerate(ends)}
    leg_map = {f"n{k}": rng.choice(names) for k in range(legs)}
    return DualGraph(genera, edges, leg_map)


def random_cover(
    rng: random.Random,
    target: DualGraph,
    sheets: int,
    marked: bool = False,
    slack: float = 0.3,
) -> CoverDatum | None:
    """Build a harmonic cover of ``target`` with ``sheets`` sheets.

    Each target vertex gets a set partition of the sheets (blocks are
    source vertices, block size = local degree).  Each target edge gets a
    permutation of the sheets matching its two ends; its source edges are
    a refinement of the induced blocks into pieces of size dividing the
    target thickness (piece size = dilation).  Source genera are the least
    allowed by Riemann-Hurwitz, occasionally raised.  Returns None when the
    source comes out disconnected.
    """
    N = sheets
    S = list(range(N))
    block_of: dict[str, dict[int, str]] = {}
    degree: dict[str, int] = {}
    vmap: dict[str, str] = {}
    for w in target.vertices:
        block_of[w] = {}
        for i, block in enumerate(_random_partition(rng, S)):
            v = f"{w}.{i}"
            vmap[v] = w
            degree[v] = len(block)
            for s in block:
                block_of[w][s] = v
    edges: dict[str, Edge] = {}
    emap: dict[str, str] = {}
    dil: dict[str, int] = {}
    ramification = {v: 0 for v in vmap}
    for y in target.edge_ids:
        a, b = target.edges[y].ends
        t = target.edges[y].thickness
        perm = S[:]
        rng.shuffle(perm)
        groups: dict[tuple[str, str], list[int]] = {}
        for s in S:
            groups.setdefault((block_of[a][s], block_of[b][perm[s]]), []).append(s)
        k = 0
        for (va, vb), group in sorted(groups.items()):
            for piece in _refine_to_divisors(rng, group, t):
                e = f"{y}.{k}"
                k += 1
                d = len(piece)
                edges[e] = Edge((va, vb), t // d)
                emap[e] = y
                dil[e] = d
                ramification[va] += d - 1
                ramification[vb] += d - 1
    legs: dict[str, str] = {}
    lmap: dict[str, str] = {}
    ldeg: dict[str, int] = {}
    if marked:
        for n in sorted_ids(target.legs):
            w = target.legs[n]
            for v in sorted_ids(x for x in vmap if vmap[x] == w):
                parts = _random_partition(rng, list(range(degree[v])))
                for j, part in enumerate(parts):
                    leg = f"{n}.{v}.{j}"
                    legs[leg] = v
                    lmap[leg] = n
                    ldeg[leg] = len(part)
                    ramification[v] += len(part) - 1
    genera = {}
    for v, w in vmap.items():
        need = degree[v] * (2 * target.genera[w] - 2) + ramification[v] + 2
        g = max(0, math.ceil(need / 2))
        if rng.random() < slack:
            g += 1
        genera[v] = g
    source = DualGraph(genera, edges, legs)
    if not source.is_connected():
        return None
    c = CoverDatum(source, target, vmap, emap, degree, dil, N, lmap, ldeg if marked else {})
    diags = validate_cover(c)
    if diags:
        raise AssertionError(f"generator produced an invalid cover: {diags[0]}")
    return c


def random_covers(
    rng: random.Random,
    count: int,
    max_target_vertices: int = 5,
    max_sheets: int = 3,
    marked: bool = False,
    min_source_genus: int = 2,
) -> list[CoverDatum]:
    """``count`` random valid covers with connected sources."""
    from .graph import arithmetic_genus

    out = []
    while len(out) < count:
        target = random_target(rng, max_target_vertices, legs=rng.randint(0, 2) if marked else 0)
        c = random_cover(rng, target, rng.randint(1, max_sheets), marked)
        if c is None or arithmetic_genus(c.source) < min_source_genus:
            continue
        out.append(c)
    return out


def has_contractible_leaf_issue(c: CoverDatum) -> bool:
    """True when some rational target leaf qualifying for contraction has a
    preimage that is not a leaf (edges would have to map to a point)."""
    for w in c.target.vertices:
        if c.target.valence(w) != 1 or omega_degree(c.target, w) > 0:
            continue
        fib = c.fiber(w)
        if all(omega_degree(c.source, v) <= 0 for v in fib) and any(c.source.valence(v) != 1 for v in fib):
            return True
    return False
