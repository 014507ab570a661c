"""Shared fixtures loading and hypothesis strategies."""
from __future__ import annotations

from pathlib import Path

from hypothesis import strategies as st

from ssred import io
from ssred.graph import DualGraph, Edge

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load(name: str):
    return io.loads((DATA / name).read_text())


def graph(name: str) -> DualGraph:
    return io.graph_from_obj(load(name))


def model(name: str):
    return io.model_from_obj(load(name))


def cover(name: str):
    return io.cover_from_obj(load(name))


def path_graph(genera, thicknesses=None) -> DualGraph:
    names = [f"v{i}" for i in range(len(genera))]
    thicknesses = thicknesses or [1] * (len(names) - 1)
    return DualGraph(
        dict(zip(names, genera)),
        {f"e{i}": (names[i], names[i + 1], t) for i, t in enumerate(thicknesses)},
    )


def cycle_graph(genera, thicknesses=None) -> DualGraph:
    n = len(genera)
    names = [f"v{i}" for i in range(n)]
    thicknesses = thicknesses or [1] * n
    return DualGraph(
        dict(zip(names, genera)),
        {f"e{i}": (names[i], names[(i + 1) % n], t) for i, t in enumerate(thicknesses)},
    )


@st.composite
def graphs(draw, max_vertices=6, max_genus=3, max_thickness=4, max_extra=3, max_legs=0):
    """Connected graphs: a random tree plus extra edges (loops allowed)."""
    n = draw(st.integers(1, max_vertices))
    names = [f"v{i}" for i in range(n)]
    genera = draw(st.lists(st.integers(0, max_genus), min_size=n, max_size=n))
    pairs = [(names[draw(st.integers(0, i - 1))], names[i]) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.sampled_from(names), st.sampled_from(names)), max_size=max_extra))
    pairs += extra
    thick = draw(st.lists(st.integers(1, max_thickness), min_size=len(pairs), max_size=len(pairs)))
    legs = draw(st.lists(st.sampled_from(names), max_size=max_legs))
    return DualGraph(
        dict(zip(names, genera)),
        {f"e{k}": Edge(p, t) for k, (p, t) in enumerate(zip(pairs, thick))},
        {f"p{k}": v for k, v in enumerate(legs)},
    )


def relabel(g: DualGraph, perm_seed: int) -> DualGraph:
    """Same graph with every id renamed through a seeded shuffle."""
    import random

    rng = random.Random(perm_seed)
    vs = list(g.genera)
    new = [f"x{i}" for i in range(len(vs))]
    rng.shuffle(new)
    vmap = dict(zip(vs, new))
    es = list(g.edges)
    enew = [f"f{i}" for i in range(len(es))]
    rng.shuffle(enew)
    emap = dict(zip(es, enew))
    legs = {f"q{i}": vmap[v] for i, (_, v) in enumerate(sorted(g.legs.items()))}
    return DualGraph(
        {vmap[v]: g.genera[v] for v in vs},
        {emap[e]: Edge((vmap[g.edges[e].ends[0]], vmap[g.edges[e].ends[1]]), g.edges[e].thickness) for e in es},
        legs,
    )
