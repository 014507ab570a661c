"""Brute-force ground truth at desk scale.

Everything here enumerates contractions one component at a time and
deduplicates by canonical form; nothing calls the hull algorithms it is
used to check.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .canonical import canonical_form
from .covers import CoverDatum, _qualifies, contract_cover_vertex, require_valid_cover
from .errors import InvariantBreach, PreconditionError
from .graph import DualGraph, _canonicalize, _contract, canonicalize, contract, omega_degree, require_valid, sorted_ids
from .models import Model, model_diagnostics

DEFAULT_MODEL_BOUND = 8
DEFAULT_COVER_BOUND = 5


@dataclass(frozen=True)
class DominationPoset:
    """``relation`` holds pairs ``(i, j)``: element i is one contraction
    below element j."""

    elements: tuple[str, ...]
    relation: tuple[tuple[int, int], ...]
    minimal_elements: tuple[int, ...]

    def to_obj(self) -> dict:
        return {
            "elements": list(self.elements),
            "relation": [list(p) for p in self.relation],
            "minimal": list(self.minimal_elements),
        }


def model_key(g: DualGraph, exceptional) -> str:
    colors = {v: ("exceptional" if v in exceptional else None) for v in g.genera}
    return _canonicalize(g, colors).decode()


def cover_key(c: CoverDatum, ex_source=frozenset(), ex_target=frozenset()) -> str:
    """Canonical string of a cover datum (optionally with exceptional sets)."""
    colors = {}
    arcs = []
    S, T = c.source, c.target
    for side, g, ex in (("s", S, ex_source), ("t", T, ex_target)):
        for v in g.genera:
            deg = c.vertex_degree[v] if side == "s" else None
            colors[f"{side}v/{v}"] = f"{side}v|{g.genera[v]}|{deg}|{int(v in ex)}"
        for eid, e in g.edges.items():
            dil = c.edge_dilation[eid] if side == "s" else None
            colors[f"{side}e/{eid}"] = f"{side}e|{e.thickness}|{dil}"
            for end in e.ends:
                arcs.append((f"{side}e/{eid}", f"{side}v/{end}", "end"))
        for leg, v in g.legs.items():
            deg = c.leg_degree_of(leg) if side == "s" else None
            colors[f"{side}l/{leg}"] = f"{side}l|{deg}"
            arcs.append((f"{side}l/{leg}", f"{side}v/{v}", "at"))
    for v, w in c.vertex_map.items():
        arcs.append((f"sv/{v}", f"tv/{w}", "map"))
    for e, y in c.edge_map.items():
        arcs.append((f"se/{e}", f"te/{y}", "map"))
    for leg, n in c.leg_map.items():
        arcs.append((f"sl/{leg}", f"tl/{n}", "map"))
    return f"N={c.global_degree};" + canonical_form(colors, arcs).decode()


def _poset(keys: list[str], relation: set[tuple[int, int]]) -> DominationPoset:
    has_below = {j for _, j in relation}
    minimal = tuple(i for i in range(len(keys)) if i not in has_below)
    return DominationPoset(tuple(keys), tuple(sorted(relation)), minimal)


def enumerate_contractions(m: Model, bound: int = DEFAULT_MODEL_BOUND) -> DominationPoset:
    """All models reachable from ``m`` by contracting exceptional
    components one at a time, whenever the single contraction is allowed."""
    if len(m.top.genera) > bound:
        raise PreconditionError("bound-exceeded", f"{len(m.top.genera)} vertices > bound {bound}")
    require_valid(m.top)
    # states below are produced by contraction and valid by construction
    start = (m.top, frozenset(m.exceptional))
    keys = [model_key(*start)]
    index = {keys[0]: 0}
    relation: set[tuple[int, int]] = set()
    queue = deque([(0, start)])
    while queue:
        j, (g, ex) = queue.popleft()
        for v in sorted_ids(ex):
            if omega_degree(g, v) > 0:
                continue
            try:
                smaller, _ = _contract(g, {v})
            except PreconditionError:
                continue
            state = (smaller, ex - {v})
            key = model_key(*state)
            if key not in index:
                index[key] = len(keys)
                keys.append(key)
                queue.append((index[key], state))
            relation.add((index[key], j))
    return _poset(keys, relation)


def enumerate_cover_contractions(
    c: CoverDatum,
    ex_source=None,
    ex_target=None,
    bound: int = DEFAULT_COVER_BOUND,
) -> DominationPoset:
    """All cover data reachable by simultaneous contractions, in any order.

    Without exceptional sets every qualifying target vertex may be chosen
    (the stable-model moves); with them, only those allowed by the hull.
    """
    require_valid_cover(c)
    if len(c.target.genera) > bound:
        raise PreconditionError("bound-exceeded", f"{len(c.target.genera)} target vertices > bound {bound}")
    hull = ex_source is not None
    start = (c, frozenset(ex_source or ()), frozenset(ex_target or ()))
    keys = [cover_key(*start)]
    index = {keys[0]: 0}
    relation: set[tuple[int, int]] = set()
    queue = deque([(0, start)])
    while queue:
        j, (cur, exs, ext) = queue.popleft()
        for w in cur.target.vertices:
            if hull and not _qualifies(cur, w, exs, ext):
                continue
            if not hull and not _qualifies(cur, w):
                continue
            if cur.target.valence(w) == 0:
                continue
            step = contract_cover_vertex(cur, w)
            state = (step.result, exs - step.contracted_source_vertices, ext - {w})
            key = cover_key(*state)
            if key not in index:
                index[key] = len(keys)
                keys.append(key)
                queue.append((index[key], state))
            relation.add((index[key], j))
    return _poset(keys, relation)


def check_confluence(poset: DominationPoset) -> bool:
    """Exactly one minimal element, reachable from every element."""
    n = len(poset.elements)
    if n == 0 or len(poset.minimal_elements) != 1:
        return False
    below: dict[int, list[int]] = {j: [] for j in range(n)}
    for i, j in poset.relation:
        if i == j:
            return False
        below[j].append(i)
    target = poset.minimal_elements[0]
    # acyclicity plus reachability, by depth-first search with colors
    state = [0] * n
    reaches = [False] * n

    def visit(x: int) -> bool:
        if state[x] == 1:
            return False
        if state[x] == 2:
            return True
        state[x] = 1
        ok = True
        for y in below[x]:
            ok = visit(y) and ok
        reaches[x] = x == target or any(reaches[y] for y in below[x])
        state[x] = 2
        return ok

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        acyclic = all(visit(x) for x in range(n))
    finally:
        sys.setrecursionlimit(limit)
    return acyclic and all(reaches)


def relatively_minimal_models(top: DualGraph, bound: int = DEFAULT_MODEL_BOUND) -> list[tuple[frozenset[str], DualGraph]]:
    """Semi-stable models dominated by ``top`` admitting no further
    contraction, keyed by which components of ``top`` survive.

    Any component may be contracted here, not only exceptional ones, so
    this enumerates the relatively minimal models below a regular model.
    """
    if len(top.genera) > bound:
        raise PreconditionError("bound-exceeded", f"{len(top.genera)} vertices > bound {bound}")
    seen: dict[frozenset[str], DualGraph] = {frozenset(top.genera): top}
    queue = deque([top])
    minimal = []
    while queue:
        g = queue.popleft()
        moved = False
        for v in g.vertices:
            if g.legs_at(v) or omega_degree(g, v) > 0:
                continue
            try:
                smaller, _ = contract(g, {v})
            except PreconditionError:
                continue
            moved = True
            key = frozenset(smaller.genera)
            if key in seen:
                if canonicalize(seen[key]) != canonicalize(smaller):
                    raise InvariantBreach("order-dependent", "same survivors, different graphs", sorted_ids(key))
                continue
            seen[key] = smaller
            queue.append(smaller)
        if not moved:
            minimal.append((frozenset(g.genera), g))
    return sorted(minimal, key=lambda item: sorted_ids(item[0]))


def model_is_valid(top: DualGraph, exceptional) -> bool:
    return not model_diagnostics(top, exceptional)
