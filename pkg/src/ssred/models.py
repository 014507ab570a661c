"""Normal models presented through their minimal desingularization, and
the hull calculus on them.

A :class:`Model` is a regular semi-stable graph ``top`` together with the
set of its components that the desingularization map sends to points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InvariantBreach, PreconditionError, ValidationError
from .graph import (
    ContractionTrace,
    Diagnostic,
    DualGraph,
    EdgeMarking,
    arithmetic_genus,
    base_change,
    contract,
    desingularize,
    omega_degree,
    require_valid,
    sorted_ids,
    splitting_index,
    validate_graph,
)


@dataclass(frozen=True)
class Model:
    top: DualGraph
    exceptional: frozenset[str]


@dataclass(frozen=True)
class HullResult:
    hull: DualGraph
    trace: ContractionTrace
    kept_exceptional: frozenset[str]


def model_diagnostics(
    top: DualGraph, exceptional: Iterable[str], require_regular: bool = True
) -> list[Diagnostic]:
    diags = validate_graph(top)
    if diags:
        return diags
    exceptional = set(map(str, exceptional))
    out = []
    for v in sorted_ids(exceptional - set(top.genera)):
        out.append(Diagnostic("unknown-vertex", (v,), f"exceptional vertex {v} is not in the graph"))
    exceptional &= set(top.genera)
    if require_regular:
        for eid in top.edge_ids:
            if top.edges[eid].thickness != 1:
                out.append(Diagnostic("not-regular", (eid,), f"edge {eid} has thickness {top.edges[eid].thickness}"))
    if top.edge_markings:
        out.append(Diagnostic(
            "model-edge-marking", tuple(sorted_ids(top.edge_markings)),
            "model tops carry no edge markings; pass markings to the marked hull instead",
        ))
    for v in sorted_ids(exceptional):
        if top.genera[v] == 0 and top.valence(v) == 1:
            out.append(Diagnostic("(-1)-in-exceptional", (v,), f"exceptional vertex {v} is a rational leaf"))
        if top.legs_at(v):
            out.append(Diagnostic("marked-exceptional", (v,), f"exceptional vertex {v} carries legs"))
    for comp in top.components():
        if comp <= exceptional:
            out.append(Diagnostic(
                "full-component-exceptional", tuple(sorted_ids(comp)),
                "a whole connected component is exceptional",
            ))
    return out


def make_model(top: DualGraph, exceptional: Iterable[str], require_regular: bool = True) -> Model:
    diags = model_diagnostics(top, exceptional, require_regular)
    if diags:
        raise ValidationError(diags, "model")
    return Model(top, frozenset(map(str, exceptional)))


def _minus_two(g: DualGraph, vertices: Iterable[str]) -> set[str]:
    return {v for v in vertices if g.genera[v] == 0 and g.valence(v) == 2}


def stable_hull(m: Model) -> HullResult:
    """Contract the (-2)-curves of the exceptional locus."""
    victims = _minus_two(m.top, m.exceptional)
    hull, trace = contract(m.top, victims)
    kept = frozenset(m.exceptional - victims)
    for v in kept:
        if omega_degree(hull, v) <= 0:
            raise InvariantBreach("hull-kept-nonpositive", f"kept vertex {v} has degree <= 0", (v,))
    return HullResult(hull, trace, kept)


def is_relatively_minimal(m: Model) -> bool:
    return all(omega_degree(m.top, v) > 0 for v in m.exceptional)


def base_change_model(m: Model, e: int) -> Model:
    """The model after a ramified base change of index ``e``, presented on
    its new minimal desingularization: the chains resolving the scaled
    nodes join the exceptional locus."""
    z, inserted, _ = desingularize(base_change(m.top, e))
    return Model(z, frozenset(m.exceptional | inserted))


def stable_marked_hull(
    m: Model,
    legs: Mapping[str, str] | None = None,
    edge_markings: Mapping[str, EdgeMarking] | None = None,
    e: int = 1,
) -> HullResult:
    """Stable marked hull of ``m`` with the given markings, after a base
    change of index ``e``.

    Edge markings must land on integral points once scaled by ``e``;
    otherwise the error carries the splitting index to use.  The scaled
    top is resolved, integral edge markings becoming legs on the inserted
    rational vertices, and every exceptional component of non-positive
    marked degree is contracted.
    """
    marked = m.top.with_markings(legs, edge_markings)
    require_valid(marked)
    d = splitting_index(marked)
    if e % d:
        raise PreconditionError(
            "non-integral-marking",
            f"edge markings need a base change index divisible by {d}",
            sorted_ids(marked.edge_markings),
            splitting_index=d,
        )
    z, inserted, _ = desingularize(base_change(marked, e))
    exceptional = set(m.exceptional) | inserted
    victims = {v for v in exceptional if omega_degree(z, v, include_markings=True) <= 0}
    hull, trace = contract(z, victims, marked=True)
    kept = frozenset(exceptional - victims)
    for v in kept:
        if omega_degree(hull, v, include_markings=True) <= 0:
            raise InvariantBreach("hull-kept-nonpositive", f"kept vertex {v} has marked degree <= 0", (v,))
    return HullResult(hull, trace, kept)


def marked_stabilization(g: DualGraph) -> tuple[DualGraph, frozenset[str]]:
    """Stable marked model of ``g`` plus the set of contracted vertices."""
    require_valid(g)
    if g.edge_markings:
        raise PreconditionError(
            "edge-markings-present",
            "resolve edge markings into legs first (base change and desingularize)",
            sorted_ids(g.edge_markings),
            splitting_index=splitting_index(g),
        )
    genus = arithmetic_genus(g)
    if 2 * genus - 2 + len(g.legs) < 1:
        raise PreconditionError(
            "unstable-type", f"2g - 2 + #legs = {2 * genus - 2 + len(g.legs)} < 1"
        )
    current = g
    while True:
        bad = [v for v in current.vertices if omega_degree(current, v, include_markings=True) <= 0]
        if not bad:
            break
        current, _ = contract(current, {bad[0]}, marked=True)
    return current, frozenset(set(g.genera) - set(current.genera))


def stable_marked_model(g: DualGraph) -> DualGraph:
    """Contract components of non-positive marked degree until none are left."""
    return marked_stabilization(g)[0]


def join_models(m1: Model, m2: Model) -> Model:
    """Smallest model dominating both, for two models on the same top."""
    if m1.top != m2.top:
        raise PreconditionError("different-top", "join needs both models presented on the same top")
    return Model(m1.top, m1.exceptional & m2.exceptional)
