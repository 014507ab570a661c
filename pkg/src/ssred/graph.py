"""Dual graphs of semi-stable fibers and the elementary moves on them.

A :class:`DualGraph` has one vertex per irreducible component (labeled by
its geometric genus) and one edge per node.  Every edge has two
half-edges ``(edge_id, 0)`` and ``(edge_id, 1)`` sitting at ``ends[0]`` and
``ends[1]``; a loop puts both at the same vertex.  The thickness of an
edge is the valuation of ``a`` in the local equation ``uv = a``.  Legs are
markings that already sit on a component; edge markings sit at a rational
distance from ``ends[0]`` inside an edge.

All values are immutable and every operation is a pure function.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

from .canonical import canonical_form
from .errors import PreconditionError, ValidationError

_ID_PARTS = re.compile(r"(\d+)")


@lru_cache(maxsize=1 << 16)
def id_key(x) -> tuple:
    """Natural sort key, so that ``"v2" < "v10"``."""
    return tuple(
        (0, int(p), "") if p.isdigit() else (1, 0, p)
        for p in _ID_PARTS.split(str(x))
        if p
    )


def sorted_ids(ids: Iterable) -> list[str]:
    return sorted(ids, key=id_key)


def min_id(ids: Iterable) -> str:
    return min(ids, key=id_key)


def fraction_text(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Edge:
    ends: tuple[str, str]
    thickness: int = 1

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]

    def other(self, v: str) -> str:
        return self.ends[1] if self.ends[0] == v else self.ends[0]


@dataclass(frozen=True)
class EdgeMarking:
    edge: str
    origin: str
    position: Fraction


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    ids: tuple = ()
    message: str = ""
    severity: str = "error"

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity,
            "ids": [str(i) for i in self.ids],
            "message": self.message,
        }


@dataclass(frozen=True)
class ContractionTrace:
    """Correspondence from a larger graph to the graph it contracts onto.

    Images are tagged pairs ``("vertex", id)`` or ``("edge", id)``.
    ``merged`` lists, for every edge of the smaller graph, the source edges
    it is made of in order along the chain, and ``witness`` their
    thicknesses; the witness sums to the image edge's thickness.
    """

    vertex_image: Mapping[str, tuple[str, str]]
    edge_image: Mapping[str, tuple[str, str]]
    merged: Mapping[str, tuple[str, ...]]
    witness: Mapping[str, tuple[int, ...]]


def _edge(value) -> Edge:
    if isinstance(value, Edge):
        return Edge((str(value.ends[0]), str(value.ends[1])), value.thickness)
    a, b, *rest = value
    return Edge((str(a), str(b)), rest[0] if rest else 1)


@dataclass(frozen=True)
class DualGraph:
    genera: Mapping[str, int]
    edges: Mapping[str, Edge] = field(default_factory=dict)
    legs: Mapping[str, str] = field(default_factory=dict)
    edge_markings: Mapping[str, EdgeMarking] = field(default_factory=dict)

    def __post_init__(self):
        genera = {str(v): g for v, g in self.genera.items()}
        edges = {}
        for eid, value in self.edges.items():
            e = _edge(value)
            a, b = e.ends
            if id_key(b) < id_key(a):
                e = Edge((b, a), e.thickness)
            edges[str(eid)] = e
        legs = {str(k): str(v) for k, v in self.legs.items()}
        markings = {}
        for mid, mk in self.edge_markings.items():
            if not isinstance(mk, EdgeMarking):
                mk = EdgeMarking(str(mk[0]), str(mk[1]), Fraction(mk[2]))
            mk = EdgeMarking(str(mk.edge), str(mk.origin), Fraction(mk.position))
            e = edges.get(mk.edge)
            # measure every position from ends[0] so equal graphs compare equal
            if e is not None and not e.is_loop and mk.origin == e.ends[1]:
                if isinstance(e.thickness, int):
                    mk = EdgeMarking(mk.edge, e.ends[0], e.thickness - mk.position)
            markings[str(mid)] = mk
        object.__setattr__(self, "genera", MappingProxyType(genera))
        object.__setattr__(self, "edges", MappingProxyType(edges))
        object.__setattr__(self, "legs", MappingProxyType(legs))
        object.__setattr__(self, "edge_markings", MappingProxyType(markings))

    __hash__ = None

    @property
    def vertices(self) -> list[str]:
        return sorted_ids(self.genera)

    @property
    def edge_ids(self) -> list[str]:
        return sorted_ids(self.edges)

    @cached_property
    def _half_edges(self) -> dict[str, list[tuple[str, int]]]:
        halves: dict[str, list[tuple[str, int]]] = {v: [] for v in self.genera}
        for eid in self.edge_ids:
            for side, v in enumerate(self.edges[eid].ends):
                halves.setdefault(v, []).append((eid, side))
        return halves

    @cached_property
    def _legs_at(self) -> dict[str, list[str]]:
        at: dict[str, list[str]] = {}
        for leg in sorted_ids(self.legs):
            at.setdefault(self.legs[leg], []).append(leg)
        return at

    def half_edges_at(self, v: str) -> list[tuple[str, int]]:
        return list(self._half_edges.get(v, ()))

    def valence(self, v: str) -> int:
        return len(self._half_edges.get(v, ()))

    def legs_at(self, v: str) -> list[str]:
        return list(self._legs_at.get(v, ()))

    def incident_edges(self, v: str) -> list[str]:
        """Edges at ``v``, each loop listed once."""
        return sorted_ids({e for e, _ in self._half_edges.get(v, ())})

    def neighbors(self, v: str) -> list[str]:
        return sorted_ids({self.edges[e].other(v) for e in self.incident_edges(v)})

    def markings_on(self, eid: str) -> list[str]:
        return sorted_ids(m for m, mk in self.edge_markings.items() if mk.edge == eid)

    def components(self) -> list[set[str]]:
        seen: set[str] = set()
        comps = []
        for start in self.vertices:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for w in self.neighbors(v):
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def with_markings(self, legs=None, edge_markings=None) -> "DualGraph":
        return DualGraph(
            self.genera,
            self.edges,
            {**self.legs, **(legs or {})},
            {**self.edge_markings, **(edge_markings or {})},
        )

    def without_markings(self) -> "DualGraph":
        return DualGraph(self.genera, self.edges)


# --------------------------------------------------------------------------
# validation


def validate_graph(g: DualGraph) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if not g.genera:
        out.append(Diagnostic("empty-graph", (), "graph has no vertices"))
    for v in g.vertices:
        genus = g.genera[v]
        if not isinstance(genus, int) or isinstance(genus, bool) or genus < 0:
            out.append(Diagnostic("genus-nonnegative", (v,), f"vertex {v} has genus {genus!r}"))
    for eid in g.edge_ids:
        e = g.edges[eid]
        for v in e.ends:
            if v not in g.genera:
                out.append(Diagnostic("edge-endpoint", (eid, v), f"edge {eid} ends at unknown vertex {v}"))
        t = e.thickness
        if not isinstance(t, int) or isinstance(t, bool) or t < 1:
            out.append(Diagnostic("thickness-positive", (eid,), f"edge {eid} has thickness {t!r}"))
    for leg in sorted_ids(g.legs):
        if g.legs[leg] not in g.genera:
            out.append(Diagnostic("leg-vertex", (leg,), f"leg {leg} sits on unknown vertex {g.legs[leg]}"))
    for mid in sorted_ids(set(g.legs) & set(g.edge_markings)):
        out.append(Diagnostic("id-collision", (mid,), f"{mid} is both a leg and an edge marking"))

    spots: dict[tuple, str] = {}
    for mid in sorted_ids(g.edge_markings):
        mk = g.edge_markings[mid]
        e = g.edges.get(mk.edge)
        if e is None:
            out.append(Diagnostic("marking-edge", (mid, mk.edge), f"marking {mid} on unknown edge {mk.edge}"))
            continue
        if mk.origin not in e.ends:
            out.append(Diagnostic("marking-anchor", (mid, mk.origin), f"marking {mid} anchored at {mk.origin}, not an end of {mk.edge}"))
            continue
        t = e.thickness
        if not isinstance(t, int) or t < 1:
            continue
        if not 0 < mk.position < t:
            out.append(Diagnostic(
                "marking-in-interior", (mid, mk.edge),
                f"marking {mid} at {fraction_text(mk.position)} outside (0, {t})",
            ))
            continue
        spot = (mk.edge, mk.position)
        if e.is_loop:
            spot = (mk.edge, min(mk.position, t - mk.position))
        if spot in spots:
            out.append(Diagnostic(
                "marking-collision", (spots[spot], mid),
                f"markings {spots[spot]} and {mid} occupy the same point of edge {mk.edge}",
            ))
        else:
            spots[spot] = mid
    return out


def require_valid(g: DualGraph) -> None:
    diags = validate_graph(g)
    if diags:
        raise ValidationError(diags, "graph")


# --------------------------------------------------------------------------
# invariants


def omega_degree(g: DualGraph, v: str, include_markings: bool = False) -> int:
    """Degree of the relative dualizing sheaf on the component ``v``.

    ``2 g(v) - 2 + valence(v)``, a loop contributing two to the valence.
    With ``include_markings`` the legs at ``v`` are added; edge markings
    must have been turned into legs beforehand.
    """
    if v not in g.genera:
        raise PreconditionError("unknown-vertex", f"no vertex {v}", (v,))
    deg = 2 * g.genera[v] - 2 + g.valence(v)
    if include_markings:
        if g.edge_markings:
            raise PreconditionError(
                "edge-markings-present",
                "marked degree needs edge markings resolved into legs",
                sorted_ids(g.edge_markings),
            )
        deg += len(g.legs_at(v))
    return deg


def arithmetic_genus(g: DualGraph) -> int:
    if not g.genera or not g.is_connected():
        raise PreconditionError("disconnected", "arithmetic genus needs a connected graph")
    b1 = len(g.edges) - len(g.genera) + 1
    return b1 + sum(g.genera.values())


def splitting_index(g: DualGraph) -> int:
    require_valid(g)
    return math.lcm(1, *(mk.position.denominator for mk in g.edge_markings.values()))


def base_change(g: DualGraph, e: int) -> DualGraph:
    """Ramified base change of index ``e``: thicknesses and positions scale."""
    if not isinstance(e, int) or e < 1:
        raise PreconditionError("base-change-index", f"index must be a positive integer, got {e!r}")
    require_valid(g)
    return DualGraph(
        g.genera,
        {eid: Edge(x.ends, x.thickness * e) for eid, x in g.edges.items()},
        g.legs,
        {m: EdgeMarking(mk.edge, mk.origin, mk.position * e) for m, mk in g.edge_markings.items()},
    )


def _fresh(base: str, taken: set[str]) -> str:
    candidate = base
    n = 0
    while candidate in taken:
        n += 1
        candidate = f"{base}_{n}"
    taken.add(candidate)
    return candidate


# --------------------------------------------------------------------------
# desingularization and contraction


def desingularize(g: DualGraph) -> tuple[DualGraph, frozenset[str], ContractionTrace]:
    """Minimal desingularization: an edge of thickness t becomes a chain of t
    unit edges through t - 1 new rational vertices.

    Edge markings at integral positions become legs on the inserted vertex
    at that distance; fractional positions are refused with the splitting
    index needed to clear them.
    """
    require_valid(g)
    bad = [m for m, mk in g.edge_markings.items() if mk.position.denominator != 1]
    if bad:
        d = splitting_index(g)
        raise PreconditionError(
            "non-integral-marking",
            f"edge markings off the integral points; base change by {d} first",
            sorted_ids(bad),
            splitting_index=d,
        )
    genera = dict(g.genera)
    legs = dict(g.legs)
    edges: dict[str, Edge] = {}
    taken_v = set(genera)
    taken_e = set(g.edges)
    vertex_image = {v: ("vertex", v) for v in genera}
    edge_image: dict[str, tuple[str, str]] = {}
    merged: dict[str, tuple[str, ...]] = {}
    inserted: set[str] = set()

    for eid in g.edge_ids:
        e = g.edges[eid]
        t = e.thickness
        chain = [e.ends[0]]
        for k in range(1, t):
            v = _fresh(f"{eid}.{k}", taken_v)
            genera[v] = 0
            inserted.add(v)
            vertex_image[v] = ("edge", eid)
            chain.append(v)
        chain.append(e.ends[1])
        seg_ids = [eid] + [_fresh(f"{eid}.{k}", taken_e) for k in range(1, t)]
        for k, sid in enumerate(seg_ids):
            edges[sid] = Edge((chain[k], chain[k + 1]), 1)
            edge_image[sid] = ("edge", eid)
        merged[eid] = tuple(seg_ids)
        for mid in g.markings_on(eid):
            k = int(g.edge_markings[mid].position)
            legs[mid] = chain[k]

    trace = ContractionTrace(
        MappingProxyType(vertex_image),
        MappingProxyType(edge_image),
        MappingProxyType(merged),
        MappingProxyType({eid: (1,) * g.edges[eid].thickness for eid in g.edges}),
    )
    return DualGraph(genera, edges, legs), frozenset(inserted), trace


def contract(
    g: DualGraph, victims: Iterable[str], marked: bool = False
) -> tuple[DualGraph, ContractionTrace]:
    """Contract the components ``victims`` onto a semi-stable graph.

    Every victim must have non-positive degree (marked degree if
    ``marked``), and no connected component may vanish entirely.  A
    rational vertex of valence two is smoothed, its two edges merging into
    one whose thickness is the sum; a rational leaf is blown down together
    with its edge.  Without ``marked``, victims may carry no markings; with
    it, a leg on a blown-down leaf moves to the point it lands on.
    """
    require_valid(g)
    return _contract(g, victims, marked)


def _contract(g: DualGraph, victims: Iterable[str], marked: bool = False) -> tuple[DualGraph, ContractionTrace]:
    victims = set(map(str, victims))
    unknown = victims - set(g.genera)
    if unknown:
        raise PreconditionError("unknown-vertex", "victims not in graph", sorted_ids(unknown))
    for v in sorted_ids(victims):
        deg = omega_degree(g, v, include_markings=marked)
        if deg > 0:
            raise PreconditionError(
                "omega-positive", f"vertex {v} has degree {deg} > 0 and cannot be contracted", (v,)
            )
        if not marked and g.legs_at(v):
            raise PreconditionError("marked-victim", f"vertex {v} carries legs", (v,))
    for comp in g.components():
        if comp <= victims:
            raise PreconditionError(
                "full-component", "a whole connected component would be contracted", sorted_ids(comp)
            )

    genera = dict(g.genera)
    # edge -> [end0, end1, thickness, [(source edge, thickness), ...] ordered from end0]
    work = {
        eid: [e.ends[0], e.ends[1], e.thickness, [(eid, e.thickness)]]
        for eid, e in g.edges.items()
    }
    legs = dict(g.legs)
    # marking -> [edge, distance from end0]
    marks = {m: [mk.edge, mk.position] for m, mk in g.edge_markings.items()}
    fate: dict[tuple[str, str], tuple[str, str]] = {}

    def halves(v):
        out = []
        for eid in sorted_ids(work):
            a, b = work[eid][0], work[eid][1]
            if a == v:
                out.append((eid, 0))
            if b == v:
                out.append((eid, 1))
        return out

    for x in sorted_ids(victims):
        hs = halves(x)
        if len(hs) == 2 and hs[0][0] != hs[1][0]:
            (e1, s1), (e2, s2) = hs
            a1, b1, t1, c1 = work[e1]
            a2, b2, t2, c2 = work[e2]
            # orient e1 as o1 -> x and e2 as x -> o2
            if s1 == 0:
                o1, c1 = b1, list(reversed(c1))
                flip1 = True
            else:
                o1, flip1 = a1, False
            if s2 == 1:
                o2, c2 = a2, list(reversed(c2))
                flip2 = True
            else:
                o2, flip2 = b2, False
            new = min_id([e1, e2])
            for m, (me, d) in marks.items():
                if me == e1:
                    marks[m] = [new, t1 - d if flip1 else d]
                elif me == e2:
                    marks[m] = [new, t1 + (t2 - d if flip2 else d)]
            del work[e1], work[e2]
            work[new] = [o1, o2, t1 + t2, c1 + c2]
            for old in (e1, e2):
                if old != new:
                    fate[("edge", old)] = ("edge", new)
            fate[("vertex", x)] = ("edge", new)
        elif len(hs) == 1:
            (eid, side), = hs
            o = work[eid][1 - side]
            for m, (me, _) in marks.items():
                if me == eid:
                    raise PreconditionError(
                        "marked-victim", f"edge {eid} carrying marking {m} would vanish", (eid, m)
                    )
            for leg, at in legs.items():
                if at == x:
                    legs[leg] = o
            del work[eid]
            fate[("edge", eid)] = ("vertex", o)
            fate[("vertex", x)] = ("vertex", o)
        else:
            raise PreconditionError(
                "not-contractible", f"vertex {x} has valence {len(hs)} at contraction time", (x,)
            )
        del genera[x]

    def resolve(item):
        while item in fate:
            item = fate[item]
        return item

    edges = {}
    merged = {}
    witness = {}
    for eid, (a, b, t, comp) in work.items():
        if id_key(b) < id_key(a):
            comp = list(reversed(comp))
            for m, (me, d) in marks.items():
                if me == eid:
                    marks[m] = [eid, t - d]
            a, b = b, a
        edges[eid] = Edge((a, b), t)
        merged[eid] = tuple(c for c, _ in comp)
        witness[eid] = tuple(tc for _, tc in comp)
    new_marks = {m: EdgeMarking(me, edges[me].ends[0], d) for m, (me, d) in marks.items()}
    out = DualGraph(genera, edges, legs, new_marks)
    trace = ContractionTrace(
        MappingProxyType({v: resolve(("vertex", v)) for v in g.genera}),
        MappingProxyType({e: resolve(("edge", e)) for e in g.edges}),
        MappingProxyType(merged),
        MappingProxyType(witness),
    )
    return out, trace


# --------------------------------------------------------------------------
# canonical form


def _position_list(ds) -> list[str]:
    return [fraction_text(d) for d in sorted(ds)]


def graph_structure(g: DualGraph, colors: Mapping[str, object] | None = None, prefix: str = ""):
    """Node colors and labeled arcs describing ``g`` for :func:`canonical_form`."""
    legs_at = g._legs_at
    node_colors = {}
    for v, genus in g.genera.items():
        extra = None if colors is None else colors.get(v)
        node_colors[prefix + v] = f"v|{genus}|{len(legs_at.get(v, ()))}|{extra}"
    arcs = []
    for eid, e in g.edges.items():
        t = e.thickness
        a, b = prefix + e.ends[0], prefix + e.ends[1]
        if g.edge_markings:
            ds = [g.edge_markings[m].position for m in g.markings_on(eid)]
            from0 = ",".join(_position_list(ds))
            from1 = ",".join(_position_list(t - d for d in ds))
        else:
            from0 = from1 = ""
        if e.is_loop:
            arcs.append((a, a, f"loop|{t}|{min(from0, from1)}"))
        else:
            arcs.append((a, b, f"edge|{t}|{from0}"))
            arcs.append((b, a, f"edge|{t}|{from1}"))
    return node_colors, arcs


def canonicalize(g: DualGraph, colors: Mapping[str, object] | None = None) -> bytes:
    """Byte string equal for two graphs exactly when they are isomorphic.

    ``colors`` optionally attaches an extra label to each vertex that the
    isomorphism must also preserve (the oracle uses it to mark exceptional
    vertices).
    """
    require_valid(g)
    return _canonicalize(g, colors)


def _canonicalize(g: DualGraph, colors: Mapping[str, object] | None = None) -> bytes:
    node_colors, arcs = graph_structure(g, colors)
    return canonical_form(node_colors, arcs)
