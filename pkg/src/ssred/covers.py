"""Finite covers of semi-stable models as harmonic maps of dual graphs.

A :class:`CoverDatum` records where every component and node of the
source goes, the degree ``d_v`` of each component map, the common
ramification index ``d_e`` of the two branches at each node, and the
global degree.  Validity means the thickness, harmonicity and degree laws
hold (and, for marked covers, that the preimage of the target markings is
exactly the source markings).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InvariantBreach, PreconditionError, ValidationError
from .graph import (
    Diagnostic,
    DualGraph,
    Edge,
    arithmetic_genus,
    base_change,
    contract,
    omega_degree,
    sorted_ids,
    validate_graph,
)
from .models import marked_stabilization, model_diagnostics


def _frozen(mapping, value=str):
    return MappingProxyType({str(k): value(v) for k, v in (mapping or {}).items()})


def _as_int(x):
    return x if isinstance(x, int) else int(x)


@dataclass(frozen=True)
class CoverDatum:
    source: DualGraph
    target: DualGraph
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str]
    vertex_degree: Mapping[str, int]
    edge_dilation: Mapping[str, int]
    global_degree: int
    leg_map: Mapping[str, str] = field(default_factory=dict)
    leg_degree: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertex_map", _frozen(self.vertex_map))
        object.__setattr__(self, "edge_map", _frozen(self.edge_map))
        object.__setattr__(self, "vertex_degree", _frozen(self.vertex_degree, _as_int))
        object.__setattr__(self, "edge_dilation", _frozen(self.edge_dilation, _as_int))
        object.__setattr__(self, "leg_map", _frozen(self.leg_map))
        object.__setattr__(self, "leg_degree", _frozen(self.leg_degree, _as_int))

    __hash__ = None

    def fiber(self, w: str) -> list[str]:
        return sorted_ids(v for v, x in self.vertex_map.items() if x == w)

    def leg_degree_of(self, leg: str) -> int:
        return self.leg_degree.get(leg, 1)


@dataclass(frozen=True)
class CoverStep:
    contracted_target_vertex: str
    contracted_source_vertices: frozenset[str]
    result: CoverDatum


def _incidence(g: DualGraph, eid: str, v: str) -> int:
    return sum(1 for x in g.edges[eid].ends if x == v)


def validate_cover(c: CoverDatum) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for side, g in (("source", c.source), ("target", c.target)):
        for d in validate_graph(g):
            out.append(Diagnostic(d.rule, d.ids, f"{side}: {d.message}", d.severity))
    if out:
        return out
    S, T = c.source, c.target

    structural = []
    for v in S.vertices:
        if c.vertex_map.get(v) not in T.genera:
            structural.append(Diagnostic("vertex-map-total", (v,), f"source vertex {v} has no image in the target"))
    for v in sorted_ids(set(c.vertex_map) - set(S.genera)):
        structural.append(Diagnostic("vertex-map-total", (v,), f"vertex map mentions unknown source vertex {v}"))
    for e in S.edge_ids:
        if c.edge_map.get(e) not in T.edges:
            structural.append(Diagnostic("edge-map-total", (e,), f"source edge {e} has no image edge"))
    for e in sorted_ids(set(c.edge_map) - set(S.edges)):
        structural.append(Diagnostic("edge-map-total", (e,), f"edge map mentions unknown source edge {e}"))
    for v in S.vertices:
        d = c.vertex_degree.get(v)
        if d is None or d < 1:
            structural.append(Diagnostic("degree-positive", (v,), f"vertex {v} has local degree {d!r}"))
    for e in S.edge_ids:
        d = c.edge_dilation.get(e)
        if d is None or d < 1:
            structural.append(Diagnostic("dilation-positive", (e,), f"edge {e} has dilation {d!r}"))
    if not isinstance(c.global_degree, int) or c.global_degree < 1:
        structural.append(Diagnostic("global-degree-positive", (), f"global degree {c.global_degree!r}"))
    if structural:
        return structural

    images = set(c.vertex_map.values())
    for w in T.vertices:
        if w not in images:
            out.append(Diagnostic("vertex-map-surjective", (w,), f"target vertex {w} has empty preimage"))
    for e in S.edge_ids:
        a, b = S.edges[e].ends
        y = c.edge_map[e]
        if Counter((c.vertex_map[a], c.vertex_map[b])) != Counter(T.edges[y].ends):
            out.append(Diagnostic("edge-map-endpoints", (e, y), f"ends of {e} do not map onto the ends of {y}"))
    if out:
        return out

    for e in S.edge_ids:
        y = c.edge_map[e]
        if T.edges[y].thickness != c.edge_dilation[e] * S.edges[e].thickness:
            out.append(Diagnostic(
                "thickness-law", (e, y),
                f"thickness({y}) = {T.edges[y].thickness} but dilation x thickness({e}) = "
                f"{c.edge_dilation[e]} x {S.edges[e].thickness}",
            ))
    for v in S.vertices:
        w = c.vertex_map[v]
        d_v = c.vertex_degree[v]
        sums: Counter = Counter()
        for e in S.incident_edges(v):
            sums[c.edge_map[e]] += _incidence(S, e, v) * c.edge_dilation[e]
        for y in T.incident_edges(w):
            want = _incidence(T, y, w) * d_v
            if sums[y] != want:
                out.append(Diagnostic(
                    "harmonicity", (v, y),
                    f"at {v} over {w}: dilations over {y} sum to {sums[y]}, expected {want}",
                ))
    for w in T.vertices:
        total = sum(c.vertex_degree[v] for v in c.fiber(w))
        if total != c.global_degree:
            out.append(Diagnostic(
                "degree-law", (w,), f"local degrees over {w} sum to {total}, global degree is {c.global_degree}"
            ))
    out.extend(_marked_diagnostics(c))
    return out


def _marked_diagnostics(c: CoverDatum) -> list[Diagnostic]:
    S, T = c.source, c.target
    out = []
    if not S.legs and not T.legs and not c.leg_map:
        return out
    for leg in sorted_ids(S.legs):
        n = c.leg_map.get(leg)
        if n not in T.legs:
            out.append(Diagnostic("leg-map-total", (leg,), f"source leg {leg} does not map to a target leg"))
        elif T.legs[n] != c.vertex_map[S.legs[leg]]:
            out.append(Diagnostic("leg-map-endpoints", (leg, n), f"leg {leg} and its image {n} sit over different vertices"))
    for leg in sorted_ids(set(c.leg_map) - set(S.legs)):
        out.append(Diagnostic("leg-map-total", (leg,), f"leg map mentions unknown source leg {leg}"))
    for leg in sorted_ids(c.leg_degree):
        if c.leg_degree[leg] < 1:
            out.append(Diagnostic("leg-degree-positive", (leg,), f"leg {leg} has local degree {c.leg_degree[leg]}"))
    if out:
        return out
    hit = set(c.leg_map.values())
    for n in sorted_ids(T.legs):
        if n not in hit:
            out.append(Diagnostic("leg-map-surjective", (n,), f"target leg {n} has no source leg over it"))
            continue
        for v in c.fiber(T.legs[n]):
            above = [leg for leg in S.legs_at(v) if c.leg_map[leg] == n]
            if not above:
                out.append(Diagnostic("leg-fiber-missing", (v, n), f"no leg at {v} over target leg {n}"))
                continue
            total = sum(c.leg_degree_of(leg) for leg in above)
            if total < c.vertex_degree[v]:
                out.append(Diagnostic(
                    "leg-degree-unspecified", (v, n),
                    f"legs at {v} over {n} account for degree {total} of {c.vertex_degree[v]}",
                ))
            elif total > c.vertex_degree[v]:
                out.append(Diagnostic(
                    "leg-degree-excess", (v, n),
                    f"legs at {v} over {n} account for degree {total} > {c.vertex_degree[v]}",
                ))
    return out


def require_valid_cover(c: CoverDatum) -> None:
    diags = validate_cover(c)
    if diags:
        raise ValidationError(diags, "cover")


def is_stable_cover(c: CoverDatum) -> bool:
    return infinite_auto_certificate(c) is None


def infinite_auto_certificate(c: CoverDatum) -> str | None:
    """First target vertex of non-positive degree all of whose preimages
    also have non-positive degree, or ``None``.

    ``None`` certifies the cover is stable.  A returned vertex only says the
    cover is combinatorially unstable; it does not prove the automorphism
    group of the special fiber is infinite.
    """
    require_valid_cover(c)
    for w in c.target.vertices:
        if omega_degree(c.target, w) > 0:
            continue
        if all(omega_degree(c.source, v) <= 0 for v in c.fiber(w)):
            return w
    return None


def rh_defect(c: CoverDatum, v: str) -> int:
    """Tame Riemann-Hurwitz slack of the component map at ``v``: what is
    left for ramification at smooth points.  Negative means the local data
    cannot come from a tame separable map."""
    require_valid_cover(c)
    if v not in c.source.genera:
        raise PreconditionError("unknown-vertex", f"no source vertex {v}", (v,))
    w = c.vertex_map[v]
    d_v = c.vertex_degree[v]
    nodes = sum(
        _incidence(c.source, e, v) * (c.edge_dilation[e] - 1) for e in c.source.incident_edges(v)
    )
    return (2 * c.source.genera[v] - 2) - d_v * (2 * c.target.genera[w] - 2) - nodes


def base_change_cover(c: CoverDatum, e: int) -> CoverDatum:
    require_valid_cover(c)
    return CoverDatum(
        base_change(c.source, e),
        base_change(c.target, e),
        c.vertex_map,
        c.edge_map,
        c.vertex_degree,
        c.edge_dilation,
        c.global_degree,
        c.leg_map,
        c.leg_degree,
    )


# --------------------------------------------------------------------------
# simultaneous contraction


def _qualifies(c: CoverDatum, w: str, ex_source=None, ex_target=None) -> bool:
    T, S = c.target, c.source
    if ex_target is not None and w not in ex_target:
        return False
    if omega_degree(T, w) > 0:
        return False
    pre = c.fiber(w)
    if ex_source is not None and not set(pre) <= ex_source:
        return False
    return all(omega_degree(S, v) <= 0 for v in pre)


def contract_cover_vertex(c: CoverDatum, w: str) -> CoverStep:
    """Contract the target component ``w`` together with its whole preimage."""
    S, T = c.source, c.target
    pre = c.fiber(w)
    if T.valence(w) == 0:
        raise PreconditionError("full-component", f"target vertex {w} is a whole component", (w,))
    if T.valence(w) == 1:
        bad = [v for v in pre if S.valence(v) != 1]
        if bad:
            # the contracted source would put a node over a smooth point
            raise PreconditionError(
                "node-over-smooth-point",
                f"preimages of the leaf {w} are not all leaves",
                (w, *bad),
            )
    else:
        around = T.incident_edges(w)
        if len(around) != 2:
            raise PreconditionError("full-component", f"target vertex {w} carries a loop only", (w,))
        for v in pre:
            over = sorted_ids(c.edge_map[e] for e in S.incident_edges(v))
            dils = {c.edge_dilation[e] for e in S.incident_edges(v)}
            if over != around or dils != {c.vertex_degree[v]}:
                raise InvariantBreach(
                    "contraction-shape",
                    f"source vertex {v} over {w} does not have one edge of dilation d_v over each target edge",
                    (v, w),
                )

    new_t, ttrace = contract(T, {w})
    new_s, strace = contract(S, pre)

    edge_map = {}
    dilation = {}
    for E, parts in strace.merged.items():
        images = {ttrace.edge_image[c.edge_map[p]] for p in parts}
        dils = {c.edge_dilation[p] for p in parts}
        if len(images) != 1 or len(dils) != 1:
            raise InvariantBreach("merge-inconsistent", f"merged source edge {E} has mixed images", (E,))
        (kind, Y), = images
        if kind != "edge":
            raise InvariantBreach("merge-inconsistent", f"source edge {E} lands on a vertex", (E,))
        edge_map[E] = Y
        dilation[E] = dils.pop()
    result = CoverDatum(
        new_s,
        new_t,
        {v: c.vertex_map[v] for v in new_s.genera},
        edge_map,
        {v: c.vertex_degree[v] for v in new_s.genera},
        dilation,
        c.global_degree,
        c.leg_map,
        c.leg_degree,
    )
    diags = validate_cover(result)
    if diags:
        raise InvariantBreach(diags[0].rule, "cover law broken by a contraction step: " + diags[0].message, diags[0].ids)
    for before, after in ((S, new_s), (T, new_t)):
        if before.is_connected() and arithmetic_genus(before) != arithmetic_genus(after):
            raise InvariantBreach("genus-changed", "arithmetic genus changed under a contraction step")
    return CoverStep(w, frozenset(pre), result)


def _run(c: CoverDatum, ex_source=None, ex_target=None) -> tuple[CoverDatum, list[CoverStep]]:
    """Contract the smallest qualifying target vertex until none is left.
    A qualifying vertex without edges is a whole component and stays; in
    genus at least 2 this cannot happen (its preimage would be a single
    component of positive degree)."""
    steps = []
    while True:
        w = next(
            (
                x for x in c.target.vertices
                if c.target.valence(x) > 0 and _qualifies(c, x, ex_source, ex_target)
            ),
            None,
        )
        if w is None:
            return c, steps
        step = contract_cover_vertex(c, w)
        steps.append(step)
        c = step.result
        if ex_source is not None:
            ex_source = ex_source - step.contracted_source_vertices
            ex_target = ex_target - {w}


def stable_model_of_cover(
    c: CoverDatum, good_reduction: bool = False
) -> tuple[CoverDatum, list[CoverStep]]:
    """Stable model of the cover by repeated simultaneous contraction.

    The smallest target vertex of non-positive degree whose preimages all
    have non-positive degree is contracted with its preimage, until none
    is left.  Needs source genus at least 2, or genus 1 when the caller
    vouches for potentially good reduction via ``good_reduction``.
    """
    require_valid_cover(c)
    if c.source.legs or c.target.legs:
        raise PreconditionError(
            "legs-present",
            "the stable model ignores markings; use the stable marked model for marked covers",
            sorted_ids([*c.source.legs, *c.target.legs]),
        )
    genus = arithmetic_genus(c.source)
    if genus < 2 and not (genus == 1 and good_reduction):
        raise PreconditionError("genus-too-small", f"source genus {genus}; need at least 2")
    result, steps = _run(c)
    # in genus 1 the smooth elliptic fiber itself has degree 0 everywhere
    if genus >= 2 and not is_stable_cover(result):
        raise InvariantBreach("not-stable", "contraction loop stopped on an unstable cover")
    return result, steps


def stable_hull_of_cover(
    c: CoverDatum, ex_source: Iterable[str], ex_target: Iterable[str]
) -> tuple[CoverDatum, list[CoverStep]]:
    """Stable hull relative to the exceptional loci of both models: only
    target vertices in ``ex_target`` whose whole preimage lies in
    ``ex_source`` may be contracted."""
    require_valid_cover(c)
    ex_source = frozenset(map(str, ex_source))
    ex_target = frozenset(map(str, ex_target))
    for g, ex, what in ((c.source, ex_source, "source model"), (c.target, ex_target, "target model")):
        diags = model_diagnostics(g, ex, require_regular=False)
        if diags:
            raise ValidationError(diags, what)
    clash = sorted_ids(v for v in c.source.genera if v not in ex_source and c.vertex_map[v] in ex_target)
    if clash:
        raise PreconditionError(
            "domination-compatibility",
            "non-exceptional source components map onto exceptional target components",
            clash,
        )
    return _run(c, ex_source, ex_target)


# --------------------------------------------------------------------------
# quotients


@dataclass(frozen=True)
class Automorphism:
    """A graph automorphism.  ``edge_map`` sends edges to edges; for a loop
    the orientation is not determined by the vertices, so ``flips`` lists
    the loops whose half-edges are exchanged."""

    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str]
    flips: frozenset[str] = frozenset()
    leg_map: Mapping[str, str] | None = None


def _half_edge_image(g: DualGraph, s: Automorphism, eid: str, side: int) -> tuple[str, int]:
    e = g.edges[eid]
    f_id = s.edge_map[eid]
    f = g.edges[f_id]
    if f.is_loop:
        return f_id, side ^ (1 if eid in s.flips else 0)
    return f_id, 0 if f.ends[0] == s.vertex_map[e.ends[side]] else 1


def _check_automorphism(g: DualGraph, s: Automorphism, k: int) -> Automorphism:
    V, E = set(g.genera), set(g.edges)
    if set(s.vertex_map) != V or set(s.vertex_map.values()) != V:
        raise PreconditionError("not-an-automorphism", f"element {k} is not a vertex bijection")
    if set(s.edge_map) != E or set(s.edge_map.values()) != E:
        raise PreconditionError("not-an-automorphism", f"element {k} is not an edge bijection")
    for v in V:
        if g.genera[v] != g.genera[s.vertex_map[v]]:
            raise PreconditionError("action-genus", f"element {k} moves {v} to a vertex of another genus", (v,))
    for eid in E:
        e, f = g.edges[eid], g.edges[s.edge_map[eid]]
        if e.thickness != f.thickness:
            raise PreconditionError("action-thickness", f"element {k} changes the thickness of {eid}", (eid,))
        if Counter(s.vertex_map[x] for x in e.ends) != Counter(f.ends):
            raise PreconditionError("not-an-automorphism", f"element {k} breaks incidence at {eid}", (eid,))
        if s.edge_map[eid] == eid and _half_edge_image(g, s, eid, 0) == (eid, 1):
            raise PreconditionError("edge-inversion", f"element {k} swaps the branches of {eid}", (eid,))
    leg_map = dict(s.leg_map) if s.leg_map is not None else {leg: leg for leg in g.legs}
    if set(leg_map) != set(g.legs) or set(leg_map.values()) != set(g.legs):
        raise PreconditionError("not-an-automorphism", f"element {k} is not a leg bijection")
    for leg, image in leg_map.items():
        if g.legs[image] != s.vertex_map[g.legs[leg]]:
            raise PreconditionError("action-legs", f"element {k} moves leg {leg} off its vertex", (leg,))
    return Automorphism(dict(s.vertex_map), dict(s.edge_map), frozenset(s.flips), leg_map)


def _key(g: DualGraph, s: Automorphism):
    halves = tuple(
        (eid, side, *_half_edge_image(g, s, eid, side)) for eid in g.edge_ids for side in (0, 1)
    )
    return (
        tuple((v, s.vertex_map[v]) for v in g.vertices),
        halves,
        tuple(sorted(s.leg_map.items())),
    )


def _compose(g: DualGraph, s: Automorphism, t: Automorphism) -> Automorphism:
    """s after t."""
    flips = set()
    edge_map = {}
    for eid in g.edges:
        f_id, side = _half_edge_image(g, t, eid, 0)
        h_id, side2 = _half_edge_image(g, s, f_id, side)
        edge_map[eid] = h_id
        if g.edges[h_id].is_loop and g.edges[eid].is_loop and side2 == 1:
            flips.add(eid)
    return Automorphism(
        {v: s.vertex_map[t.vertex_map[v]] for v in g.genera},
        edge_map,
        frozenset(flips),
        {leg: s.leg_map[t.leg_map[leg]] for leg in g.legs},
    )


def quotient_by_action(
    g: DualGraph,
    action: Sequence[Automorphism],
    edge_stabilizer_orders: Mapping[str, int] | None = None,
    quotient_genera: Mapping[str, int] | None = None,
) -> CoverDatum:
    """Quotient cover ``g -> g/G``.

    ``action`` lists the images of the group elements, one per element, so
    elements acting trivially on the graph may repeat; its length is the
    group order.  Stabilizer orders are computed from it and, if given,
    must agree with ``edge_stabilizer_orders``.  A quotient vertex whose
    stabilizer is nontrivial needs its genus in ``quotient_genera`` (keyed
    by the orbit representative, the smallest vertex id in the orbit).
    """
    diags = validate_graph(g)
    if diags:
        raise ValidationError(diags, "graph")
    if g.edge_markings:
        raise PreconditionError("edge-markings-present", "quotients take graphs without edge markings")
    if not action:
        raise PreconditionError("empty-action", "the action needs at least the identity")
    elems = [_check_automorphism(g, s, k) for k, s in enumerate(action)]
    keys = Counter(_key(g, s) for s in elems)
    distinct = {_key(g, s): s for s in elems}
    ident = Automorphism({v: v for v in g.genera}, {e: e for e in g.edges}, frozenset(), {l: l for l in g.legs})
    if _key(g, ident) not in distinct:
        raise PreconditionError("not-a-group", "the action does not contain the identity")
    if len(set(keys.values())) != 1:
        raise PreconditionError("not-a-group", "elements do not repeat uniformly (not a homomorphic image)")
    for s in distinct.values():
        for t in distinct.values():
            if _key(g, _compose(g, s, t)) not in distinct:
                raise PreconditionError("not-a-group", "the action is not closed under composition")

    N = len(elems)

    def orbit(x, images):
        return sorted_ids({img[x] for img in images})

    v_imgs = [s.vertex_map for s in elems]
    e_imgs = [s.edge_map for s in elems]
    l_imgs = [s.leg_map for s in elems]
    vstab = {v: sum(1 for m in v_imgs if m[v] == v) for v in g.genera}
    estab = {e: sum(1 for m in e_imgs if m[e] == e) for e in g.edges}
    lstab = {leg: sum(1 for m in l_imgs if m[leg] == leg) for leg in g.legs}
    if edge_stabilizer_orders is not None:
        given = {str(k): int(x) for k, x in edge_stabilizer_orders.items()}
        wrong = sorted_ids(e for e in g.edges if given.get(e, None) != estab[e])
        if wrong:
            raise PreconditionError(
                "inconsistent-stabilizers",
                "edge stabilizer orders disagree with the action",
                wrong,
            )
    vrep = {v: orbit(v, v_imgs)[0] for v in g.genera}
    erep = {e: orbit(e, e_imgs)[0] for e in g.edges}
    lrep = {leg: orbit(leg, l_imgs)[0] for leg in g.legs}

    qg = {str(k): int(x) for k, x in (quotient_genera or {}).items()}
    genera = {}
    for w in sorted_ids(set(vrep.values())):
        if vstab[w] == 1:
            if w in qg and qg[w] != g.genera[w]:
                raise PreconditionError(
                    "quotient-genus-mismatch", f"orbit of {w} has trivial stabilizer, genus must stay {g.genera[w]}", (w,)
                )
            genera[w] = g.genera[w]
        elif w in qg:
            genera[w] = qg[w]
        else:
            raise PreconditionError(
                "quotient-genus-required",
                f"orbit of {w} has stabilizer of order {vstab[w]}; supply its quotient genus",
                (w,),
            )
    edges = {}
    for y in sorted_ids(set(erep.values())):
        e = g.edges[y]
        edges[y] = Edge((vrep[e.ends[0]], vrep[e.ends[1]]), e.thickness * estab[y])
    legs = {n: vrep[g.legs[n]] for n in sorted_ids(set(lrep.values()))}
    cover = CoverDatum(
        g,
        DualGraph(genera, edges, legs),
        vrep,
        erep,
        vstab,
        estab,
        N,
        lrep if g.legs else {},
        lstab if g.legs else {},
    )
    diags = validate_cover(cover)
    if diags:
        raise InvariantBreach(diags[0].rule, "quotient cover fails validation: " + diags[0].message, diags[0].ids)
    return cover


# --------------------------------------------------------------------------
# marked covers


def target_stable_marked_model(c: CoverDatum) -> DualGraph:
    """Stable marked model of the target, checking that the source's stable
    marked model still maps to it.

    Every source component contracted on the way to the source's stable
    marked model must lie over a target component that is contracted on
    the way to the target's; otherwise the induced map would not be a
    morphism and :class:`InvariantBreach` is raised.
    """
    require_valid_cover(c)
    T, S = c.target, c.source
    if 2 * arithmetic_genus(T) - 2 + len(T.legs) <= 1:
        raise PreconditionError(
            "unstable-type-target",
            f"2g - 2 + #legs = {2 * arithmetic_genus(T) - 2 + len(T.legs)} for the target; need > 1",
        )
    target_model, target_gone = marked_stabilization(T)
    _, source_gone = marked_stabilization(S)
    escaped = sorted_ids(v for v in source_gone if c.vertex_map[v] not in target_gone)
    if escaped:
        raise InvariantBreach(
            "not-a-morphism",
            "source components contracted over surviving target components",
            escaped,
        )
    return target_model
