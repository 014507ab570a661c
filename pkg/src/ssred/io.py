"""JSON file formats and DOT rendering.

Serialization is canonical: object keys sorted, id lists in natural
order, rationals written ``"p/q"`` in lowest terms.  Parsing a canonical
file and writing it back reproduces the same bytes.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .covers import CoverDatum, CoverStep
from .errors import ValidationError
from .graph import ContractionTrace, Diagnostic, DualGraph, Edge, EdgeMarking, fraction_text, sorted_ids
from .models import HullResult, Model


def _schema(message: str, *ids) -> ValidationError:
    return ValidationError([Diagnostic("schema", tuple(str(i) for i in ids), message)], "file")


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([Diagnostic("parse-error", (), str(exc))], "file") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def detect_kind(obj: Any) -> str:
    if not isinstance(obj, dict):
        raise _schema("top level must be an object")
    if "source" in obj and "target" in obj:
        return "cover"
    if "hull" in obj:
        return "hull"
    if "action" in obj:
        return "action"
    if "exceptional" in obj:
        return "model"
    if "vertices" in obj:
        return "graph"
    raise _schema("cannot tell what kind of file this is")


# --------------------------------------------------------------------------
# graphs


def _position(raw) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise _schema(f"position {raw!r} must be a string 'p/q'")
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise _schema(f"position {raw!r} is not a rational 'p/q'") from None


def _ident(raw, what: str) -> str:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise _schema(f"{what} id {raw!r} must be a string or integer")
    return str(raw)


def _integer(raw, what: str, where: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise _schema(f"{what} of {where} must be an integer, got {raw!r}", where)
    return raw


def graph_from_obj(obj: Any) -> DualGraph:
    if not isinstance(obj, dict):
        raise _schema("graph must be an object")
    genera: dict[str, Any] = {}
    legs: dict[str, str] = {}
    for item in obj.get("vertices", []):
        if not isinstance(item, dict) or "id" not in item:
            raise _schema("every vertex needs an id")
        v = _ident(item["id"], "vertex")
        if v in genera:
            raise ValidationError([Diagnostic("duplicate-id", (v,), f"vertex {v} listed twice")], "file")
        genera[v] = _integer(item.get("genus", 0), "genus", v)
        for leg in item.get("legs", []):
            leg = _ident(leg, "leg")
            if leg in legs:
                raise ValidationError([Diagnostic("duplicate-id", (leg,), f"leg {leg} listed twice")], "file")
            legs[leg] = v
    edges: dict[str, Edge] = {}
    for item in obj.get("edges", []):
        if not isinstance(item, dict) or "id" not in item:
            raise _schema("every edge needs an id")
        eid = _ident(item["id"], "edge")
        if eid in edges:
            raise ValidationError([Diagnostic("duplicate-id", (eid,), f"edge {eid} listed twice")], "file")
        if "loop" in item:
            a = b = _ident(item["loop"], "vertex")
        else:
            ends = item.get("ends")
            if not isinstance(ends, list) or len(ends) != 2:
                raise _schema(f"edge {eid} needs 'ends' with two vertices or 'loop'", eid)
            a, b = (_ident(x, "vertex") for x in ends)
        edges[eid] = Edge((a, b), _integer(item.get("thickness", 1), "thickness", eid))
    markings: dict[str, EdgeMarking] = {}
    for item in obj.get("edge_markings", []):
        if not isinstance(item, dict) or not {"id", "edge", "from", "position"} <= set(item):
            raise _schema("edge markings need id, edge, from, position")
        mid = _ident(item["id"], "marking")
        if mid in markings:
            raise ValidationError([Diagnostic("duplicate-id", (mid,), f"marking {mid} listed twice")], "file")
        markings[mid] = EdgeMarking(
            _ident(item["edge"], "edge"), _ident(item["from"], "vertex"), _position(item["position"])
        )
    return DualGraph(genera, edges, legs, markings)


def graph_to_obj(g: DualGraph) -> dict:
    vertices = [{"id": v, "genus": g.genera[v], "legs": g.legs_at(v)} for v in g.vertices]
    edges = []
    for eid in g.edge_ids:
        e = g.edges[eid]
        item: dict[str, Any] = {"id": eid, "thickness": e.thickness}
        if e.is_loop:
            item["loop"] = e.ends[0]
        else:
            item["ends"] = list(e.ends)
        edges.append(item)
    markings = [
        {
            "id": m,
            "edge": g.edge_markings[m].edge,
            "from": g.edge_markings[m].origin,
            "position": fraction_text(g.edge_markings[m].position),
        }
        for m in sorted_ids(g.edge_markings)
    ]
    return {"vertices": vertices, "edges": edges, "edge_markings": markings}


# --------------------------------------------------------------------------
# models, hulls, covers


def model_from_obj(obj: Any) -> Model:
    """Parse without checking model invariants (see ``models.make_model``)."""
    g = graph_from_obj(obj)
    exc = obj.get("exceptional", [])
    if not isinstance(exc, list):
        raise _schema("'exceptional' must be a list")
    return Model(g, frozenset(_ident(v, "vertex") for v in exc))


def model_to_obj(m: Model) -> dict:
    return {**graph_to_obj(m.top), "exceptional": sorted_ids(m.exceptional)}


def trace_to_obj(t: ContractionTrace) -> dict:
    return {
        "vertex_image": {v: list(t.vertex_image[v]) for v in sorted_ids(t.vertex_image)},
        "edge_image": {e: list(t.edge_image[e]) for e in sorted_ids(t.edge_image)},
        "merged": {e: list(t.merged[e]) for e in sorted_ids(t.merged)},
        "witness": {e: list(t.witness[e]) for e in sorted_ids(t.witness)},
    }


def trace_from_obj(obj: dict) -> ContractionTrace:
    return ContractionTrace(
        {k: tuple(v) for k, v in obj["vertex_image"].items()},
        {k: tuple(v) for k, v in obj["edge_image"].items()},
        {k: tuple(v) for k, v in obj["merged"].items()},
        {k: tuple(v) for k, v in obj["witness"].items()},
    )


def hull_to_obj(h: HullResult) -> dict:
    return {
        "hull": graph_to_obj(h.hull),
        "kept_exceptional": sorted_ids(h.kept_exceptional),
        "trace": trace_to_obj(h.trace),
    }


def hull_from_obj(obj: dict) -> HullResult:
    return HullResult(
        graph_from_obj(obj["hull"]),
        trace_from_obj(obj["trace"]),
        frozenset(obj["kept_exceptional"]),
    )


def _id_map(obj: Any, key: str) -> dict[str, str]:
    raw = obj.get(key, {})
    if not isinstance(raw, dict):
        raise _schema(f"'{key}' must be an object")
    return {str(k): _ident(v, key) for k, v in raw.items()}


def _int_map(obj: Any, key: str) -> dict[str, Any]:
    raw = obj.get(key, {})
    if not isinstance(raw, dict):
        raise _schema(f"'{key}' must be an object")
    for k, v in raw.items():
        if isinstance(v, bool) or not isinstance(v, int):
            raise _schema(f"'{key}' value for {k} must be an integer", k)
    return {str(k): v for k, v in raw.items()}


def cover_from_obj(obj: Any) -> CoverDatum:
    if not isinstance(obj, dict) or "source" not in obj or "target" not in obj:
        raise _schema("cover needs 'source' and 'target'")
    n = obj.get("global_degree")
    if isinstance(n, bool) or not isinstance(n, int):
        raise _schema("'global_degree' must be an integer")
    return CoverDatum(
        graph_from_obj(obj["source"]),
        graph_from_obj(obj["target"]),
        _id_map(obj, "vertex_map"),
        _id_map(obj, "edge_map"),
        _int_map(obj, "vertex_degree"),
        _int_map(obj, "edge_dilation"),
        n,
        _id_map(obj, "leg_map"),
        _int_map(obj, "leg_degree"),
    )


def cover_to_obj(c: CoverDatum) -> dict:
    def ordered(m):
        return {k: m[k] for k in sorted_ids(m)}

    obj = {
        "source": graph_to_obj(c.source),
        "target": graph_to_obj(c.target),
        "vertex_map": ordered(c.vertex_map),
        "edge_map": ordered(c.edge_map),
        "vertex_degree": ordered(c.vertex_degree),
        "edge_dilation": ordered(c.edge_dilation),
        "global_degree": c.global_degree,
        "leg_map": ordered(c.leg_map),
    }
    if c.leg_degree:
        obj["leg_degree"] = ordered(c.leg_degree)
    return obj


def steps_to_obj(steps: list[CoverStep]) -> list[dict]:
    return [
        {
            "target_vertex": s.contracted_target_vertex,
            "source_vertices": sorted_ids(s.contracted_source_vertices),
        }
        for s in steps
    ]


def cover_with_steps(c: CoverDatum, steps: list[CoverStep]) -> dict:
    """A cover file with the contraction record attached under "steps"."""
    return {**cover_to_obj(c), "steps": steps_to_obj(steps)}


def normalize(text: str) -> str:
    """Parse a file of any kind and write it back canonically."""
    obj = loads(text)
    kind = detect_kind(obj)
    if kind == "graph":
        obj = graph_to_obj(graph_from_obj(obj))
    elif kind == "model":
        obj = model_to_obj(model_from_obj(obj))
    elif kind == "hull":
        obj = hull_to_obj(hull_from_obj(obj))
    elif kind == "cover":
        obj = cover_to_obj(cover_from_obj(obj))
    return dumps(obj)


def diagnostics_to_obj(diags: list[Diagnostic]) -> dict:
    return {"diagnostics": [d.to_dict() for d in diags]}


# --------------------------------------------------------------------------
# DOT


def _q(x: str) -> str:
    return '"' + str(x).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _graph_lines(g: DualGraph, prefix: str = "", indent: str = "  ", exceptional=frozenset(), arrow="--"):
    lines = []
    for v in g.vertices:
        style = ", style=dashed" if v in exceptional else ""
        lines.append(f"{indent}{_q(prefix + v)} [label={_q(f'{v}:g={g.genera[v]}')}{style}];")
    for leg in sorted_ids(g.legs):
        lines.append(f"{indent}{_q(prefix + 'leg:' + leg)} [shape=diamond, label={_q(leg)}];")
    for eid in g.edge_ids:
        e = g.edges[eid]
        label = f"t={e.thickness}"
        marks = [f"{m}@{fraction_text(g.edge_markings[m].position)}" for m in g.markings_on(eid)]
        if marks:
            label += " " + " ".join(marks)
        extra = ", dir=none" if arrow == "->" else ""
        lines.append(
            f"{indent}{_q(prefix + e.ends[0])} {arrow} {_q(prefix + e.ends[1])} [label={_q(label)}{extra}];"
        )
    for leg in sorted_ids(g.legs):
        extra = " [dir=none]" if arrow == "->" else ""
        lines.append(f"{indent}{_q(prefix + g.legs[leg])} {arrow} {_q(prefix + 'leg:' + leg)}{extra};")
    return lines


def graph_to_dot(g: DualGraph, exceptional=frozenset()) -> str:
    return "graph G {\n" + "\n".join(_graph_lines(g, exceptional=exceptional)) + "\n}\n"


def cover_to_dot(c: CoverDatum) -> str:
    lines = ["digraph Cover {", "  rankdir=TB;", "  subgraph cluster_source {", '    label="source";']
    lines += _graph_lines(c.source, "s:", "    ", arrow="->")
    lines += ["  }", "  subgraph cluster_target {", '    label="target";']
    lines += _graph_lines(c.target, "t:", "    ", arrow="->")
    lines += ["  }"]
    for v in c.source.vertices:
        lines.append(
            f"  {_q('s:' + v)} -> {_q('t:' + c.vertex_map[v])} "
            f"[style=dashed, label={_q('d=' + str(c.vertex_degree[v]))}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def poset_to_dot(elements: list[str], relation: list[tuple[int, int]], minimal: list[int]) -> str:
    lines = ["digraph Poset {"]
    for i, _ in enumerate(elements):
        shape = ", peripheries=2" if i in minimal else ""
        lines.append(f"  n{i} [label={_q(str(i))}{shape}];")
    for i, j in relation:
        lines.append(f"  n{j} -> n{i};")
    lines.append("}")
    return "\n".join(lines) + "\n"
