"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 operation precondition not
met, 3 internal consistency failure (a bug).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Callable

from . import io
from .covers import (
    Automorphism,
    base_change_cover,
    quotient_by_action,
    require_valid_cover,
    rh_defect,
    stable_hull_of_cover,
    stable_model_of_cover,
    validate_cover,
)
from .errors import PreconditionError, SemistableError, ValidationError
from .graph import (
    Diagnostic,
    DualGraph,
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
from .models import (
    Model,
    base_change_model,
    join_models,
    make_model,
    marked_stabilization,
    model_diagnostics,
    stable_hull,
    stable_marked_hull,
)
from .oracle import (
    DEFAULT_COVER_BOUND,
    DEFAULT_MODEL_BOUND,
    check_confluence,
    enumerate_contractions,
    enumerate_cover_contractions,
)


class Output:
    """What a subcommand produces: a JSON payload and, when it makes sense,
    a DOT rendering of the same result."""

    def __init__(self, payload: Any, dot: Callable[[], str] | None = None, code: int = 0):
        self.payload = payload
        self.dot = dot
        self.code = code


# --------------------------------------------------------------------------
# loading


def _read(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError("unreadable-file", str(exc), (path,)) from None
    return io.loads(text)


def _graph(path: str) -> DualGraph:
    obj = _read(path)
    g = io.graph_from_obj(obj)
    require_valid(g)
    return g


def _model(path: str, require_regular: bool = True) -> Model:
    obj = _read(path)
    m = io.model_from_obj(obj)
    return make_model(m.top, m.exceptional, require_regular)


def _cover(path: str):
    c = io.cover_from_obj(_read(path))
    require_valid_cover(c)
    return c


def _ids(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [x for x in (p.strip() for p in raw.split(",")) if x]


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> Output:
    obj = _read(args.file)
    kind = io.detect_kind(obj)
    if kind == "graph":
        diags = validate_graph(io.graph_from_obj(obj))
    elif kind == "model":
        m = io.model_from_obj(obj)
        diags = model_diagnostics(m.top, m.exceptional)
    elif kind == "hull":
        h = io.hull_from_obj(obj)
        diags = validate_graph(h.hull)
        missing = sorted_ids(h.kept_exceptional - set(h.hull.genera))
        if missing and not diags:
            diags = [Diagnostic("unknown-vertex", tuple(missing), "kept exceptional vertices not in hull")]
    elif kind == "cover":
        diags = validate_cover(io.cover_from_obj(obj))
    else:
        g = _graph(args.graph) if args.graph else None
        diags = []
        if g is None:
            raise PreconditionError("graph-required", "validating an action needs --graph")
        _action_cover(g, obj)
    if diags:
        raise ValidationError(diags, kind)
    return Output({"kind": kind, "valid": True, "diagnostics": []})


def cmd_genus(args) -> Output:
    return Output({"arithmetic_genus": arithmetic_genus(_graph(args.graph))})


def cmd_omega(args) -> Output:
    g = _graph(args.graph)
    degrees = {v: omega_degree(g, v, include_markings=args.marked) for v in g.vertices}
    return Output({"omega": degrees, "sum": sum(degrees.values()), "marked": args.marked})


def cmd_desing(args) -> Output:
    g = _graph(args.graph)
    z, inserted, trace = desingularize(g)
    payload = {**io.graph_to_obj(z), "exceptional": sorted_ids(inserted), "trace": io.trace_to_obj(trace)}
    return Output(payload, lambda: io.graph_to_dot(z, inserted))


def cmd_contract(args) -> Output:
    g = _graph(args.graph)
    out, trace = contract(g, _ids(args.victims), marked=args.marked)
    return Output({**io.graph_to_obj(out), "trace": io.trace_to_obj(trace)}, lambda: io.graph_to_dot(out))


def cmd_basechange(args) -> Output:
    obj = _read(args.file)
    kind = io.detect_kind(obj)
    if kind == "cover":
        c = base_change_cover(_cover(args.file), args.e)
        return Output(io.cover_to_obj(c), lambda: io.cover_to_dot(c))
    if kind == "model":
        m = base_change_model(_model(args.file), args.e)
        return Output(io.model_to_obj(m), lambda: io.graph_to_dot(m.top, m.exceptional))
    if kind == "graph":
        g = base_change(_graph(args.file), args.e)
        return Output(io.graph_to_obj(g), lambda: io.graph_to_dot(g))
    raise PreconditionError("wrong-kind", f"cannot base change a {kind} file")


def cmd_split_index(args) -> Output:
    return Output({"splitting_index": splitting_index(_graph(args.graph))})


def cmd_hull(args) -> Output:
    h = stable_hull(_model(args.model))
    return Output(io.hull_to_obj(h), lambda: io.graph_to_dot(h.hull, h.kept_exceptional))


def cmd_marked_hull(args) -> Output:
    obj = _read(args.model)
    raw = io.model_from_obj(obj)
    require_valid(raw.top)
    m = make_model(raw.top.without_markings(), raw.exceptional)
    h = stable_marked_hull(m, dict(raw.top.legs), dict(raw.top.edge_markings), args.e)
    return Output(io.hull_to_obj(h), lambda: io.graph_to_dot(h.hull, h.kept_exceptional))


def cmd_marked_model(args) -> Output:
    g, gone = marked_stabilization(_graph(args.graph))
    return Output({**io.graph_to_obj(g), "contracted": sorted_ids(gone)}, lambda: io.graph_to_dot(g))


def cmd_join(args) -> Output:
    m = join_models(_model(args.model1), _model(args.model2))
    return Output(io.model_to_obj(m), lambda: io.graph_to_dot(m.top, m.exceptional))


def cmd_cover_validate(args) -> Output:
    c = io.cover_from_obj(_read(args.cover))
    diags = validate_cover(c)
    if diags:
        raise ValidationError(diags, "cover")
    return Output({"kind": "cover", "valid": True, "diagnostics": []})


def cmd_cover_stable(args) -> Output:
    result, steps = stable_model_of_cover(_cover(args.cover), good_reduction=args.good_reduction)
    return Output(io.cover_with_steps(result, steps), lambda: io.cover_to_dot(result))


def cmd_cover_hull(args) -> Output:
    result, steps = stable_hull_of_cover(_cover(args.cover), _ids(args.ex_source), _ids(args.ex_target))
    return Output(io.cover_with_steps(result, steps), lambda: io.cover_to_dot(result))


def cmd_cover_basechange(args) -> Output:
    c = base_change_cover(_cover(args.cover), args.e)
    return Output(io.cover_to_obj(c), lambda: io.cover_to_dot(c))


def _action_cover(g: DualGraph, obj: Any):
    if not isinstance(obj, dict) or not isinstance(obj.get("action"), list):
        raise ValidationError([Diagnostic("schema", (), "action file needs an 'action' list")], "action")
    elems = []
    for k, item in enumerate(obj["action"]):
        if not isinstance(item, dict) or "vertex_map" not in item:
            raise ValidationError([Diagnostic("schema", (str(k),), f"action element {k} needs 'vertex_map'")], "action")
        elems.append(
            Automorphism(
                {str(a): str(b) for a, b in item["vertex_map"].items()},
                {str(a): str(b) for a, b in item.get("edge_map", {}).items()},
                frozenset(map(str, item.get("flips", []))),
                {str(a): str(b) for a, b in item["leg_map"].items()} if "leg_map" in item else None,
            )
        )
    return quotient_by_action(
        g, elems, obj.get("edge_stabilizer_orders"), obj.get("quotient_genera")
    )


def cmd_quotient(args) -> Output:
    c = _action_cover(_graph(args.graph), _read(args.action))
    return Output(io.cover_to_obj(c), lambda: io.cover_to_dot(c))


def cmd_rh(args) -> Output:
    c = _cover(args.cover)
    defects = {v: rh_defect(c, v) for v in c.source.vertices}
    flagged = sorted_ids(v for v, d in defects.items() if d < 0)
    return Output({"rh_defect": defects, "negative": flagged})


def cmd_oracle(args) -> Output:
    obj = _read(args.file)
    kind = io.detect_kind(obj)
    if kind == "model":
        bound = args.bound if args.bound is not None else DEFAULT_MODEL_BOUND
        poset = enumerate_contractions(_model(args.file), bound)
    elif kind == "cover":
        bound = args.bound if args.bound is not None else DEFAULT_COVER_BOUND
        c = _cover(args.file)
        if args.ex_source is not None or args.ex_target is not None:
            poset = enumerate_cover_contractions(c, _ids(args.ex_source), _ids(args.ex_target), bound)
        else:
            poset = enumerate_cover_contractions(c, bound=bound)
    else:
        raise PreconditionError("wrong-kind", f"the oracle takes a model or a cover, not a {kind}")
    payload = {**poset.to_obj(), "confluent": check_confluence(poset)}
    return Output(
        payload,
        lambda: io.poset_to_dot(list(poset.elements), list(poset.relation), list(poset.minimal_elements)),
    )


def cmd_export_dot(args) -> Output:
    obj = _read(args.file)
    kind = io.detect_kind(obj)
    if kind == "cover":
        text = io.cover_to_dot(_cover(args.file))
    elif kind == "model":
        m = io.model_from_obj(obj)
        require_valid(m.top)
        text = io.graph_to_dot(m.top, m.exceptional)
    elif kind == "hull":
        h = io.hull_from_obj(obj)
        require_valid(h.hull)
        text = io.graph_to_dot(h.hull, h.kept_exceptional)
    elif kind == "graph":
        text = io.graph_to_dot(_graph(args.file))
    else:
        raise PreconditionError("wrong-kind", f"cannot render a {kind} file")
    if args.output:
        Path(args.output).write_text(text)
        return Output({"written": args.output})
    return Output(text)


# --------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssred",
        description="Semi-stable reduction of curves and covers at the level of dual graphs.",
    )
    parser.add_argument("--format", choices=("json", "dot"), default="json", help="output format")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "dot"), default=argparse.SUPPRESS, help="output format")
        return p

    p = add("validate", cmd_validate, "check a graph, model, hull, cover or action file")
    p.add_argument("file")
    p.add_argument("--graph", help="graph the action file acts on")
    p = add("genus", cmd_genus, "arithmetic genus")
    p.add_argument("graph")
    p = add("omega", cmd_omega, "dualizing-sheaf degree of every component")
    p.add_argument("graph")
    p.add_argument("--marked", action="store_true", help="count legs")
    p = add("desing", cmd_desing, "minimal desingularization")
    p.add_argument("graph")
    p = add("contract", cmd_contract, "contract components")
    p.add_argument("graph")
    p.add_argument("--victims", required=True, help="comma-separated vertex ids")
    p.add_argument("--marked", action="store_true", help="use marked degrees; legs on leaves move")
    p = add("basechange", cmd_basechange, "ramified base change of a graph, model or cover")
    p.add_argument("file")
    p.add_argument("-e", type=_positive, required=True, help="ramification index")
    p = add("split-index", cmd_split_index, "least base change making edge markings integral")
    p.add_argument("graph")
    p = add("hull", cmd_hull, "stable hull of a model")
    p.add_argument("model")
    p = add("marked-hull", cmd_marked_hull, "stable marked hull; markings come from the model file")
    p.add_argument("model")
    p.add_argument("-e", type=_positive, default=1, help="base change index applied first")
    p = add("marked-model", cmd_marked_model, "stable marked model of a graph with legs")
    p.add_argument("graph")
    p = add("join", cmd_join, "join of two models on the same top")
    p.add_argument("model1")
    p.add_argument("model2")
    p = add("cover-validate", cmd_cover_validate, "check the cover laws")
    p.add_argument("cover")
    p = add("cover-stable", cmd_cover_stable, "stable model of a cover")
    p.add_argument("cover")
    p.add_argument("--good-reduction", action="store_true", help="genus-1 source has potentially good reduction")
    p = add("cover-hull", cmd_cover_hull, "stable hull of a cover relative to exceptional sets")
    p.add_argument("cover")
    p.add_argument("--ex-source", default="", help="comma-separated source vertex ids")
    p.add_argument("--ex-target", default="", help="comma-separated target vertex ids")
    p = add("cover-basechange", cmd_cover_basechange, "base change of a cover")
    p.add_argument("cover")
    p.add_argument("-e", type=_positive, required=True, help="ramification index")
    p = add("quotient", cmd_quotient, "quotient cover by a group action")
    p.add_argument("graph")
    p.add_argument("--action", required=True, help="action file")
    p = add("rh", cmd_rh, "Riemann-Hurwitz defect of every source component")
    p.add_argument("cover")
    p = add("oracle", cmd_oracle, "brute-force contraction poset of a model or cover")
    p.add_argument("file")
    p.add_argument("--bound", type=_positive, default=None, help="vertex bound")
    p.add_argument("--ex-source", default=None, help="cover hull: source exceptional ids")
    p.add_argument("--ex-target", default=None, help="cover hull: target exceptional ids")
    p = add("export-dot", cmd_export_dot, "render a file as DOT")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="write here instead of stdout")
    return parser


def _emit(out: Output, fmt: str, stdout) -> None:
    if isinstance(out.payload, str):
        stdout.write(out.payload)
    elif fmt == "dot":
        if out.dot is None:
            raise PreconditionError("no-dot", "this command has no DOT rendering")
        stdout.write(out.dot())
    else:
        stdout.write(io.dumps(out.payload))


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
        _emit(out, args.format, stdout)
        return out.code
    except ValidationError as exc:
        stdout.write(io.dumps(io.diagnostics_to_obj(exc.diagnostics)))
        for d in exc.diagnostics:
            ids = ", ".join(d.ids)
            stderr.write(f"error [{d.rule}] {d.message}" + (f" ({ids})" if ids else "") + "\n")
        return exc.exit_code
    except SemistableError as exc:
        payload = {"error": {"rule": exc.rule, "ids": list(exc.ids), "message": str(exc), **exc.extra}}
        stdout.write(io.dumps(payload))
        stderr.write(f"error {exc}\n")
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
