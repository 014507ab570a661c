"""The eight acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line (visible
with ``pytest -s`` or in the verbose log) before asserting.
"""
import io as stdio
import json
import time

import pytest

from helpers import DATA, GOLDEN, cover, cycle_graph, graph, load, model
from ssred import io
from ssred.cli import run
from ssred.covers import (
    base_change_cover,
    is_stable_cover,
    stable_model_of_cover,
    target_stable_marked_model,
)
from ssred.errors import InvariantBreach, PreconditionError
from ssred.generate import (
    default_seed,
    enumerate_tops,
    exceptional_set_orbits,
    make_rng,
    random_covers,
    random_graph,
    random_regular_model,
)
from ssred.graph import (
    DualGraph,
    arithmetic_genus,
    base_change,
    canonicalize,
    contract,
    desingularize,
    omega_degree,
    splitting_index,
)
from ssred.models import (
    Model,
    base_change_model,
    make_model,
    stable_hull,
    stable_marked_hull,
    stable_marked_model,
)
from ssred.oracle import (
    check_confluence,
    cover_key,
    enumerate_contractions,
    enumerate_cover_contractions,
    model_key,
    relatively_minimal_models,
)
from test_cli import INVALID

SCALES = (2, 3, 5)


@pytest.fixture
def report(capsys):
    def emit(n, failures, detail, elapsed=None, limit=None):
        ok = not failures and (limit is None or elapsed < limit)
        timing = f" in {elapsed:.1f}s (limit {limit}s)" if elapsed is not None else ""
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}{timing}"
        if failures:
            line += f"; first failure: {failures[0]}"
        with capsys.disabled():
            print("\n" + line)
        assert not failures, failures[:5]
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.1f}s"

    return emit


def _contractible(g: DualGraph) -> set[str]:
    victims = {
        v for v in g.vertices
        if g.genera[v] == 0 and g.valence(v) in (1, 2) and not g.legs_at(v)
        and not any(g.edges[e].is_loop for e in g.incident_edges(v))
    }
    for comp in g.components():
        if comp <= victims:
            victims.discard(min(comp))
    return victims


def _stable_or_skip(c):
    try:
        return stable_model_of_cover(c)
    except PreconditionError as exc:
        if exc.rule == "node-over-smooth-point":
            return None
        raise


def test_criterion_1_genus_and_omega(report):
    start = time.perf_counter()
    rng = make_rng()
    failures = []
    for k in range(1000):
        g = random_graph(rng, max_vertices=10)
        genus = arithmetic_genus(g)
        if sum(omega_degree(g, v) for v in g.vertices) != 2 * genus - 2:
            failures.append(f"omega sum, graph {k}")
        z, inserted, _ = desingularize(g)
        if arithmetic_genus(z) != genus:
            failures.append(f"desingularize, graph {k}")
        out, _ = contract(g, _contractible(g))
        if arithmetic_genus(out) != genus:
            failures.append(f"contract, graph {k}")
        e = rng.randint(1, 5)
        if arithmetic_genus(base_change(g, e)) != genus:
            failures.append(f"base change {e}, graph {k}")
    report(1, failures, f"1000 graphs, seed {default_seed()}", time.perf_counter() - start, 5)


def test_criterion_2_hull_matches_oracle(report):
    start = time.perf_counter()
    # genus 1 and genus 2 behave alike on every vertex of valence >= 1,
    # so the larger tops only draw genera from {0, 2}
    tops = enumerate_tops(4, 1, (0, 1, 2)) + enumerate_tops(6, 1, (0, 2), min_vertices=5)
    failures = []
    count = 0
    for top in tops:
        for ex in exceptional_set_orbits(top):
            m = Model(top, ex)
            poset = enumerate_contractions(m)
            count += 1
            h = stable_hull(m)
            if not check_confluence(poset):
                failures.append(f"not confluent: {top} {sorted(ex)}")
                continue
            (i,) = poset.minimal_elements
            if poset.elements[i] != model_key(h.hull, h.kept_exceptional):
                failures.append(f"hull differs: {top} {sorted(ex)}")
    detail = f"{count} models on {len(tops)} tops"
    report(2, failures, detail, time.perf_counter() - start, 60)


def test_criterion_3_base_change_commutes(report):
    start = time.perf_counter()
    failures = []
    rng = make_rng()
    models = [model(n) for n in ("model_chain_two_minus2.json", "model_genus1_kept.json")]
    models += [random_regular_model(rng) for _ in range(200)]
    for k, m in enumerate(models):
        for e in SCALES:
            left = stable_hull(base_change_model(m, e)).hull
            right = base_change(stable_hull(m).hull, e)
            if canonicalize(left) != canonicalize(right):
                failures.append(f"model {k}, e={e}")

    # marked fixtures: hull at the splitting index, then scale further
    marked = 0
    for name in ("model_marked_half.json", "model_marked_half_third.json", "model_marked_chain.json"):
        raw = model(name)
        m = make_model(raw.top.without_markings(), raw.exceptional - set(raw.top.legs.values()))
        legs, marks = dict(raw.top.legs), dict(raw.top.edge_markings)
        d = splitting_index(raw.top)
        base = stable_marked_hull(m, legs, marks, d).hull
        for e in SCALES:
            scaled = stable_marked_hull(m, legs, marks, d * e).hull
            z, inserted, _ = desingularize(base_change(base, e))
            resolved, _ = contract(z, {v for v in inserted if omega_degree(z, v, include_markings=True) <= 0}, marked=True)
            if canonicalize(scaled) != canonicalize(resolved):
                failures.append(f"{name}, e={e}")
            marked += 1

    covers = [cover(p.name) for p in sorted(DATA.glob("cover_*.json")) if "marked" not in p.name]
    covers += random_covers(rng, 200)
    skipped = 0
    for k, c in enumerate(covers):
        first = _stable_or_skip(c)
        if first is None:
            skipped += 1
            continue
        for e in SCALES:
            after = _stable_or_skip(base_change_cover(c, e))
            if after is None or cover_key(after[0]) != cover_key(base_change_cover(first[0], e)):
                failures.append(f"cover {k}, e={e}")
    detail = (
        f"{len(models)} models, {marked} marked hull checks, {len(covers) - skipped}/{len(covers)} covers "
        f"(skipped {skipped} with a node over a smooth point), e in {SCALES}"
    )
    report(3, failures, detail, time.perf_counter() - start, 30)


def test_criterion_4_stable_fixed_point(report):
    start = time.perf_counter()
    failures = []
    rng = make_rng()
    covers = [cover(p.name) for p in sorted(DATA.glob("cover_*.json")) if "marked" not in p.name]
    covers += random_covers(rng, 300, max_target_vertices=5)
    skipped = fixed = confluent = 0
    for k, c in enumerate(covers):
        if is_stable_cover(c):
            result, steps = stable_model_of_cover(c)
            if steps or result != c:
                failures.append(f"stable input {k} changed")
            fixed += 1
        out = _stable_or_skip(c)
        if out is None:
            skipped += 1
            continue
        result, _ = out
        if not is_stable_cover(result):
            failures.append(f"output {k} not stable")
        again, steps = stable_model_of_cover(result)
        if steps or again != result:
            failures.append(f"output {k} not a fixed point")
        poset = enumerate_cover_contractions(c)
        if not check_confluence(poset):
            failures.append(f"cover {k} not confluent")
            continue
        (i,) = poset.minimal_elements
        if poset.elements[i] != cover_key(result):
            failures.append(f"cover {k}: oracle minimum differs")
        confluent += 1
    detail = (
        f"{len(covers)} covers, {fixed} already stable, {confluent} confluent and matching "
        f"(skipped {skipped} with a node over a smooth point)"
    )
    report(4, failures, detail, time.perf_counter() - start, 60)


def test_criterion_5_two_component_fixture(report):
    failures = []
    c = cover("cover_two_component_degree3.json")
    result, steps = stable_model_of_cover(c)
    if len(steps) != 1:
        failures.append(f"{len(steps)} steps")
    if (result.source, result.target) != (DualGraph({"c2": 2}, {}), DualGraph({"d2": 1}, {})):
        failures.append("result is not c2 -> d2")
    out, err = stdio.StringIO(), stdio.StringIO()
    code = run(["cover-stable", str(DATA / "cover_two_component_degree3.json")], out, err)
    if code != 0 or out.getvalue() != (GOLDEN / "cover_stable_two_component_degree3.json").read_text():
        failures.append("CLI output differs from golden file")
    report(5, failures, "one step to c2 -> d2, golden CLI output byte-exact")


def test_criterion_6_marked_calculus(report):
    failures = []
    rng = make_rng()
    ample = unstable = 0
    for k in range(300):
        g = random_graph(rng, max_vertices=7, legs=rng.randint(0, 3))
        if 2 * arithmetic_genus(g) - 2 + len(g.legs) < 1:
            unstable += 1
            continue
        out = stable_marked_model(g)
        if any(omega_degree(out, v, include_markings=True) < 1 for v in out.vertices):
            failures.append(f"graph {k} not ample")
        ample += 1

    hulls = 0
    for name in ("graph_marked_half.json", "graph_marked_half_third.json", "graph_marked_quarter.json",
                 "model_marked_half.json", "model_marked_half_third.json"):
        obj = load(name)
        top = io.model_from_obj(obj) if "exceptional" in obj else Model(graph(name), frozenset())
        m = make_model(top.top.without_markings(), top.exceptional, require_regular=False)
        legs, marks = dict(top.top.legs), dict(top.top.edge_markings)
        d = splitting_index(top.top)
        if d == 1:
            failures.append(f"{name} has integral markings")
        h = stable_marked_hull(m, legs, marks, d)
        if any(omega_degree(h.hull, v, include_markings=True) <= 0 for v in h.kept_exceptional):
            failures.append(f"{name}: kept vertex of non-positive degree")
        hulls += 1

    checked = small = 0
    for k, c in enumerate(random_covers(rng, 300, max_target_vertices=5, marked=True)):
        if 2 * arithmetic_genus(c.target) - 2 + len(c.target.legs) <= 1:
            small += 1
            continue
        try:
            target_stable_marked_model(c)
        except InvariantBreach as exc:
            failures.append(f"marked cover {k}: {exc.rule}")
        checked += 1
    detail = (
        f"{ample} marked models ample ({unstable} of unstable type skipped), {hulls} hulls at the "
        f"splitting index, {checked} marked covers without a morphism failure ({small} of small target type skipped)"
    )
    report(6, failures, detail)


def test_criterion_7_relatively_minimal_count(report):
    failures = []
    for n in range(2, 6):
        found = relatively_minimal_models(cycle_graph([0] * n))
        if len(found) != n:
            failures.append(f"n={n}: {len(found)} models")
        for _, g in found:
            edges = list(g.edges.values())
            if len(g.genera) != 1 or len(edges) != 1 or not edges[0].is_loop:
                failures.append(f"n={n}: not a one-vertex loop")
    report(7, failures, "genus-1 cycles n = 2..5 give n one-vertex loops")


def test_criterion_8_round_trip(report):
    failures = []
    files = sorted(DATA.glob("*.json"))
    for path in files:
        once = io.normalize(path.read_text())
        if io.normalize(once) != once:
            failures.append(f"{path.name} not byte-stable")
    for name, rule in sorted(INVALID.items()):
        out, err = stdio.StringIO(), stdio.StringIO()
        code = run(["validate", str(DATA / "invalid" / name)], out, err)
        rules = {d["rule"] for d in json.loads(out.getvalue())["diagnostics"]}
        if code != 1 or rule not in rules:
            failures.append(f"{name}: exit {code}, rules {sorted(rules)}")
    report(8, failures, f"{len(files)} fixtures byte-stable, {len(INVALID)} invalid files rejected with their rule")
