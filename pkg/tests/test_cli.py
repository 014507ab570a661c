import io as stdio
import json

import pytest

from helpers import DATA, GOLDEN
from ssred import io
from ssred.cli import run

INVALID = {
    "thickness_zero.json": "thickness-positive",
    "marking_outside.json": "marking-in-interior",
    "negative_genus.json": "genus-nonnegative",
    "bad_endpoint.json": "edge-endpoint",
    "empty_graph.json": "empty-graph",
    "cover_thickness_law.json": "thickness-law",
    "cover_degree_law.json": "degree-law",
    "model_minus_one.json": "(-1)-in-exceptional",
    "parse_error.json": "parse-error",
}


def call(*argv):
    out, err = stdio.StringIO(), stdio.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def d(name):
    return DATA / name


class TestGolden:
    def test_cover_stable(self):
        code, out, _ = call("cover-stable", d("cover_two_component_degree3.json"))
        assert code == 0
        assert out == (GOLDEN / "cover_stable_two_component_degree3.json").read_text()

    def test_cover_stable_dot(self):
        code, out, _ = call("--format", "dot", "cover-stable", d("cover_two_component_degree3.json"))
        assert code == 0
        assert out == (GOLDEN / "cover_stable_two_component_degree3.dot").read_text()

    def test_hull(self):
        code, out, _ = call("hull", d("model_chain_two_minus2.json"))
        assert code == 0
        assert out == (GOLDEN / "hull_chain_two_minus2.json").read_text()
        (e,) = json.loads(out)["hull"]["edges"]
        assert e["thickness"] == 3

    def test_validate_thickness_zero(self):
        code, out, err = call("validate", d("invalid/thickness_zero.json"))
        assert code == 1
        assert out == (GOLDEN / "validate_thickness_zero.json").read_text()
        assert "error [thickness-positive]" in err


@pytest.mark.parametrize("name,rule", sorted(INVALID.items()))
def test_invalid_corpus(name, rule):
    code, out, err = call("validate", d("invalid/" + name))
    assert code == 1
    assert rule in {x["rule"] for x in json.loads(out)["diagnostics"]}
    assert f"[{rule}]" in err


class TestExitCodes:
    def test_precondition(self):
        code, out, _ = call("desing", d("graph_marked_half_third.json"))
        assert code == 2
        err = json.loads(out)["error"]
        assert err["rule"] == "non-integral-marking" and err["splitting_index"] == 6

    def test_invariant_breach_never_on_fixtures(self):
        for name in ("cover_two_component_degree3.json", "cover_degree2_chain.json", "cover_minus2_genus1_kept.json"):
            assert call("cover-stable", d(name))[0] == 0

    def test_missing_file(self, tmp_path):
        code, out, _ = call("genus", tmp_path / "nope.json")
        assert code == 2 and json.loads(out)["error"]["rule"] == "unreadable-file"

    def test_bad_arguments(self):
        with pytest.raises(SystemExit) as err:
            call("basechange", d("graph_cycle3.json"), "-e", "0")
        assert err.value.code == 2


class TestSubcommands:
    def test_genus_and_omega(self):
        assert json.loads(call("genus", d("graph_parallel_genus1.json"))[1]) == {"arithmetic_genus": 3}
        obj = json.loads(call("omega", d("graph_legs_stable.json"), "--marked")[1])
        assert obj["omega"] == {"u": 2, "v": 1} and obj["marked"] is True

    def test_split_index(self):
        assert json.loads(call("split-index", d("graph_marked_half_third.json"))[1]) == {"splitting_index": 6}

    def test_contract(self):
        obj = json.loads(call("contract", d("graph_chain_2_1_3.json"), "--victims", "a,b")[1])
        assert [e["thickness"] for e in obj["edges"]] == [6]

    def test_join(self):
        code, out, _ = call("join", d("model_chain_two_minus2.json"), d("model_chain_two_minus2.json"))
        assert code == 0 and out == io.normalize((d("model_chain_two_minus2.json")).read_text())

    def test_marked_hull_needs_split(self):
        code, out, _ = call("marked-hull", d("model_marked_half.json"))
        assert code == 2 and json.loads(out)["error"]["splitting_index"] == 2
        assert call("marked-hull", d("model_marked_half.json"), "-e", "2")[0] == 0

    def test_rh(self):
        obj = json.loads(call("rh", d("cover_two_component_degree3.json"))[1])
        assert obj["negative"] == []

    def test_quotient(self):
        code, out, _ = call("quotient", d("graph_swap_parallel.json"), "--action", d("action_swap_parallel.json"))
        assert code == 0
        assert io.detect_kind(json.loads(out)) == "cover"

    def test_validate_action(self):
        assert call("validate", d("action_swap_parallel.json"), "--graph", d("graph_swap_parallel.json"))[0] == 0
        assert call("validate", d("action_swap_parallel.json"))[0] == 2

    def test_oracle(self):
        obj = json.loads(call("oracle", d("model_chain_two_minus2.json"))[1])
        assert len(obj["elements"]) == 4 and obj["confluent"] is True
        obj = json.loads(call("oracle", d("cover_two_component_degree3.json"))[1])
        assert len(obj["elements"]) == 2 and obj["minimal"] == [1]
        code, out, _ = call("oracle", d("model_chain_two_minus2.json"), "--bound", "2")
        assert code == 2 and json.loads(out)["error"]["rule"] == "bound-exceeded"

    def test_oracle_dot(self):
        code, out, _ = call("oracle", d("model_chain_two_minus2.json"), "--format", "dot")
        assert code == 0 and out.startswith("digraph Poset {")

    def test_export_dot(self, tmp_path):
        target = tmp_path / "out.dot"
        code, out, _ = call("export-dot", d("cover_two_component_degree3.json"), "-o", target)
        assert code == 0 and json.loads(out) == {"written": str(target)}
        assert target.read_text() == io.cover_to_dot(io.cover_from_obj(io.loads(d("cover_two_component_degree3.json").read_text())))
        code, out, _ = call("export-dot", d("graph_cycle3.json"))
        assert out.startswith("graph G {")

    def test_no_dot_rendering(self):
        code, out, _ = call("--format", "dot", "genus", d("graph_cycle3.json"))
        assert code == 2 and json.loads(out)["error"]["rule"] == "no-dot"


# every command producing a file-shaped result must produce a valid file
REVALIDATE = [
    ("desing", "graph_loop_t2.json"),
    ("contract", "graph_chain_2_1_3.json", "--victims", "a"),
    ("basechange", "graph_cycle3.json", "-e", "3"),
    ("basechange", "model_chain_two_minus2.json", "-e", "2"),
    ("basechange", "cover_degree2_chain.json", "-e", "5"),
    ("hull", "model_chain_two_minus2.json"),
    ("marked-hull", "model_marked_chain.json"),
    ("marked-model", "graph_tail.json"),
    ("join", "model_chain_two_minus2.json", "model_chain_two_minus2.json"),
    ("cover-stable", "cover_degree2_chain.json"),
    ("cover-hull", "cover_degree2_chain.json", "--ex-source", "u,u'", "--ex-target", "w1"),
    ("cover-basechange", "cover_two_component_degree3.json", "-e", "2"),
]


@pytest.mark.parametrize("argv", REVALIDATE, ids=lambda a: a[0])
def test_outputs_revalidate(argv, tmp_path):
    cmd, name, *rest = argv
    extra = [d(x) if x.endswith(".json") else x for x in rest]
    code, out, _ = call(cmd, d(name), *extra)
    assert code == 0
    path = tmp_path / "out.json"
    path.write_text(out)
    code, report, err = call("validate", path)
    assert code == 0, err
    # annotations (trace, steps, contracted) ride along; the rest is canonical
    obj = json.loads(out)
    extra = ("steps", "contracted") if "hull" in obj else ("trace", "steps", "contracted")
    core = io.dumps({k: v for k, v in obj.items() if k not in extra})
    assert io.normalize(core) == core


def test_quotient_output_revalidates(tmp_path):
    _, out, _ = call("quotient", d("graph_swap_parallel.json"), "--action", d("action_swap_parallel.json"))
    path = tmp_path / "q.json"
    path.write_text(out)
    assert call("cover-validate", path)[0] == 0
