import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from helpers import DATA, cover, graph, graphs
from ssred import io
from ssred.errors import ValidationError
from ssred.graph import DualGraph, EdgeMarking

FIXTURES = sorted(p.name for p in DATA.glob("*.json"))


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_is_canonical(name):
    text = (DATA / name).read_text()
    assert io.normalize(text) == text


def test_scrambled_input_is_stable_on_second_pass():
    raw = {
        "vertices": [
            {"legs": ["p"], "id": "w", "genus": 2},
            {"id": "v10", "genus": 0},
            {"id": "v9", "genus": 1},
        ],
        "edges": [
            {"thickness": 4, "id": "e2", "ends": ["w", "v9"]},
            {"id": "e10", "ends": ["v10", "v9"], "thickness": 1},
        ],
        "edge_markings": [{"id": "m", "edge": "e2", "from": "w", "position": "2/4"}],
    }
    once = io.normalize(json.dumps(raw))
    assert once != json.dumps(raw)
    assert io.normalize(once) == once
    obj = json.loads(once)
    assert [v["id"] for v in obj["vertices"]] == ["v9", "v10", "w"]
    assert [e["id"] for e in obj["edges"]] == ["e2", "e10"]
    (mk,) = obj["edge_markings"]
    # re-expressed from the first end in natural order
    assert (mk["from"], mk["position"]) == ("v9", "7/2")


def test_rationals_in_lowest_terms():
    g = DualGraph({"v": 1, "w": 1}, {"e": ("v", "w", 6)}, {}, {"m": EdgeMarking("e", "v", Fraction(6, 4))})
    (mk,) = io.graph_to_obj(g)["edge_markings"]
    assert mk["position"] == "3/2"


@pytest.mark.parametrize("text,rule", [
    ("{not json", "parse-error"),
    ("[]", "schema"),
    ('{"vertices": [{"id": "v", "genus": "two"}], "edges": []}', "schema"),
    ('{"vertices": [{"id": "v", "genus": 1}], "edges": [], "edge_markings": [{"id": "m", "edge": "e", "from": "v", "position": "1/0"}]}', "schema"),
])
def test_malformed(text, rule):
    with pytest.raises(ValidationError) as err:
        io.normalize(text)
    assert err.value.diagnostics[0].rule == rule


def test_detect_kind():
    assert io.detect_kind({"vertices": []}) == "graph"
    assert io.detect_kind({"top": {}, "exceptional": []}) == "model"
    assert io.detect_kind({"source": {}, "target": {}}) == "cover"
    assert io.detect_kind({"action": []}) == "action"


def test_cover_round_trip():
    c = cover("cover_marked_tail.json")
    assert io.cover_from_obj(io.cover_to_obj(c)) == c


class TestDot:
    def test_graph(self):
        text = io.graph_to_dot(graph("graph_marked_half.json"))
        assert text.startswith("graph G {") and text.endswith("}\n")
        assert '"v" -- "w" [label="t=2 m@1/2"];' in text

    def test_exceptional_dashed(self):
        text = io.graph_to_dot(graph("graph_tail.json"), {"t"})
        assert 'label="t:g=0", style=dashed' in text

    def test_cover(self):
        text = io.cover_to_dot(cover("cover_two_component_degree3.json"))
        assert text.index("cluster_source") < text.index("cluster_target")
        assert '"s:c1" -> "t:d1" [style=dashed' in text

    def test_poset(self):
        text = io.poset_to_dot(["a", "b"], [(1, 0)], [1])
        assert "n0 -> n1;" in text and "n1 [label=\"1\", peripheries=2];" in text


@settings(max_examples=100, deadline=None)
@given(graphs(max_vertices=7, max_legs=3))
def test_graph_round_trip(g):
    text = io.dumps(io.graph_to_obj(g))
    assert io.graph_from_obj(io.loads(text)) == g
    assert io.normalize(text) == text
