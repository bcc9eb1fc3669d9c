import math

import pytest

from ucm_importance.errors import RecursivePlugin
from ucm_importance.model import MapGraph, Node, StubDetail, PluginBinding, Edge, UcmModel
from ucm_importance.usage import (
    FlatChain,
    State,
    Transition,
    build_flat_chain,
    chain_to_dot,
    check_stochastic,
    convert,
    enumerate_paths,
    flatten,
    usage_model_to_dot,
)

from conftest import EXPECTED_SCENARIOS, TOL, model_from, single_map


def linear_model():
    return model_from(
        single_map(
            [{"id": "s", "kind": "start"}, {"id": "r", "kind": "responsibility"}, {"id": "e", "kind": "end"}],
            [{"from": "s", "to": "r"}, {"from": "r", "to": "e"}],
        )
    )


class TestConvert:
    def test_one_chain_per_map(self, telephone):
        um = convert(telephone)
        assert um.top.name == "root"
        assert sorted(um.subs) == ["default_originating", "ocs", "terminating"]

    def test_states_mirror_nodes(self, telephone):
        um = convert(telephone)
        for m in telephone.maps:
            chain = um.chain_of(m.name)
            assert [s.id for s in chain.states] == [n.id for n in m.nodes]
            assert len(chain.transitions) == len(m.edges)

    def test_linear(self):
        um = convert(linear_model())
        assert len(um.top.states) == 3
        assert len(um.top.transitions) == 2
        assert not um.subs

    def test_or_fork_probabilities(self, telephone):
        chain = convert(telephone).chain_of("terminating")
        assert [t.probability for t in chain.outgoing("status")] == [0.8, 0.2]

    def test_selections(self, telephone):
        um = convert(telephone)
        assert um.selections("SO") == [("default_originating", 0.6), ("ocs", 0.4)]
        assert um.selections("ST") == [("terminating", 1.0)]

    def test_model_unchanged(self, telephone_data):
        model = model_from(telephone_data)
        before = repr(model)
        build_flat_chain(model)
        assert repr(model) == before


class TestFlatten:
    def test_selection_state(self, chain):
        sel = chain.state("SO.i1")
        assert sel.kind == "select"
        out = chain.outgoing("SO.i1")
        assert [(t.target, t.probability, t.plugin) for t in out] == [
            ("SO/default_originating/default_in1", 0.6, "default_originating"),
            ("SO/ocs/ocs_in1", 0.4, "ocs"),
        ]

    def test_static_stub_single_selection(self, chain):
        out = chain.outgoing("ST.i1")
        assert [(t.target, t.probability) for t in out] == [("ST/terminating/in2", 1.0)]

    def test_no_stub_states_left(self, chain):
        assert all(s.kind != "stub" for s in chain.states)

    def test_qualified_ids_keep_source(self, chain):
        s = chain.state("ST/terminating/vrfy")
        assert s.source == "vrfy" and s.kind == "responsibility"

    def test_plugin_ends_wired_to_stub_exits(self, chain):
        assert [t.target for t in chain.outgoing("SO/ocs/ocs_out1")] == ["ST.i1"]
        assert [t.target for t in chain.outgoing("SO/ocs/out2")] == ["reply"]
        assert [t.target for t in chain.outgoing("ST/terminating/out4")] == ["reply"]

    def test_unmapped_end_absorbs(self, chain):
        assert chain.outgoing("ST/terminating/out3") == ()

    def test_starts(self, chain):
        assert chain.starts == (("req", 1.0),)
        assert chain.start_state("req") == "req"
        assert chain.start_state("msg") is None

    def test_recursion_detected(self):
        node = Node("st", "stub", stub=StubDetail(False, ("i1",), (), (PluginBinding("p", 1.0, {"i1": "ps"}, {}),)))
        p = MapGraph("p", False, (Node("ps", "start"), node), (Edge("ps", "st"),))
        root = MapGraph("root", True, (Node("s", "start"), Node("x", "stub", stub=node.stub)), (Edge("s", "x"),))
        model = UcmModel((root, p), (), ())
        with pytest.raises(RecursivePlugin):
            flatten(convert(model))

    def test_reused_plugin_gets_distinct_states(self):
        binding = {"plugin": "p", "in": {"i1": "ps"}, "out": {"pe": "o1"}}
        stub = {"inputs": ["i1"], "outputs": ["o1"], "bindings": [binding]}
        data = single_map(
            [
                {"id": "s", "kind": "start"},
                {"id": "a", "kind": "stub", "stub": stub},
                {"id": "b", "kind": "stub", "stub": stub},
                {"id": "e", "kind": "end"},
            ],
            [{"from": "s", "to": "a"}, {"from": "a", "to": "b"}, {"from": "b", "to": "e"}],
        )
        data["maps"].append(
            {
                "name": "p",
                "nodes": [{"id": "ps", "kind": "start"}, {"id": "pr", "kind": "responsibility"}, {"id": "pe", "kind": "end"}],
                "edges": [{"from": "ps", "to": "pr"}, {"from": "pr", "to": "pe"}],
            }
        )
        chain = build_flat_chain(model_from(data))
        assert chain.has_state("a/p/pr") and chain.has_state("b/p/pr")
        (path,) = enumerate_paths(chain)
        assert path.visits["pr"] == 2


class TestStochastic:
    def test_telephone(self, chain):
        assert check_stochastic(chain).ok

    def test_each_sub_chain(self, telephone):
        for c in convert(telephone).chains():
            assert check_stochastic(c).ok

    def test_deficient_state(self):
        states = (State("a", "or_fork", "a"), State("b", "end", "b"))
        chain = FlatChain(states, (Transition("a", "b", 0.9),), (("a", 1.0),))
        report = check_stochastic(chain)
        assert len(report) == 1
        assert "0.9" in report.issues[0].message

    def test_and_branches_must_be_certain(self):
        states = (State("f", "and_fork", "f"), State("x", "end", "x"), State("y", "end", "y"))
        chain = FlatChain(states, (Transition("f", "x", 0.5), Transition("f", "y")), (("f", 1.0),))
        assert len(check_stochastic(chain)) == 1

    def test_empty_chain(self):
        assert len(check_stochastic(FlatChain((), ()))) == 0


class TestEnumeratePaths:
    def test_telephone_masses(self, chain):
        found = enumerate_paths(chain)
        assert sorted(p.mass for p in found) == pytest.approx(sorted(EXPECTED_SCENARIOS.values()), abs=TOL)
        assert math.fsum(p.mass for p in found) == pytest.approx(1.0, abs=TOL)

    def test_linear(self):
        (path,) = enumerate_paths(build_flat_chain(linear_model()))
        assert path.signature == ()
        assert path.mass == 1.0
        assert path.visits == {"s": 1, "r": 1, "e": 1}

    def test_loop_bound_drops_runs(self):
        data = single_map(
            [
                {"id": "s", "kind": "start"},
                {"id": "j", "kind": "or_join"},
                {"id": "r", "kind": "responsibility"},
                {"id": "f", "kind": "or_fork"},
                {"id": "e", "kind": "end"},
            ],
            [
                {"from": "s", "to": "j"},
                {"from": "j", "to": "r"},
                {"from": "r", "to": "f"},
                {"from": "f", "to": "j", "probability": 0.5},
                {"from": "f", "to": "e", "probability": 0.5},
            ],
        )
        found = enumerate_paths(build_flat_chain(model_from(data)), loop_bound=3)
        assert sorted(p.mass for p in found) == [0.125, 0.25, 0.5]


class TestDot:
    def test_hierarchy(self, telephone):
        text = usage_model_to_dot(convert(telephone))
        assert text.count("digraph") == 4

    def test_flat(self, chain):
        text = chain_to_dot(chain, "flat")
        assert text.count("digraph") == 1
        assert '"SO.i1" -> "SO/ocs/ocs_in1" [label="0.4"];' in text

    def test_condition_label(self, telephone):
        text = chain_to_dot(convert(telephone).chain_of("ocs"), "ocs")
        assert '"screened" -> "ocs_out1" [label="0.7 [allowed]"];' in text
        assert '"screened" -> "md" [label="0.3 [!allowed]"];' in text

    def test_quoting(self):
        chain = FlatChain((State('a"b', "end", 'a"b'),), ())
        assert '"a\\"b"' in chain_to_dot(chain, "q")
