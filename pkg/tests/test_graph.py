import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from causynth import errors
from causynth.graph import CausalGraph, Edge
from causynth.variables import TABULAR, Variable


def test_edge_lag_validated():
    with pytest.raises(ValueError):
        Edge(Variable.AGE, Variable.TAU, 2)


def test_parents_ordered_lag0_first():
    g = CausalGraph(nodes=TABULAR)
    g.add(Variable.TAU, Variable.GMV, 1)
    g.add(Variable.TIV, Variable.GMV, 0)
    g.add(Variable.ABETA, Variable.GMV, 0)
    assert g.parents_of(Variable.GMV) == [
        (Variable.ABETA, 0), (Variable.TIV, 0), (Variable.TAU, 1)]


def test_topo_order_respects_lag0_edges():
    g = CausalGraph(nodes=TABULAR)
    g.add(Variable.GMV, Variable.VV, 0)
    g.add(Variable.TIV, Variable.GMV, 0)
    order = g.topo_order()
    assert order.index(Variable.TIV) < order.index(Variable.GMV)
    assert order.index(Variable.GMV) < order.index(Variable.VV)


def test_lag0_cycle_detected():
    g = CausalGraph(nodes=TABULAR)
    g.add(Variable.GMV, Variable.VV, 0)
    g.add(Variable.VV, Variable.GMV, 0)
    assert not g.lag0_acyclic()


def test_json_roundtrip_preserves_edges_and_provenance():
    g = CausalGraph(nodes=TABULAR)
    g.add(Variable.TAU, Variable.GMV, 1, found_by=("pc", "ges"))
    g2 = CausalGraph.from_json(json.loads(g.to_json_str()))
    assert g2.edges == g.edges
    e = Edge(Variable.TAU, Variable.GMV, 1)
    assert g2.provenance[e] == frozenset({"pc", "ges"})


def test_f1_identity_and_disjoint():
    g = CausalGraph(nodes=TABULAR)
    g.add(Variable.TAU, Variable.GMV, 1)
    assert g.f1_against(g) == 1.0
    h = CausalGraph(nodes=TABULAR)
    h.add(Variable.VV, Variable.GMV, 0)
    assert g.f1_against(h) == 0.0


@given(st.sets(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=20))
def test_lag1_edges_never_break_topo(pairs):
    """Any pure lag-1 graph is trivially acyclic in the lag-0 sense."""
    g = CausalGraph(nodes=TABULAR)
    for i, j in pairs:
        g.add(TABULAR[i], TABULAR[j], 1)
    assert g.lag0_acyclic()
    assert sorted(g.topo_order(), key=lambda v: v.index) == list(TABULAR)
