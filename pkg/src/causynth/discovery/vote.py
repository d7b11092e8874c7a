"""Combining the three structure searches and checking the result.

An edge enters the consensus graph when at least `threshold` of the input
graphs contain it; forced edges are always kept.  `validate_edges` then
re-tests every consensus edge with a partial correlation test conditioned
on all remaining effective columns.
"""
from __future__ import annotations

from dataclasses import dataclass

from .. import errors
from ..graph import CausalGraph, Edge
from .citest import CiTestResult, FastCiTester
from .data import PairsData


def vote(graphs, threshold: int = 2,
         forced=frozenset()) -> CausalGraph:
    if not graphs:
        raise errors.NodeSetMismatch("no graphs to combine")
    nodes = graphs[0].nodes
    for g in graphs[1:]:
        if g.nodes != nodes:
            raise errors.NodeSetMismatch(
                "input graphs disagree on the node set")
    combined = CausalGraph(nodes=nodes)
    tally = {}
    for g in graphs:
        for e in g.edges:
            tally[e] = tally.get(e, 0) + 1
    for e in sorted(tally):
        if tally[e] >= threshold or e in forced:
            prov = frozenset()
            for g in graphs:
                prov |= g.provenance.get(e, frozenset())
            combined.add(e.src, e.dst, e.lag, found_by=prov)
    return combined


@dataclass(frozen=True)
class EdgeCheck:
    edge: Edge
    result: CiTestResult
    passed: bool


def validate_edges(graph: CausalGraph, data: PairsData,
                   alpha: float = 0.05):
    """Partial correlation of each edge's endpoint columns given every
    other effective column.  An edge passes when the dependence is
    significant at `alpha`."""
    tester = FastCiTester(data.matrix)
    n_cols = data.matrix.shape[1]
    checks = []
    for e in sorted(graph.edges):
        i = data.src_col(e.src, e.lag)
        j = data.dst_col(e.dst)
        cond = tuple(c for c in range(n_cols) if c not in (i, j))
        res = tester.test(i, j, cond)
        checks.append(EdgeCheck(edge=e, result=res, passed=res.p_value < alpha))
    return checks
