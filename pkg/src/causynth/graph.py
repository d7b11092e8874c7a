"""Lagged directed causal graph over tabular variables.

Edges carry a lag in {0, 1}; the lag-0 subgraph must stay acyclic.
Per-edge provenance records which discovery algorithms found the edge.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import errors
from .variables import Variable


@dataclass(frozen=True, order=True)
class Edge:
    src: Variable
    dst: Variable
    lag: int

    def __post_init__(self):
        if self.lag not in (0, 1):
            raise ValueError(f"lag must be 0 or 1, got {self.lag}")

    def __str__(self):
        arrow = "=>" if self.lag == 1 else "->"
        return f"{self.src.value}{arrow}{self.dst.value}"


@dataclass
class CausalGraph:
    nodes: tuple                      # tuple[Variable]
    edges: set = field(default_factory=set)          # set[Edge]
    provenance: dict = field(default_factory=dict)   # Edge -> frozenset[str]

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        self.edges = set(self.edges)

    def add(self, src, dst, lag, found_by=()):
        e = Edge(src, dst, lag)
        self.edges.add(e)
        if found_by:
            self.provenance[e] = frozenset(found_by) | self.provenance.get(
                e, frozenset())
        return e

    def remove(self, edge: Edge):
        self.edges.discard(edge)
        self.provenance.pop(edge, None)

    def has_edge(self, src, dst, lag) -> bool:
        return Edge(src, dst, lag) in self.edges

    def parents_of(self, var: Variable):
        """Ordered (parent, lag) list: lag-0 parents first, then lag-1."""
        out = [(e.src, e.lag) for e in self.edges if e.dst is var]
        out.sort(key=lambda pl: (pl[1], pl[0].index))
        return out

    def lag0_acyclic(self) -> bool:
        try:
            self.topo_order()
            return True
        except errors.NodeSetMismatch:
            return False

    def topo_order(self):
        """Topological order of nodes under lag-0 edges (Kahn, stable by
        variable index)."""
        indeg = {v: 0 for v in self.nodes}
        children = {v: [] for v in self.nodes}
        for e in self.edges:
            if e.lag == 0:
                indeg[e.dst] += 1
                children[e.src].append(e.dst)
        ready = sorted((v for v in self.nodes if indeg[v] == 0),
                       key=lambda v: v.index)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in sorted(children[v], key=lambda u: u.index):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=lambda u: u.index)
        if len(order) != len(self.nodes):
            raise errors.NodeSetMismatch("lag-0 subgraph contains a cycle")
        return order

    def to_json(self) -> dict:
        edges = sorted(self.edges)
        return {
            "nodes": [v.value for v in self.nodes],
            "edges": [{
                "src": e.src.value, "dst": e.dst.value, "lag": e.lag,
                "found_by": sorted(self.provenance.get(e, ())),
            } for e in edges],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "CausalGraph":
        g = cls(nodes=tuple(Variable(n) for n in obj["nodes"]))
        for item in obj["edges"]:
            g.add(Variable(item["src"]), Variable(item["dst"]), item["lag"],
                  found_by=item.get("found_by", ()))
        return g

    def f1_against(self, truth: "CausalGraph") -> float:
        """Edge-set F1 score treating (src, dst, lag) triples as items."""
        mine, theirs = self.edges, truth.edges
        tp = len(mine & theirs)
        if tp == 0:
            return 0.0
        precision = tp / len(mine)
        recall = tp / len(theirs)
        return 2 * precision * recall / (precision + recall)
