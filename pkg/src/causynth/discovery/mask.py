"""Candidate-edge mask derived from the modelling assumptions.

Three tiers per (src, dst, lag) triple:
  forced    -- present in every output graph (lag-1 self edges of the
               time-varying variables),
  forbidden -- never searched (violates timing, hierarchy, or constancy),
  free      -- left to the data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..graph import Edge
from ..variables import DYNAMIC, Group, STATIC, TABULAR, Variable

_GROUP_RANK = {Group.S: 0, Group.B: 1, Group.V: 2}


@dataclass(frozen=True)
class EdgeMask:
    forced: frozenset = field(default_factory=frozenset)
    forbidden: frozenset = field(default_factory=frozenset)

    def allows(self, edge: Edge) -> bool:
        return edge not in self.forbidden

    def free_edges(self):
        out = []
        for src in TABULAR:
            for dst in TABULAR:
                for lag in (0, 1):
                    e = Edge(src, dst, lag)
                    if e not in self.forbidden and e not in self.forced:
                        out.append(e)
        return out


def build_candidate_mask(nodes=TABULAR) -> EdgeMask:
    nodes = tuple(nodes)
    forced = set()
    forbidden = set()
    for src in nodes:
        for dst in nodes:
            for lag in (0, 1):
                e = Edge(src, dst, lag)
                if src is dst:
                    if lag == 1 and src in DYNAMIC:
                        forced.add(e)
                    else:
                        forbidden.add(e)
                    continue
                # Age is advanced deterministically by the clock alone;
                # sex and genotype are fixed at conception.  Education is
                # the only baseline variable another baseline variable
                # may influence.
                if dst in (Variable.AGE, Variable.SEX, Variable.APOE):
                    forbidden.add(e)
                    continue
                if dst is Variable.EDUCATION and src.group is not Group.S:
                    forbidden.add(e)
                    continue
                # Static values do not change between visits, so a lagged
                # copy is indistinguishable from the contemporaneous one.
                if lag == 1 and src in STATIC:
                    forbidden.add(e)
                    continue
                sg, dg = src.group, dst.group
                if _GROUP_RANK[dg] < _GROUP_RANK[sg]:
                    forbidden.add(e)      # downstream tiers cannot feed back
                    continue
    return EdgeMask(forced=frozenset(forced), forbidden=frozenset(forbidden))
