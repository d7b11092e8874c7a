"""Constraint-based structure search over the session-pair columns.

Temporal PC in three phases, all built on partial correlation tests with
the visit gap appended to every conditioning set (dynamic effects scale
with the gap, so omitting it induces spurious common-gap correlations).

Phase one screens the past candidates (baseline and earlier-visit
columns) of each later-visit column by backward elimination, always
conditioning on the full set of surviving candidates: every back-door
path between a past candidate and the target runs through some other
past parent, so the full-blanket partial correlation isolates the direct
effect and is far less prone to cancellation than small-subset tests.

Phase two prunes contemporaneous links among later-visit columns given
both endpoints' surviving past parents and remaining contemporaneous
neighbours, and orients them with an anchor test: if x->y at the later
visit, then the earlier copy of x is separated from y by conditioning on
the later copy of x, while conditioning on y's later copy opens a
collider at y for the reverse direction.

Phase three removes lagged shadows of contemporaneous edges: a lagged
candidate that only proxies its own later copy becomes independent of
the target once the target's contemporaneous parents are conditioned on.
"""
from __future__ import annotations

import numpy as np

from ..graph import CausalGraph, Edge
from ..variables import STATIC, TABULAR
from .citest import FastCiTester
from .data import PairsData
from .mask import EdgeMask

METHOD = "pc"


class _Session:
    """Shared state for one discovery run."""

    def __init__(self, data: PairsData, mask: EdgeMask, alpha: float):
        self.data = data
        self.mask = mask
        self.alpha = alpha
        X = np.column_stack([data.matrix, data.delta_t])
        self.dt_col = X.shape[1] - 1
        self.tester = FastCiTester(X)

    def p(self, i, j, cond):
        cond = tuple(sorted((set(cond) | {self.dt_col}) - {i, j}))
        return self.tester.test(i, j, cond).p_value


def _candidate_maps(data: PairsData, mask: EdgeMask):
    """Split non-forbidden edges into lagged (past column -> later
    column, including baseline -> baseline) and contemporaneous pairs."""
    lagged, contemp = {}, {}
    for src in TABULAR:
        for dst in TABULAR:
            for lag in (0, 1):
                e = Edge(src, dst, lag)
                if e in mask.forbidden:
                    continue
                ci = data.src_col(src, lag)
                cj = data.dst_col(dst)
                if ci == cj:
                    continue
                if lag == 0 and src not in STATIC and dst not in STATIC:
                    contemp.setdefault(frozenset((ci, cj)), e)
                else:
                    lagged.setdefault(cj, {})[ci] = e
    return lagged, contemp


def _phase_past(run: _Session, lagged, forced_cols):
    """Backward elimination of past candidates per target column."""
    past_parents = {}
    for j in sorted(lagged):
        cand = set(lagged[j])
        while True:
            worst, worst_p = None, run.alpha
            for i in sorted(cand):
                if (i, j) in forced_cols:
                    continue
                pv = run.p(i, j, cand - {i})
                if pv > worst_p:
                    worst, worst_p = i, pv
            if worst is None:
                break
            cand.remove(worst)
        past_parents[j] = cand
    return past_parents


def _phase_contemporaneous(run: _Session, contemp, past_parents):
    alive = set(contemp)
    changed = True
    while changed:
        changed = False
        nbrs = {}
        for key in alive:
            a, b = tuple(key)
            nbrs.setdefault(a, set()).add(b)
            nbrs.setdefault(b, set()).add(a)
        for key in sorted(alive, key=lambda k: tuple(sorted(k))):
            i, j = tuple(sorted(key))
            cond = (past_parents.get(i, set()) | past_parents.get(j, set())
                    | (nbrs.get(i, set()) - {j}) | (nbrs.get(j, set()) - {i}))
            if run.p(i, j, cond) > run.alpha:
                alive.remove(key)
                changed = True
    return alive


def _orient_contemporaneous(run: _Session, contemp, alive, past_parents,
                            mask):
    """Anchor test per live pair; ties fall back to variable order."""
    data = run.data
    edges = []
    for key in sorted(alive, key=lambda k: tuple(sorted(k))):
        e = contemp[key]
        fwd = Edge(e.src, e.dst, 0)
        rev = Edge(e.dst, e.src, 0)
        if rev in mask.forbidden:
            edges.append(fwd)
            continue
        i = data.dst_col(e.src)   # later copy of src
        j = data.dst_col(e.dst)
        ai = data.src_col(e.src, 1)   # earlier copies
        aj = data.src_col(e.dst, 1)
        # src -> dst implies anchor(src) _|_ dst given later src copy
        p_fwd = run.p(ai, j, past_parents.get(j, set()) | {i})
        p_rev = run.p(aj, i, past_parents.get(i, set()) | {j})
        if p_fwd > run.alpha >= p_rev:
            edges.append(fwd)
        elif p_rev > run.alpha >= p_fwd:
            edges.append(rev)
        else:
            edges.append(fwd if e.src.index < e.dst.index else rev)
    return edges


def _phase_shadows(run: _Session, past_parents, lag0_parents, forced_cols):
    """Drop lagged candidates explained away by contemporaneous parents."""
    data = run.data
    for _ in range(2):
        changed = False
        for j in sorted(past_parents):
            extra = lag0_parents.get(j, set())
            for i in sorted(past_parents[j]):
                if (i, j) in forced_cols:
                    continue
                cond = (past_parents[j] - {i}) | extra
                if run.p(i, j, cond) > run.alpha:
                    past_parents[j].remove(i)
                    changed = True
        if not changed:
            break
    return past_parents


def discover_constraint(data: PairsData, mask: EdgeMask,
                        alpha: float = 0.05) -> CausalGraph:
    run = _Session(data, mask, alpha)
    lagged, contemp = _candidate_maps(data, mask)
    forced_cols = {(data.src_col(e.src, e.lag), data.dst_col(e.dst))
                   for e in mask.forced}

    past_parents = _phase_past(run, lagged, forced_cols)
    alive = _phase_contemporaneous(run, contemp, past_parents)
    lag0_edges = _orient_contemporaneous(run, contemp, alive, past_parents,
                                         mask)
    lag0_parents = {}
    for e in lag0_edges:
        lag0_parents.setdefault(data.dst_col(e.dst), set()).add(
            data.dst_col(e.src))
    past_parents = _phase_shadows(run, past_parents, lag0_parents,
                                  forced_cols)

    graph = CausalGraph(nodes=tuple(TABULAR))
    for e in sorted(mask.forced):
        graph.add(e.src, e.dst, e.lag, found_by=(METHOD,))
    found = [lagged[j][i] for j in sorted(past_parents)
             for i in sorted(past_parents[j])
             if (i, j) not in forced_cols]
    for e in sorted(set(found) | set(lag0_edges)):
        trial = graph.add(e.src, e.dst, e.lag, found_by=(METHOD,))
        if not graph.lag0_acyclic():
            graph.remove(trial)
    return graph
