"""Non-Gaussianity-based structure search.

Two-block DirectLiNGAM adapted to the temporal layout: baseline-only
variables are ordered first among themselves, the later-visit columns are
residualized on everything already past (baseline columns and earlier-visit
copies) and then ordered by the pairwise likelihood-ratio measure.  Edges
come from regressing each variable on its predecessors and keeping
coefficients that pass a t-test.
"""
from __future__ import annotations

import numpy as np
from scipy import stats

from ..graph import CausalGraph, Edge
from ..variables import DYNAMIC, STATIC, TABULAR
from .data import PairsData
from .mask import EdgeMask

METHOD = "lingam"

# maximum-entropy approximation constants for a standardized variable
_K1, _K2, _GAMMA = 79.047, 7.4129, 0.37457


def _entropy(u: np.ndarray) -> float:
    u = (u - u.mean()) / max(u.std(), 1e-12)
    h = (1.0 + np.log(2.0 * np.pi)) / 2.0
    h -= _K1 * (np.mean(np.log(np.cosh(u))) - _GAMMA) ** 2
    h -= _K2 * np.mean(u * np.exp(-0.5 * u * u)) ** 2
    return float(h)


def _residual(y, x):
    x = (x - x.mean())
    denom = float(x @ x)
    if denom < 1e-12:
        return y - y.mean()
    return y - (float(x @ y) - x.sum() * y.mean()) / denom * x


def _lr_measure(xi, xj) -> float:
    """Positive when xi looks exogenous relative to xj."""
    ri = _residual(xi, xj)
    rj = _residual(xj, xi)
    return (_entropy(xj) + _entropy(ri)) - (_entropy(xi) + _entropy(rj))


def causal_order(columns: np.ndarray) -> list:
    """DirectLiNGAM ordering of the columns of an n x k matrix.

    Returns column indices from most to least exogenous.
    """
    remaining = list(range(columns.shape[1]))
    work = columns.astype(float).copy()
    order = []
    while len(remaining) > 1:
        best, best_score = None, None
        for i in remaining:
            score = 0.0
            for j in remaining:
                if j == i:
                    continue
                t = _lr_measure(work[:, i], work[:, j])
                score += min(0.0, t) ** 2
            if best is None or score < best_score:
                best, best_score = i, score
        order.append(best)
        remaining.remove(best)
        for j in remaining:
            work[:, j] = _residual(work[:, j], work[:, best])
    order.extend(remaining)
    return order


def _prune(y, X, extra=None) -> np.ndarray:
    """Two-sided coefficient t-test p-values for the columns of X in an
    OLS fit.  ``extra`` columns (visit gap, intercept) are adjusted for
    but not reported."""
    n = y.shape[0]
    tail = [np.ones(n)] if extra is None else [extra, np.ones(n)]
    Xc = np.column_stack([X, *tail])
    beta, _, rank, _ = np.linalg.lstsq(Xc, y, rcond=None)
    resid = y - Xc @ beta
    dof = max(n - Xc.shape[1], 1)
    sigma2 = float(resid @ resid) / dof
    cov = np.linalg.pinv(Xc.T @ Xc) * sigma2
    se = np.sqrt(np.maximum(np.diag(cov), 1e-300))
    tvals = beta / se
    return 2.0 * stats.t.sf(np.abs(tvals[:X.shape[1]]), dof)


def discover_lingam(data: PairsData, mask: EdgeMask,
                    alpha: float = 0.05) -> CausalGraph:
    graph = CausalGraph(nodes=tuple(TABULAR))
    for e in sorted(mask.forced):
        graph.add(e.src, e.dst, e.lag, found_by=(METHOD,))

    static_cols = [data.src_col(v, 0) for v in STATIC]
    t0_cols = [data.src_col(v, 1) for v in DYNAMIC]
    t1_cols = [data.dst_col(v) for v in DYNAMIC]

    # block 1: baseline variables among themselves
    s_order = causal_order(data.matrix[:, static_cols])
    s_vars = [STATIC[i] for i in s_order]
    for pos, dst in enumerate(s_vars[1:], start=1):
        preds = s_vars[:pos]
        X = data.matrix[:, [data.src_col(v, 0) for v in preds]]
        pvals = _prune(data.matrix[:, data.src_col(dst, 0)], X)
        for src, p in zip(preds, pvals):
            if p < alpha and mask.allows(Edge(src, dst, 0)):
                graph.add(src, dst, 0, found_by=(METHOD,))

    # block 2: later-visit columns, residualized on everything earlier
    prior = data.matrix[:, static_cols + t0_cols]
    resid = np.empty((data.n, len(DYNAMIC)))
    Xp = np.column_stack([prior, data.delta_t, np.ones(data.n)])
    for k, c in enumerate(t1_cols):
        beta, _, _, _ = np.linalg.lstsq(Xp, data.matrix[:, c], rcond=None)
        resid[:, k] = data.matrix[:, c] - Xp @ beta
    d_order = causal_order(resid)
    d_vars = [DYNAMIC[i] for i in d_order]

    for pos, dst in enumerate(d_vars):
        pred_edges = []
        for v in STATIC:
            pred_edges.append((v, 0, data.src_col(v, 0)))
        for v in DYNAMIC:
            if v is not dst:           # self lag-1 already forced
                pred_edges.append((v, 1, data.src_col(v, 1)))
        for v in d_vars[:pos]:
            pred_edges.append((v, 0, data.dst_col(v)))
        pred_edges.append((dst, 1, data.src_col(dst, 1)))
        cols = [c for _, _, c in pred_edges]
        pvals = _prune(data.matrix[:, data.dst_col(dst)],
                       data.matrix[:, cols], extra=data.delta_t)
        for (src, lag, _), p in zip(pred_edges, pvals):
            e = Edge(src, dst, lag)
            if p < alpha and mask.allows(e) and e not in mask.forced:
                graph.add(src, dst, lag, found_by=(METHOD,))
    return graph
