"""Partial-correlation conditional independence testing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .. import errors


@dataclass(frozen=True)
class CiTestResult:
    statistic: float        # partial correlation
    p_value: float
    n: int
    conditioning_size: int


def partial_correlation_test(data, i: int, j: int, cond=()) -> CiTestResult:
    """Two-sided t-test of the partial correlation of columns i, j given
    the columns in ``cond``, computed by residualizing linear regressions."""
    data = np.asarray(data, dtype=float)
    cond = tuple(cond)
    n = data.shape[0]
    if i == j or i in cond or j in cond:
        raise ValueError("columns i, j and cond must be distinct")
    if n <= len(cond) + 3:
        raise errors.InsufficientSamples(
            f"n={n} too small for |cond|={len(cond)}")
    x, y = data[:, i], data[:, j]
    if cond:
        Z = np.column_stack([data[:, list(cond)], np.ones(n)])
        rank = np.linalg.matrix_rank(Z)
        if rank < Z.shape[1]:
            raise errors.SingularDesign("collinear conditioning set")
        coef_x, *_ = np.linalg.lstsq(Z, x, rcond=None)
        coef_y, *_ = np.linalg.lstsq(Z, y, rcond=None)
        rx = x - Z @ coef_x
        ry = y - Z @ coef_y
    else:
        rx = x - x.mean()
        ry = y - y.mean()
    denom = np.sqrt((rx * rx).sum() * (ry * ry).sum())
    if denom == 0:
        raise errors.SingularDesign("zero-variance residuals")
    r = float(np.clip((rx * ry).sum() / denom, -1.0, 1.0))
    df = n - len(cond) - 2
    if abs(r) >= 1.0:
        return CiTestResult(r, 0.0, n, len(cond))
    t = r * np.sqrt(df / (1.0 - r * r))
    p = float(2.0 * stats.t.sf(abs(t), df))
    return CiTestResult(r, p, n, len(cond))


class FastCiTester:
    """Covariance-based partial correlations for repeated testing on one
    dataset; algebraically identical to the regression route."""

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        self.n = data.shape[0]
        sd = data.std(axis=0)
        if np.any(sd == 0):
            bad = int(np.argmin(sd))
            raise errors.SingularDesign(f"constant column {bad}")
        z = (data - data.mean(axis=0)) / sd
        self.corr = (z.T @ z) / self.n

    def test(self, i: int, j: int, cond=()) -> CiTestResult:
        cond = tuple(cond)
        if self.n <= len(cond) + 3:
            raise errors.InsufficientSamples(
                f"n={self.n} too small for |cond|={len(cond)}")
        idx = [i, j, *cond]
        sub = self.corr[np.ix_(idx, idx)]
        try:
            prec = np.linalg.inv(sub)
        except np.linalg.LinAlgError:
            raise errors.SingularDesign("collinear conditioning set")
        if prec[0, 0] <= 0 or prec[1, 1] <= 0:
            raise errors.SingularDesign("non-positive precision")
        r = float(np.clip(-prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1]),
                          -1.0, 1.0))
        df = self.n - len(cond) - 2
        if abs(r) >= 1.0:
            return CiTestResult(r, 0.0, self.n, len(cond))
        t = r * np.sqrt(df / (1.0 - r * r))
        p = float(2.0 * stats.t.sf(abs(t), df))
        return CiTestResult(r, p, self.n, len(cond))
