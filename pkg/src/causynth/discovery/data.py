"""Stacked session-pair matrix with one effective column per variable/slot.

Time-varying variables contribute an earlier (t0) and a later (t1) column.
Variables that are constant per subject, or deterministic in time (age),
contribute a single column: duplicating them would make designs singular.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import errors
from ..variables import DYNAMIC, STATIC, TABULAR, Variable


@dataclass(frozen=True)
class ColKey:
    var: Variable
    slot: str          # "static", "t0" or "t1"

    def __str__(self):
        return self.var.value if self.slot == "static" \
            else f"{self.var.value}@{self.slot}"


def column_layout():
    cols = [ColKey(v, "static") for v in STATIC]
    cols += [ColKey(v, "t0") for v in DYNAMIC]
    cols += [ColKey(v, "t1") for v in DYNAMIC]
    return cols


@dataclass(frozen=True)
class PairsData:
    matrix: np.ndarray              # n_pairs x n_columns
    columns: tuple                  # tuple[ColKey]
    delta_t: np.ndarray             # n_pairs

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def index(self, var: Variable, slot: str) -> int:
        key = ColKey(var, slot)
        try:
            return self.columns.index(key)
        except ValueError:
            raise errors.UnknownVariable(str(key))

    def src_col(self, var: Variable, lag: int) -> int:
        if var in STATIC:
            return self.index(var, "static")
        return self.index(var, "t0" if lag == 1 else "t1")

    def dst_col(self, var: Variable) -> int:
        if var in STATIC:
            return self.index(var, "static")
        return self.index(var, "t1")

    @classmethod
    def from_pairs(cls, pairs) -> "PairsData":
        if not pairs:
            raise errors.InsufficientSamples("no session pairs")
        cols = column_layout()
        rows = np.empty((len(pairs), len(cols)))
        dts = np.empty(len(pairs))
        for r, pair in enumerate(pairs):
            dts[r] = pair.delta_t
            for c, key in enumerate(cols):
                session = pair.earlier if key.slot in ("static", "t0") \
                    else pair.later
                rows[r, c] = session.values[key.var]
        return cls(matrix=rows, columns=tuple(cols), delta_t=dts)

    @classmethod
    def from_matrix(cls, matrix, delta_t=None) -> "PairsData":
        """Accept a raw n x 20 matrix ordered as x1..x10 at t0 then
        x1..x10 at t1; static duplicates are dropped from the t1 block."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape[1] != 2 * len(TABULAR):
            raise errors.ShapeMismatch(
                f"expected {2 * len(TABULAR)} columns, got {matrix.shape[1]}")
        cols = column_layout()
        order = []
        for key in cols:
            base = list(TABULAR).index(key.var)
            order.append(base if key.slot in ("static", "t0")
                         else base + len(TABULAR))
        dts = np.ones(matrix.shape[0]) if delta_t is None \
            else np.asarray(delta_t, dtype=float)
        return cls(matrix=matrix[:, order], columns=tuple(cols), delta_t=dts)
