"""Variable roles, groups and value domains for the longitudinal cohort.

Ten tabular variables plus an optional image slot. Groups:
S (demographic), B (CSF biomarkers), V (segmented volumes), X (image).
"""
from __future__ import annotations

import enum

from . import errors


class Group(str, enum.Enum):
    S = "demographic"
    B = "biomarker"
    V = "volume"
    X = "image"


class Variable(str, enum.Enum):
    AGE = "x1"
    SEX = "x2"
    EDUCATION = "x3"
    APOE = "x4"
    ABETA = "x5"
    TAU = "x6"
    PTAU = "x7"
    TIV = "x8"
    VV = "x9"
    GMV = "x10"
    IMAGE = "x11"

    @property
    def group(self) -> Group:
        return _GROUPS[self]

    @property
    def index(self) -> int:
        return int(self.value[1:])


_GROUPS = {
    Variable.AGE: Group.S,
    Variable.SEX: Group.S,
    Variable.EDUCATION: Group.S,
    Variable.APOE: Group.S,
    Variable.ABETA: Group.B,
    Variable.TAU: Group.B,
    Variable.PTAU: Group.B,
    Variable.TIV: Group.V,
    Variable.VV: Group.V,
    Variable.GMV: Group.V,
    Variable.IMAGE: Group.X,
}

#: Tabular variables in canonical order (image excluded).
TABULAR = tuple(v for v in Variable if v is not Variable.IMAGE)

#: Variables held constant over a subject's sessions.
CONSTANT = (Variable.SEX, Variable.EDUCATION, Variable.APOE)

#: Variables whose dynamics are fitted (age is advanced deterministically).
DYNAMIC = (Variable.ABETA, Variable.TAU, Variable.PTAU,
           Variable.TIV, Variable.VV, Variable.GMV)

#: Variables that are *sources only* in discovery: constant over time, or
#: deterministic in time (age), so they carry a single effective column.
STATIC = (Variable.AGE,) + CONSTANT

#: Discrete variables exempt from z-scoring.
DISCRETE = (Variable.SEX, Variable.APOE)

#: Mapping from Variable to CSV column name.
CSV_COLUMNS = {
    Variable.AGE: "age",
    Variable.SEX: "sex",
    Variable.EDUCATION: "education",
    Variable.APOE: "apoe",
    Variable.ABETA: "abeta",
    Variable.TAU: "tau",
    Variable.PTAU: "ptau",
    Variable.TIV: "tiv",
    Variable.VV: "vv",
    Variable.GMV: "gmv",
}

#: Human-facing metadata served by the gateway.
DESCRIPTIONS = {
    Variable.AGE: ("age", "years"),
    Variable.SEX: ("biological sex (0 male, 1 female)", "-"),
    Variable.EDUCATION: ("years of education", "years"),
    Variable.APOE: ("APOE e4 allele count (0/1/2)", "-"),
    Variable.ABETA: ("CSF amyloid-beta 1-42", "pg/ml"),
    Variable.TAU: ("CSF tau", "pg/ml"),
    Variable.PTAU: ("CSF phosphorylated tau 181", "pg/ml"),
    Variable.TIV: ("total intracranial volume", "ml"),
    Variable.VV: ("ventricle volume", "ml"),
    Variable.GMV: ("grey matter volume", "ml"),
}


def check_domain(var: Variable, value: float, row=None) -> None:
    """Raise DomainViolation when a value is outside the variable's domain."""
    import math

    if not math.isfinite(value):
        raise errors.DomainViolation(var.value, row, "non-finite value")
    if var is Variable.SEX and value not in (0.0, 1.0):
        raise errors.DomainViolation(var.value, row, f"sex must be 0/1, got {value}")
    if var is Variable.APOE and value not in (0.0, 1.0, 2.0):
        raise errors.DomainViolation(var.value, row, f"apoe must be 0/1/2, got {value}")
    if var.group in (Group.B, Group.V) and value <= 0.0:
        raise errors.DomainViolation(var.value, row, "must be strictly positive")
