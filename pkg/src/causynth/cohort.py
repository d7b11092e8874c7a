"""Longitudinal cohort data model: CSV ingestion, session pairing,
z-score normalization and subject-level splitting."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import errors
from .variables import (CSV_COLUMNS, CONSTANT, DISCRETE, TABULAR, Variable,
                        check_domain)

_HEADER = ["subject_id", "time_years"] + [CSV_COLUMNS[v] for v in TABULAR]
_IMAGE_COL = "image_path"


@dataclass(frozen=True)
class Session:
    subject_id: str
    time: float                      # years since subject baseline
    values: dict                     # Variable -> float, x1..x10
    image: object = None             # optional PhantomImage
    image_path: str = None           # optional path of a persisted image

    def vector(self, order=TABULAR) -> np.ndarray:
        return np.array([self.values[v] for v in order], dtype=float)


@dataclass(frozen=True)
class SessionPair:
    earlier: Session
    later: Session

    @property
    def delta_t(self) -> float:
        return self.later.time - self.earlier.time

    def __post_init__(self):
        if self.delta_t <= 0:
            raise errors.NonMonotoneTime(self.earlier.subject_id)


@dataclass(frozen=True)
class NormStats:
    """Per-variable mean/std used for z-scoring; identity when mean=0, std=1."""
    mean: dict = field(default_factory=dict)   # Variable -> float
    std: dict = field(default_factory=dict)

    def transform(self, var: Variable, value: float) -> float:
        return (value - self.mean.get(var, 0.0)) / self.std.get(var, 1.0)

    def inverse(self, var: Variable, value: float) -> float:
        return value * self.std.get(var, 1.0) + self.mean.get(var, 0.0)

    def to_json(self) -> dict:
        return {
            "mean": {v.value: m for v, m in self.mean.items()},
            "std": {v.value: s for v, s in self.std.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NormStats":
        return cls(mean={Variable(k): v for k, v in obj["mean"].items()},
                   std={Variable(k): v for k, v in obj["std"].items()})


@dataclass(frozen=True)
class Cohort:
    subjects: dict                   # subject_id -> ordered list[Session]
    stats: NormStats = field(default_factory=NormStats)

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    def sessions(self):
        for sid in self.subjects:
            yield from self.subjects[sid]

    @property
    def n_sessions(self) -> int:
        return sum(len(s) for s in self.subjects.values())


def _parse_float(text, row, col):
    try:
        return float(text)
    except (TypeError, ValueError):
        raise errors.MalformedCsv(row, f"cannot parse {col}={text!r}")


def load_cohort(path, schema=None) -> Cohort:
    """Load a cohort from CSV. ``schema`` maps canonical column names to the
    file's column names (defaults to the canonical header)."""
    schema = schema or {}
    if not os.path.exists(path):
        raise errors.MalformedCsv(0, f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        colmap = {name: schema.get(name, name) for name in _HEADER}
        for canonical, actual in colmap.items():
            if actual not in fields:
                raise errors.MissingColumn(actual)
        has_image = schema.get(_IMAGE_COL, _IMAGE_COL) in fields
        image_col = schema.get(_IMAGE_COL, _IMAGE_COL)

        by_subject = {}
        for idx, row in enumerate(reader, start=2):   # 1-based incl. header
            sid = row.get(colmap["subject_id"])
            if sid is None or sid == "":
                raise errors.MalformedCsv(idx, "empty subject_id")
            time = _parse_float(row.get(colmap["time_years"]), idx, "time_years")
            if time < 0:
                raise errors.DomainViolation("time_years", idx, "negative time")
            values = {}
            for var in TABULAR:
                raw = row.get(colmap[CSV_COLUMNS[var]])
                if raw is None or raw == "":
                    raise errors.MalformedCsv(idx, f"missing {CSV_COLUMNS[var]}")
                val = _parse_float(raw, idx, CSV_COLUMNS[var])
                check_domain(var, val, idx)
                values[var] = val
            image_path = row.get(image_col) or None if has_image else None
            by_subject.setdefault(sid, []).append(
                Session(sid, time, values, image_path=image_path))

    subjects = {}
    for sid, sessions in by_subject.items():
        sessions.sort(key=lambda s: s.time)
        times = [s.time for s in sessions]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise errors.NonMonotoneTime(sid)
        base = sessions[0]
        for s in sessions:
            if abs(s.values[Variable.AGE] - (base.values[Variable.AGE]
                                             + s.time - base.time)) > 1e-9:
                raise errors.DomainViolation("x1", detail=f"age/time drift for {sid}")
            for var in CONSTANT:
                if s.values[var] != base.values[var]:
                    raise errors.DomainViolation(var.value,
                                                 detail=f"not constant for {sid}")
        subjects[sid] = sessions
    return Cohort(subjects=subjects)


def _fmt(x: float) -> str:
    return repr(float(x))


def save_cohort(cohort: Cohort, path, image_dir=None) -> None:
    """Write a cohort to canonical CSV (and PNG images when present).

    Output is byte-deterministic: subjects in insertion order, shortest
    round-trip float repr.
    """
    from . import phantom

    any_image = any(s.image is not None or s.image_path
                    for s in cohort.sessions())
    header = list(_HEADER) + ([_IMAGE_COL] if any_image else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for sid in cohort.subjects:
            for k, s in enumerate(cohort.subjects[sid]):
                row = [sid, _fmt(s.time)] + [_fmt(s.values[v]) for v in TABULAR]
                if any_image:
                    rel = ""
                    if s.image is not None and image_dir is not None:
                        os.makedirs(image_dir, exist_ok=True)
                        rel = os.path.join(os.path.basename(image_dir),
                                           f"{sid}_{k}.png")
                        phantom.save_png(s.image,
                                         os.path.join(image_dir, f"{sid}_{k}.png"))
                    elif s.image_path:
                        rel = s.image_path
                    row.append(rel)
                writer.writerow(row)


def make_pairs(cohort: Cohort, mode="adjacent"):
    """Arrange each subject's sessions into (earlier, later) pairs."""
    if mode not in ("adjacent", "all"):
        raise ValueError(f"unknown pairing mode {mode!r}")
    pairs = []
    for sid in cohort.subjects:
        sessions = cohort.subjects[sid]
        if mode == "adjacent":
            pairs.extend(SessionPair(a, b)
                         for a, b in zip(sessions, sessions[1:]))
        else:
            for i in range(len(sessions)):
                for j in range(i + 1, len(sessions)):
                    pairs.append(SessionPair(sessions[i], sessions[j]))
    return pairs


_CONTINUOUS = tuple(v for v in TABULAR if v not in DISCRETE)


def normalize(cohort: Cohort):
    """Z-score continuous variables over all sessions (population std);
    sex/APOE untouched. Returns (normalized cohort, stats)."""
    if cohort.n_subjects == 0:
        raise errors.EmptyCohort()
    rows = np.array([s.vector() for s in cohort.sessions()])
    mean, std = {}, {}
    for col, var in enumerate(TABULAR):
        if var in DISCRETE:
            continue
        m = float(rows[:, col].mean())
        s = float(rows[:, col].std())
        if s == 0.0:
            raise errors.DegenerateVariable(var.value)
        mean[var], std[var] = m, s
    stats = NormStats(mean=mean, std=std)
    return apply_stats(cohort, stats), stats


def apply_stats(cohort: Cohort, stats: NormStats) -> Cohort:
    subjects = {}
    for sid, sessions in cohort.subjects.items():
        subjects[sid] = [
            replace(s, values={v: stats.transform(v, x)
                               for v, x in s.values.items()})
            for s in sessions]
    return Cohort(subjects=subjects, stats=stats)


def denormalize(cohort: Cohort) -> Cohort:
    stats = cohort.stats
    subjects = {}
    for sid, sessions in cohort.subjects.items():
        subjects[sid] = [
            replace(s, values={v: stats.inverse(v, x)
                               for v, x in s.values.items()})
            for s in sessions]
    return Cohort(subjects=subjects)


def split_by_subject(cohort: Cohort, ratio: float, seed: int):
    """Deterministic subject-level split; train size = floor(n * ratio)."""
    if not 0 < ratio < 1:
        raise errors.InvalidRange(f"ratio must be in (0,1), got {ratio}")
    if cohort.n_subjects == 0:
        raise errors.EmptyCohort()
    ids = sorted(cohort.subjects)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_train = math.floor(len(ids) * ratio)
    train_ids = {ids[i] for i in order[:n_train]}
    train = {sid: cohort.subjects[sid] for sid in cohort.subjects
             if sid in train_ids}
    test = {sid: cohort.subjects[sid] for sid in cohort.subjects
            if sid not in train_ids}
    return (Cohort(subjects=train, stats=cohort.stats),
            Cohort(subjects=test, stats=cohort.stats))
