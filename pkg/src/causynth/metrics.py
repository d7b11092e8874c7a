"""Evaluation metrics and the downstream diagnosis classifier.

Tabular prediction error (range-normalized MAE), image similarity
(MAE / single-scale SSIM / PSNR), volume-intervention fidelity with
Bland-Altman export, and a softmax classifier over encoder-latent plus
tabular features.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import errors, ism, nets, phantom
from .phantom import PhantomImage
from .variables import TABULAR, Variable

PSNR_CAP = 99.0
SSIM_WINDOW = 8


@dataclass(frozen=True)
class MetricReport:
    name: str
    values: dict                      # key -> float
    count: int
    config_hash: str = ""

    def __post_init__(self):
        if self.count <= 0:
            raise errors.LengthMismatch("empty metric report")
        bad = {k: v for k, v in self.values.items()
               if not np.isfinite(v)}
        if bad:
            raise errors.ZeroRange(f"non-finite metric values: {bad}")

    def to_json(self) -> dict:
        return {"name": self.name, "values": dict(self.values),
                "count": self.count, "config_hash": self.config_hash}


def config_hash(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, default=str).encode()
    ).hexdigest()[:16]


# --- tabular -------------------------------------------------------------

def nmae(truth, pred) -> float:
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.shape != pred.shape:
        raise errors.LengthMismatch(
            f"{truth.shape} vs {pred.shape}")
    if truth.size < 2:
        raise errors.LengthMismatch("need at least two samples")
    rng = truth.max() - truth.min()
    if rng <= 0:
        raise errors.ZeroRange("truth vector has zero range")
    return float(np.mean(np.abs(truth - pred)) / rng)


# --- images --------------------------------------------------------------

def _windows(p: np.ndarray, size: int):
    h, w = p.shape
    for i in range(0, h - size + 1, size):
        for j in range(0, w - size + 1, size):
            yield p[i:i + size, j:j + size]


def ssim(a: np.ndarray, b: np.ndarray, window: int = SSIM_WINDOW) -> float:
    """Single-scale SSIM over non-overlapping windows, data range 1."""
    c1, c2 = (0.01) ** 2, (0.03) ** 2
    vals = []
    for wa, wb in zip(_windows(a, window), _windows(b, window)):
        ma, mb = wa.mean(), wb.mean()
        va, vb = wa.var(), wb.var()
        cov = ((wa - ma) * (wb - mb)).mean()
        vals.append(((2 * ma * mb + c1) * (2 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return float(np.mean(vals))


def image_metrics(a: PhantomImage, b: PhantomImage) -> dict:
    if a.pixels.shape != b.pixels.shape:
        raise errors.ShapeMismatch(
            f"{a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels - b.pixels
    mae = float(np.abs(diff).mean())
    mse = float((diff * diff).mean())
    psnr = PSNR_CAP if mse < 1e-10 else min(PSNR_CAP,
                                            float(10 * np.log10(1.0 / mse)))
    return {"mae": mae, "ssim": ssim(a.pixels, b.pixels), "psnr": psnr}


# --- volume interventions ------------------------------------------------

DESIRED_GRID = (-15, -10, -5, 5, 10, 15)
_VOLS = (Variable.TIV, Variable.VV, Variable.GMV)


def volume_intervention_eval(model, cohort, desired=DESIRED_GRID,
                             max_subjects=None, ba_csv_path=None):
    """Per (variable, desired%) mean/std of the realized volume change.

    Encodes each subject's first imaged session once, then applies the
    latent transition per intervention. Bland-Altman points (mean of
    desired and actual volume, desired − actual) go to ``ba_csv_path``.
    """
    subjects = []
    for sessions in cohort.subjects.values():
        imaged = [s for s in sessions if s.image is not None]
        if imaged:
            subjects.append(imaged[0])
    if max_subjects:
        subjects = subjects[:max_subjects]
    if not subjects:
        raise errors.EmptyCohort("no imaged sessions")
    encoded = [(s, phantom.encode(s.image, model.config).vector(),
                ism._session_volumes(s)) for s in subjects]
    stats = {}
    ba_points = []
    for var_idx, var in enumerate(_VOLS):
        for pct in desired:
            actual = []
            for s, wvec, v in encoded:
                v2 = v.copy()
                v2[var_idx] = v[var_idx] * (1 + pct / 100.0)
                w_new = model.transition(wvec, v, v2)
                seg = phantom.segment_volumes(phantom.render(w_new,
                                                             model.config),
                                              model.config)
                got = 100.0 * (seg[var_idx] - v[var_idx]) / v[var_idx]
                actual.append(got)
                ba_points.append({
                    "variable": var.value,
                    "desired_pct": pct,
                    "mean": (v2[var_idx] + v[var_idx]
                             * (1 + got / 100.0)) / 2.0,
                    "diff": pct - got,
                })
            stats[(var, pct)] = (float(np.mean(actual)),
                                 float(np.std(actual)))
    if ba_csv_path:
        with open(ba_csv_path, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=["mean", "diff", "variable",
                                                "desired_pct"])
            wr.writeheader()
            for p in ba_points:
                wr.writerow({k: _fmt(p[k]) if isinstance(p[k], float)
                             else p[k] for k in wr.fieldnames})
    values = {}
    for (var, pct), (m, s) in stats.items():
        values[f"{var.value}@{pct:+d}%.mean"] = m
        values[f"{var.value}@{pct:+d}%.std"] = s
    report = MetricReport("volume_intervention", values,
                          count=len(encoded) * len(desired) * len(_VOLS),
                          config_hash=config_hash(list(desired)))
    return report, stats, ba_points


def _fmt(x: float) -> str:
    return repr(round(float(x), 10))


# --- classifier ----------------------------------------------------------

N_CLASSES = 3


@dataclass(frozen=True)
class ClassifierModel:
    weights: np.ndarray               # (n_features + 1, 3), last row bias
    feature_mean: np.ndarray
    feature_std: np.ndarray
    with_image: bool = True


def _features(session, with_image: bool, config=phantom.DEFAULT_CONFIG):
    tab = [session.values[v] for v in TABULAR]
    if not with_image:
        return np.array(tab, dtype=float)
    if session.image is None:
        raise errors.InvalidImage(
            f"session of {session.subject_id} has no image")
    lat = phantom.encode(session.image, config).vector()
    return np.concatenate([lat, tab])


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_classifier(sessions, labels, with_image: bool = True,
                     epochs: int = 3000, lr: float = 0.05,
                     seed: int = 0) -> ClassifierModel:
    """Multinomial logistic regression on (latent ⊕ tabular) features."""
    labels = np.asarray(labels, dtype=int)
    counts = np.bincount(labels, minlength=N_CLASSES)
    if np.any(counts < 20):
        raise errors.ClassMissing(
            f"need >= 20 examples per class, have {counts.tolist()}")
    X = np.array([_features(s, with_image) for s in sessions])
    mean, std = X.mean(axis=0), np.maximum(X.std(axis=0), 1e-9)
    Xz = np.hstack([(X - mean) / std, np.ones((len(X), 1))])
    Y = np.eye(N_CLASSES)[labels]
    rng = np.random.default_rng(seed)
    W = rng.normal(0, 0.01, (Xz.shape[1], N_CLASSES))
    m = np.zeros_like(W)
    v = np.zeros_like(W)
    b1, b2 = nets.ADAM_BETAS
    for t in range(1, epochs + 1):
        P = _softmax(Xz @ W)
        G = Xz.T @ (P - Y) / len(X)
        m = b1 * m + (1 - b1) * G
        v = b2 * v + (1 - b2) * G * G
        W -= lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + 1e-8)
    return ClassifierModel(W, mean, std, with_image)


def classify(model: ClassifierModel, session) -> np.ndarray:
    x = _features(session, model.with_image)
    xz = np.append((x - model.feature_mean) / model.feature_std, 1.0)
    return _softmax(xz[None, :] @ model.weights)[0]


# --- classification metrics ----------------------------------------------

def _auc_binary(truth, score) -> float:
    """Rank-based AUC with average ranks for ties."""
    order = np.argsort(score, kind="mergesort")
    ranks = np.empty(len(score), dtype=float)
    sorted_scores = np.asarray(score)[order]
    i = 0
    while i < len(score):
        j = i
        while j + 1 < len(score) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos = truth.astype(bool)
    n_pos, n_neg = pos.sum(), (~pos).sum()
    if n_pos == 0 or n_neg == 0:
        raise errors.SingleClassTruth("one-vs-rest split is degenerate")
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2)
                 / (n_pos * n_neg))


def classification_metrics(truth, probs) -> dict:
    truth = np.asarray(truth, dtype=int)
    probs = np.asarray(probs, dtype=float)
    classes = sorted(set(truth.tolist()))
    if len(classes) < 2:
        raise errors.SingleClassTruth("need >= 2 classes in truth")
    pred = probs.argmax(axis=1)
    aucs, f1s, recalls, precisions = [], [], [], []
    for c in classes:
        is_c = truth == c
        aucs.append(_auc_binary(is_c, probs[:, c]))
        tp = int(np.sum(is_c & (pred == c)))
        fp = int(np.sum(~is_c & (pred == c)))
        fn = int(np.sum(is_c & (pred != c)))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
        recalls.append(rec)
        precisions.append(prec)
    return {
        "mauc": float(np.mean(aucs)),
        "acc": float(np.mean(pred == truth)),
        "f1": float(np.mean(f1s)),
        "recall": float(np.mean(recalls)),
        "precision": float(np.mean(precisions)),
    }
