"""Ground-truth temporal SCM generating synthetic longitudinal cohorts.

Mechanisms are mean-reverting linear rates with one mild quadratic tau
toxicity term on grey matter; every coefficient lives in SimConfig (and in
the shipped YAML) so oracle tests stay stable. The preset causal graph has
25 edges: 6 lag-1 self edges, 14 edges all discovery algorithms should see
and 5 weaker two-algorithm edges.
"""
from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import errors, phantom
from .cohort import Cohort, Session
from .graph import CausalGraph
from .variables import Variable


class DiagnosisLabel(enum.IntEnum):
    NC = 0
    MCI = 1
    AD = 2


def preset_paper_graph() -> CausalGraph:
    """The 25-edge reference graph over x1..x10."""
    V = Variable
    nodes = (V.AGE, V.SEX, V.EDUCATION, V.APOE, V.ABETA, V.TAU, V.PTAU,
             V.TIV, V.VV, V.GMV)
    g = CausalGraph(nodes=nodes)
    # lag-1 self edges for the six time-varying variables
    for v in (V.ABETA, V.TAU, V.PTAU, V.TIV, V.VV, V.GMV):
        g.add(v, v, 1, found_by=("assumption",))
    all3 = ("constraint", "score", "lingam")
    # recovered by all algorithms
    g.add(V.SEX, V.EDUCATION, 0, all3)
    g.add(V.AGE, V.ABETA, 0, all3)
    g.add(V.APOE, V.ABETA, 0, all3)
    g.add(V.AGE, V.TAU, 0, all3)
    g.add(V.APOE, V.TAU, 0, all3)
    g.add(V.AGE, V.PTAU, 0, all3)
    g.add(V.APOE, V.PTAU, 0, all3)
    g.add(V.SEX, V.TIV, 0, all3)
    g.add(V.AGE, V.VV, 0, all3)
    g.add(V.GMV, V.VV, 0, all3)
    g.add(V.TIV, V.GMV, 0, all3)
    g.add(V.ABETA, V.GMV, 1, all3)
    g.add(V.TAU, V.GMV, 1, all3)
    g.add(V.PTAU, V.GMV, 1, all3)
    # recovered by two algorithms
    g.add(V.AGE, V.TIV, 0, ("constraint", "score"))
    g.add(V.ABETA, V.TIV, 1, ("constraint", "score"))
    g.add(V.TAU, V.TIV, 1, ("score", "lingam"))
    g.add(V.PTAU, V.TIV, 1, ("score", "lingam"))
    g.add(V.TIV, V.VV, 0, ("constraint", "score"))
    return g


@dataclass(frozen=True)
class BaselineConfig:
    age_low: float = 55.0
    age_high: float = 90.0
    sex_p: float = 0.5
    apoe_probs: tuple = (0.50, 0.35, 0.15)
    edu_base: float = 13.0
    edu_sex: float = 1.8
    edu_sigma: float = 2.2
    abeta_base: float = 1100.0
    abeta_age: float = -6.0
    abeta_apoe: float = -120.0
    abeta_sigma: float = 110.0
    tau_base: float = 180.0
    tau_age: float = 2.2
    tau_apoe: float = 40.0
    tau_sigma: float = 35.0
    ptau_base: float = 18.0
    ptau_age: float = 0.25
    ptau_apoe: float = 4.5
    ptau_sigma: float = 4.0
    tiv_base: float = 1520.0
    tiv_sex: float = -130.0
    tiv_age: float = -3.0
    tiv_sigma: float = 60.0
    gmv_tiv: float = 0.40
    gmv_abeta: float = 0.05
    gmv_tau: float = -0.35
    gmv_ptau: float = -2.5
    gmv_sigma: float = 25.0
    vv_base: float = 32.0
    vv_age: float = 0.85
    vv_gmv: float = -0.15
    vv_tiv: float = 0.05
    vv_sigma: float = 3.5


@dataclass(frozen=True)
class TransitionConfig:
    # reference levels subtracted before applying coefficients
    abeta_ref: float = 1100.0
    tau_ref: float = 200.0
    ptau_ref: float = 20.0
    tiv_ref: float = 1500.0
    gmv_ref: float = 600.0
    age_ref: float = 70.0
    # AR / mean-reversion rates (per year) and noise scales (per sqrt-year)
    abeta_revert: float = 0.45
    abeta_sigma: float = 45.0
    tau_revert: float = 0.45
    tau_sigma: float = 16.0
    ptau_revert: float = 0.45
    ptau_sigma: float = 2.0
    tiv_revert: float = 0.05
    tiv_abeta: float = 0.012
    tiv_tau: float = -0.04
    tiv_ptau: float = -0.5
    tiv_sigma: float = 6.0
    gmv_drift: float = -1.0
    gmv_abeta: float = 0.012
    gmv_tau: float = -0.05
    gmv_tau_quad: float = -8e-04
    gmv_ptau: float = -0.6
    gmv_revert: float = 0.25
    gmv_tiv: float = 0.40
    gmv_sigma: float = 4.0
    vv_revert: float = 0.45
    vv_sigma: float = 1.2


@dataclass(frozen=True)
class ImageStyleConfig:
    ratio_low: float = 0.66
    ratio_high: float = 0.80
    vratio_low: float = 0.55
    vratio_high: float = 0.75
    theta_max: float = 0.35
    dx_max: float = 2.5
    dy_max: float = 2.0
    eps_max: float = 0.4


@dataclass(frozen=True)
class DiagnosisConfig:
    alpha: float = 1.0        # weight of z-scored tau
    beta: float = 1.0         # weight of z-scored GMV (subtracted)
    tau_mean: float = 200.0
    tau_std: float = 60.0
    gmv_mean: float = 590.0
    gmv_std: float = 45.0
    threshold_mci: float = 0.6
    threshold_ad: float = 1.8


@dataclass(frozen=True)
class SimConfig:
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    transition: TransitionConfig = field(default_factory=TransitionConfig)
    style: ImageStyleConfig = field(default_factory=ImageStyleConfig)
    diagnosis: DiagnosisConfig = field(default_factory=DiagnosisConfig)
    interval_low: float = 0.5
    interval_high: float = 3.0
    noise_scale: float = 1.0          # global multiplier on all noise sigmas
    noise_family: str = "gaussian"    # or "uniform" (same variance)
    version: str = "1"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]

    @classmethod
    def from_dict(cls, obj: dict) -> "SimConfig":
        def build(tp, sub):
            known = {f.name for f in dataclasses.fields(tp)}
            unknown = set(sub) - known
            if unknown:
                raise errors.InvalidRange(
                    f"unknown config keys: {sorted(unknown)}")
            if "apoe_probs" in sub:
                sub = dict(sub, apoe_probs=tuple(sub["apoe_probs"]))
            return tp(**sub)

        kwargs = {}
        for name, tp in (("baseline", BaselineConfig),
                         ("transition", TransitionConfig),
                         ("style", ImageStyleConfig),
                         ("diagnosis", DiagnosisConfig)):
            if name in obj:
                kwargs[name] = build(tp, obj[name])
        for key in ("interval_low", "interval_high", "noise_scale",
                    "noise_family", "version"):
            if key in obj:
                kwargs[key] = obj[key]
        extra = set(obj) - {"baseline", "transition", "style", "diagnosis",
                            "interval_low", "interval_high", "noise_scale",
                            "noise_family", "version"}
        if extra:
            raise errors.InvalidRange(f"unknown config keys: {sorted(extra)}")
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path) -> "SimConfig":
        import yaml

        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def to_yaml(self, path) -> None:
        import yaml

        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)


@dataclass(frozen=True)
class GroundTruthScm:
    graph: CausalGraph = field(default_factory=preset_paper_graph)
    config: SimConfig = field(default_factory=SimConfig)


def _noise(rng, sigma, family):
    if sigma == 0:
        return 0.0
    if family == "uniform":
        half = sigma * math.sqrt(3.0)      # same variance as the gaussian
        return float(rng.uniform(-half, half))
    return float(rng.normal(0.0, sigma))


def transition_mean(scm: GroundTruthScm, var: Variable, prev: dict,
                    cur: dict, dt: float) -> float:
    """Noise-free transition for a time-varying variable.

    ``prev`` holds the full previous-session values; ``cur`` holds
    already-computed current-session values of lag-0 parents.
    """
    t = scm.config.transition
    V = Variable
    if var is V.ABETA:
        setpoint = (scm.config.baseline.abeta_base
                    + scm.config.baseline.abeta_age * (cur[V.AGE] - t.age_ref)
                    + scm.config.baseline.abeta_apoe * cur[V.APOE])
        return prev[V.ABETA] + t.abeta_revert * dt * (setpoint - prev[V.ABETA])
    if var is V.TAU:
        setpoint = (scm.config.baseline.tau_base
                    + scm.config.baseline.tau_age * (cur[V.AGE] - t.age_ref)
                    + scm.config.baseline.tau_apoe * cur[V.APOE])
        return prev[V.TAU] + t.tau_revert * dt * (setpoint - prev[V.TAU])
    if var is V.PTAU:
        setpoint = (scm.config.baseline.ptau_base
                    + scm.config.baseline.ptau_age * (cur[V.AGE] - t.age_ref)
                    + scm.config.baseline.ptau_apoe * cur[V.APOE])
        return prev[V.PTAU] + t.ptau_revert * dt * (setpoint - prev[V.PTAU])
    if var is V.TIV:
        setpoint = (scm.config.baseline.tiv_base
                    + scm.config.baseline.tiv_sex * cur[V.SEX]
                    + scm.config.baseline.tiv_age * (cur[V.AGE] - t.age_ref))
        return (prev[V.TIV]
                + t.tiv_revert * dt * (setpoint - prev[V.TIV])
                + dt * (t.tiv_abeta * (prev[V.ABETA] - t.abeta_ref)
                        + t.tiv_tau * (prev[V.TAU] - t.tau_ref)
                        + t.tiv_ptau * (prev[V.PTAU] - t.ptau_ref)))
    if var is V.GMV:
        drift = (t.gmv_drift
                 + t.gmv_abeta * (prev[V.ABETA] - t.abeta_ref)
                 + t.gmv_tau * (prev[V.TAU] - t.tau_ref)
                 + t.gmv_tau_quad * (prev[V.TAU] - t.tau_ref) ** 2
                 + t.gmv_ptau * (prev[V.PTAU] - t.ptau_ref))
        return (prev[V.GMV] + dt * drift
                + t.gmv_revert * dt * (t.gmv_tiv * cur[V.TIV] - prev[V.GMV]))
    if var is V.VV:
        setpoint = (scm.config.baseline.vv_base
                    + scm.config.baseline.vv_age * (cur[V.AGE] - t.age_ref)
                    + scm.config.baseline.vv_gmv * (cur[V.GMV] - t.gmv_ref)
                    + scm.config.baseline.vv_tiv * (cur[V.TIV] - t.tiv_ref))
        return prev[V.VV] + t.vv_revert * dt * (setpoint - prev[V.VV])
    raise errors.UnknownVariable(var.value)


_NOISE_SIGMAS = {
    Variable.ABETA: "abeta_sigma",
    Variable.TAU: "tau_sigma",
    Variable.PTAU: "ptau_sigma",
    Variable.TIV: "tiv_sigma",
    Variable.GMV: "gmv_sigma",
    Variable.VV: "vv_sigma",
}

#: evaluation order honoring lag-0 parents among time-varying variables
_STEP_ORDER = (Variable.ABETA, Variable.TAU, Variable.PTAU,
               Variable.TIV, Variable.GMV, Variable.VV)


def _baseline_values(cfg: BaselineConfig, rng, family: str,
                     noise_scale: float) -> dict:
    V = Variable
    nz = lambda s: _noise(rng, s * noise_scale, family)
    vals = {}
    vals[V.AGE] = float(rng.uniform(cfg.age_low, cfg.age_high))
    vals[V.SEX] = float(rng.random() < cfg.sex_p)
    vals[V.APOE] = float(rng.choice(3, p=np.array(cfg.apoe_probs)
                                    / sum(cfg.apoe_probs)))
    vals[V.EDUCATION] = cfg.edu_base + cfg.edu_sex * vals[V.SEX] + nz(cfg.edu_sigma)
    age_d = vals[V.AGE] - 70.0
    vals[V.ABETA] = max(cfg.abeta_base + cfg.abeta_age * age_d
                        + cfg.abeta_apoe * vals[V.APOE] + nz(cfg.abeta_sigma), 50.0)
    vals[V.TAU] = max(cfg.tau_base + cfg.tau_age * age_d
                      + cfg.tau_apoe * vals[V.APOE] + nz(cfg.tau_sigma), 20.0)
    vals[V.PTAU] = max(cfg.ptau_base + cfg.ptau_age * age_d
                       + cfg.ptau_apoe * vals[V.APOE] + nz(cfg.ptau_sigma), 2.0)
    vals[V.TIV] = max(cfg.tiv_base + cfg.tiv_sex * vals[V.SEX]
                      + cfg.tiv_age * age_d + nz(cfg.tiv_sigma), 900.0)
    vals[V.GMV] = max(cfg.gmv_tiv * vals[V.TIV]
                      + cfg.gmv_abeta * (vals[V.ABETA] - 1100.0)
                      + cfg.gmv_tau * (vals[V.TAU] - 200.0)
                      + cfg.gmv_ptau * (vals[V.PTAU] - 20.0)
                      + nz(cfg.gmv_sigma), 250.0)
    vals[V.VV] = max(cfg.vv_base + cfg.vv_age * age_d
                     + cfg.vv_gmv * (vals[V.GMV] - 600.0)
                     + cfg.vv_tiv * (vals[V.TIV] - 1500.0)
                     + nz(cfg.vv_sigma), 3.0)
    return vals


def advance(scm: GroundTruthScm, prev: dict, dt: float, rng=None) -> dict:
    """One ground-truth step; ``rng=None`` means noise-free."""
    V = Variable
    cfg = scm.config
    cur = {
        V.AGE: prev[V.AGE] + dt,
        V.SEX: prev[V.SEX],
        V.EDUCATION: prev[V.EDUCATION],
        V.APOE: prev[V.APOE],
    }
    for var in _STEP_ORDER:
        mean = transition_mean(scm, var, prev, cur, dt)
        sigma = getattr(cfg.transition, _NOISE_SIGMAS[var]) * cfg.noise_scale
        noise = _noise(rng, sigma, cfg.noise_family) * math.sqrt(dt) \
            if rng is not None else 0.0
        floor = {V.ABETA: 50.0, V.TAU: 20.0, V.PTAU: 2.0, V.TIV: 900.0,
                 V.GMV: 250.0, V.VV: 3.0}[var]
        cur[var] = max(mean + noise, floor)
    return cur


def _sample_style(cfg: ImageStyleConfig, rng) -> dict:
    return {
        "ratio": float(rng.uniform(cfg.ratio_low, cfg.ratio_high)),
        "vratio": float(rng.uniform(cfg.vratio_low, cfg.vratio_high)),
        "theta": float(rng.uniform(-cfg.theta_max, cfg.theta_max)),
        "dx": float(rng.uniform(-cfg.dx_max, cfg.dx_max)),
        "dy": float(rng.uniform(-cfg.dy_max, cfg.dy_max)),
        "eps": float(rng.uniform(0.0, cfg.eps_max)),
    }


def render_session_image(values: dict, style: dict,
                         config: phantom.PhantomConfig = phantom.DEFAULT_CONFIG):
    w = phantom.latent_from_volumes(values[Variable.TIV], values[Variable.VV],
                                    values[Variable.GMV], style, config)
    return phantom.render(w, config)


def simulate_cohort(scm: GroundTruthScm, n_subjects: int, sessions_range,
                    seed: int, images: bool = False,
                    phantom_config: phantom.PhantomConfig = phantom.DEFAULT_CONFIG
                    ) -> Cohort:
    """Sample a longitudinal cohort; deterministic given the seed.

    ``sessions_range`` is an inclusive (min, max) session-count range.
    """
    smin, smax = sessions_range
    if n_subjects < 1 or smin < 1 or smax < smin:
        raise errors.InvalidRange(
            f"bad n_subjects={n_subjects} or sessions_range={sessions_range}")
    cfg = scm.config
    seqs = np.random.SeedSequence(seed).spawn(n_subjects)
    subjects = {}
    for k in range(n_subjects):
        rng = np.random.default_rng(seqs[k])
        sid = f"s{k:04d}"
        n_sessions = int(rng.integers(smin, smax + 1))
        style = _sample_style(cfg.style, rng)
        vals = _baseline_values(cfg.baseline, rng, cfg.noise_family,
                                cfg.noise_scale)
        t = 0.0
        sessions = []
        for j in range(n_sessions):
            if j > 0:
                dt = float(rng.uniform(cfg.interval_low, cfg.interval_high))
                vals = advance(scm, vals, dt, rng)
                t += dt
            img = None
            if images:
                img = render_session_image(vals, style, phantom_config)
            sessions.append(Session(sid, t, dict(vals), image=img))
        subjects[sid] = sessions
    return Cohort(subjects=subjects)


def severity_score(cfg: DiagnosisConfig, values: dict) -> float:
    return (cfg.alpha * (values[Variable.TAU] - cfg.tau_mean) / cfg.tau_std
            - cfg.beta * (values[Variable.GMV] - cfg.gmv_mean) / cfg.gmv_std)


def assign_image_linked_labels(cohort: Cohort, scm: GroundTruthScm,
                               gamma: float = 2.0,
                               config=phantom.DEFAULT_CONFIG) -> dict:
    """(subject_id, time) -> DiagnosisLabel where the score mixes the
    tabular severity with an image-only style term (the ventricle offset
    recovered from the scan), so tabular features alone cannot separate
    the classes."""
    cfg = scm.config.diagnosis
    style_cfg = scm.config.style
    labels = {}
    for sid in cohort.subjects:
        for s in cohort.subjects[sid]:
            if s.image is None:
                raise errors.InvalidImage(f"session of {sid} has no image")
            w = phantom.encode(s.image, config)
            score = (severity_score(cfg, s.values)
                     + gamma * w.dx / style_cfg.dx_max)
            if score >= cfg.threshold_ad:
                y = DiagnosisLabel.AD
            elif score >= cfg.threshold_mci:
                y = DiagnosisLabel.MCI
            else:
                y = DiagnosisLabel.NC
            labels[(sid, s.time)] = y
    return labels


def assign_diagnosis(cohort: Cohort, scm: GroundTruthScm) -> dict:
    """(subject_id, time) -> DiagnosisLabel from thresholds on the
    tau/GMV severity score."""
    cfg = scm.config.diagnosis
    labels = {}
    for sid in cohort.subjects:
        if sid is None:
            raise errors.UnknownSubject(str(sid))
        for s in cohort.subjects[sid]:
            score = severity_score(cfg, s.values)
            if score >= cfg.threshold_ad:
                y = DiagnosisLabel.AD
            elif score >= cfg.threshold_mci:
                y = DiagnosisLabel.MCI
            else:
                y = DiagnosisLabel.NC
            labels[(sid, s.time)] = y
    return labels
