import dataclasses

import numpy as np
import pytest

from causynth import simulator
from causynth.graph import Edge
from causynth.simulator import (DiagnosisLabel, GroundTruthScm, SimConfig,
                                preset_paper_graph, simulate_cohort,
                                transition_mean)
from causynth.variables import CONSTANT, DYNAMIC, TABULAR, Variable, check_domain
from causynth import errors


def test_preset_graph_25_edges():
    g = preset_paper_graph()
    assert len(g.edges) == 25


def test_preset_graph_known_edge_and_hierarchy():
    g = preset_paper_graph()
    assert g.has_edge(Variable.ABETA, Variable.GMV, 1)
    assert not any(e.dst is Variable.SEX for e in g.edges)
    # volumes never cause biomarkers
    assert not any(e.src.group.value == "volume"
                   and e.dst.group.value == "biomarker" for e in g.edges)


def test_dynamic_variables_have_self_lag():
    g = preset_paper_graph()
    for v in DYNAMIC:
        assert g.has_edge(v, v, 1)


def test_seed_determinism(ground_truth):
    a = simulate_cohort(ground_truth, 10, (2, 3), seed=4)
    b = simulate_cohort(ground_truth, 10, (2, 3), seed=4)
    for sa, sb in zip(a.sessions(), b.sessions()):
        assert sa.values == sb.values and sa.time == sb.time


def test_zero_noise_zero_drift_fixed_point():
    cfg = SimConfig(noise_scale=0.0)
    # zeroing every reversion/drift/cross coefficient makes each
    # mechanism the identity map
    zero = ("abeta_revert", "tau_revert", "ptau_revert", "tiv_revert",
            "tiv_abeta", "tiv_tau", "tiv_ptau", "gmv_drift", "gmv_abeta",
            "gmv_tau", "gmv_tau_quad", "gmv_ptau", "gmv_revert",
            "vv_revert")
    frozen = dataclasses.replace(cfg.transition, **{k: 0.0 for k in zero})
    scm = GroundTruthScm(config=dataclasses.replace(cfg, transition=frozen))
    c = simulate_cohort(scm, 5, (3, 3), seed=0)
    for sid, sessions in c.subjects.items():
        base = sessions[0]
        for s in sessions[1:]:
            assert s.values[Variable.AGE] == pytest.approx(
                base.values[Variable.AGE] + s.time)
            for v in TABULAR:
                if v is Variable.AGE:
                    continue
                assert s.values[v] == pytest.approx(base.values[v])


def test_constants_and_domains(small_cohort):
    for sid, sessions in small_cohort.subjects.items():
        base = sessions[0]
        for s in sessions:
            for v in CONSTANT:
                assert s.values[v] == base.values[v]
            for v in TABULAR:
                check_domain(v, s.values[v])  # must not raise


def test_transition_mean_oracle(ground_truth):
    """Advancing with zero noise must equal the closed-form mechanism."""
    c = simulate_cohort(ground_truth, 5, (2, 2), seed=9)
    for sid, sessions in c.subjects.items():
        prev, cur = sessions
        dt = cur.time - prev.time
        mean = simulator.advance(ground_truth, prev.values, dt, rng=None)
        for v in DYNAMIC:
            expect = transition_mean(ground_truth, v, prev.values, mean, dt)
            assert mean[v] == pytest.approx(expect, rel=1e-9)


def test_invalid_ranges_rejected(ground_truth):
    with pytest.raises(errors.InvalidRange):
        simulate_cohort(ground_truth, 0, (2, 3), seed=1)
    with pytest.raises(errors.InvalidRange):
        simulate_cohort(ground_truth, 5, (3, 2), seed=1)


def test_diagnosis_deterministic_and_thresholded(ground_truth, small_cohort):
    labels = simulator.assign_diagnosis(small_cohort, ground_truth)
    again = simulator.assign_diagnosis(small_cohort, ground_truth)
    assert labels == again
    cfg = ground_truth.config.diagnosis
    for sid, sessions in small_cohort.subjects.items():
        for s in sessions:
            score = simulator.severity_score(cfg, s.values)
            y = labels[(sid, s.time)]
            if score < cfg.threshold_mci:
                assert y == DiagnosisLabel.NC
            elif score < cfg.threshold_ad:
                assert y == DiagnosisLabel.MCI
            else:
                assert y == DiagnosisLabel.AD


def test_diagnosis_golden_counts(ground_truth):
    """Frozen label distribution: default config, 500 subjects, seed 3."""
    c = simulate_cohort(ground_truth, 500, (2, 4), seed=3)
    labels = simulator.assign_diagnosis(c, ground_truth)
    counts = np.bincount([int(v) for v in labels.values()], minlength=3)
    assert counts.tolist() == [682, 384, 437]


def test_config_yaml_roundtrip(tmp_path):
    cfg = SimConfig(noise_scale=0.7)
    p = tmp_path / "cfg.yaml"
    cfg.to_yaml(p)
    assert SimConfig.from_yaml(p) == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(errors.InvalidRange):
        SimConfig.from_dict({"nope": 1})
    with pytest.raises(errors.InvalidRange):
        SimConfig.from_dict({"transition": {"bogus_coef": 1.0}})
