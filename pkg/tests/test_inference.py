"""Query engine: do-clamping, rollout composition, counterfactual deltas."""
import numpy as np
import pytest

from causynth import errors, inference
from causynth.inference import Intervention, Query, State, rollout, step
from causynth.variables import TABULAR, Variable


def _baseline_state(cohort):
    s = next(iter(cohort.subjects.values()))[0]
    return State(values=dict(s.values), time=0.0)


def test_state_requires_all_variables():
    with pytest.raises(errors.UnknownVariable):
        State(values={Variable.AGE: 70.0})


def test_intervention_never_targets_image():
    with pytest.raises(errors.UnknownVariable):
        Intervention(Variable.IMAGE, 1.0)


def test_query_validates_ranges(small_cohort):
    base = _baseline_state(small_cohort)
    with pytest.raises(errors.InvalidRange):
        Query(base, horizon=0)
    with pytest.raises(errors.InvalidRange):
        Query(base, step_dt=0.0)
    with pytest.raises(errors.InvalidRange):
        step(None, base, dt=-1.0)


def test_do_clamps_target_exactly(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    out = step(linear_model, base, 1.0,
               [Intervention(Variable.ABETA, 123.456)])
    assert out.values[Variable.ABETA] == 123.456


def test_do_at_factual_value_changes_nothing(linear_model, small_cohort):
    """Clamping a variable to the value it would keep anyway is a no-op
    for the clamped variable's lag-1 influence on the others."""
    base = _baseline_state(small_cohort)
    plain = step(linear_model, base, 1.0)
    sex = base.values[Variable.SEX]
    clamped = step(linear_model, base, 1.0, [Intervention(Variable.SEX, sex)])
    for v in TABULAR:
        if v is Variable.SEX:
            assert clamped.values[v] == sex
        else:
            assert clamped.values[v] == pytest.approx(plain.values[v],
                                                      abs=1e-12)


def test_step_advances_age_and_keeps_constants(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    out = step(linear_model, base, 1.5)
    assert out.values[Variable.AGE] == pytest.approx(
        base.values[Variable.AGE] + 1.5)
    for v in (Variable.SEX, Variable.EDUCATION, Variable.APOE):
        assert out.values[v] == base.values[v]
    assert out.time == pytest.approx(base.time + 1.5)


def test_rollout_composes_single_steps(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    traj = rollout(linear_model, Query(base, horizon=2, step_dt=1.0))
    assert len(traj) == 3
    assert traj[0] is base
    manual = step(linear_model, base, 1.0)
    assert traj[1].values == manual.values
    manual2 = step(linear_model, manual, 1.0)
    for v in TABULAR:
        assert traj[2].values[v] == pytest.approx(manual2.values[v])


def test_one_shot_vs_persistent_intervention(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    iv_once = Intervention(Variable.ABETA, 500.0, step=0, persistent=False)
    iv_hold = Intervention(Variable.ABETA, 500.0, step=0, persistent=True)
    once = rollout(linear_model, Query(base, (iv_once,), horizon=3))
    hold = rollout(linear_model, Query(base, (iv_hold,), horizon=3))
    assert once[1].values[Variable.ABETA] == 500.0
    assert hold[1].values[Variable.ABETA] == 500.0
    assert hold[3].values[Variable.ABETA] == 500.0
    assert once[3].values[Variable.ABETA] != 500.0
    # identical while the clamp is identical, diverging afterwards
    assert once[1].values == hold[1].values
    assert once[3].values[Variable.GMV] != hold[3].values[Variable.GMV]


def test_later_step_intervention_applies_late(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    iv = Intervention(Variable.TAU, 900.0, step=1)
    traj = rollout(linear_model, Query(base, (iv,), horizon=2))
    plain = rollout(linear_model, Query(base, horizon=2))
    assert traj[1].values == plain[1].values
    assert traj[2].values[Variable.TAU] == 900.0


def test_counterfactual_delta_zero_at_factual_value(linear_model,
                                                    small_cohort):
    base = _baseline_state(small_cohort)
    factual_abeta = base.values[Variable.ABETA]
    f, c, d = inference.counterfactual_delta(
        linear_model, base, Intervention(Variable.ABETA, factual_abeta),
        Variable.GMV)
    assert d == pytest.approx(0.0, abs=1e-9)
    assert f == pytest.approx(c)


def test_counterfactual_target_cannot_be_intervention(linear_model,
                                                      small_cohort):
    base = _baseline_state(small_cohort)
    with pytest.raises(errors.UnknownVariable):
        inference.counterfactual_delta(
            linear_model, base, Intervention(Variable.ABETA, 100.0),
            Variable.ABETA)


def test_rollout_is_deterministic(linear_model, small_cohort):
    base = _baseline_state(small_cohort)
    q = Query(base, (Intervention(Variable.ABETA, 300.0),), horizon=3)
    a = rollout(linear_model, q)
    b = rollout(linear_model, q)
    for sa, sb in zip(a, b):
        assert sa.values == sb.values


def test_rollout_chains_images(imaged_cohort, linear_model, latent_model):
    s = next(iter(imaged_cohort.subjects.values()))[0]
    base = State(values=dict(s.values), time=0.0, image=s.image)
    traj = rollout(linear_model, Query(base, horizon=2),
                   latent_model=latent_model)
    assert all(st.image is not None for st in traj)
    assert traj[1].image is not traj[0].image
