"""Latent transition training and volume-conditioned image synthesis."""
import numpy as np
import pytest

from causynth import errors, ism, phantom
from causynth.cohort import Cohort
from causynth.phantom import DEFAULT_CONFIG
from causynth.variables import Variable


def _first_imaged(cohort):
    for sessions in cohort.subjects.values():
        for s in sessions:
            if s.image is not None:
                return s
    raise AssertionError("no imaged session")


def test_training_is_deterministic(imaged_cohort):
    a = ism.train_gw(imaged_cohort, epochs=5, seed=0)
    b = ism.train_gw(imaged_cohort, epochs=5, seed=0)
    assert np.array_equal(a.params, b.params)
    assert np.array_equal(a.latent_mean, b.latent_mean)


def test_too_few_imaged_subjects(imaged_cohort):
    few = dict(list(imaged_cohort.subjects.items())[:5])
    with pytest.raises(errors.TooFewPairs):
        ism.train_gw(Cohort(subjects=few), epochs=1)


def test_unchanged_volumes_reproduce_image(imaged_cohort, latent_model):
    """With identical start/end volumes the synthesized scan matches the
    input almost pixel for pixel (the anchor rows pin this case)."""
    worst = 0.0
    for sessions in list(imaged_cohort.subjects.values())[:10]:
        s = sessions[0]
        v = ism._session_volumes(s)
        out = ism.synthesize(s.image, v, v, latent_model)
        worst = max(worst, float(np.mean(np.abs(out.pixels - s.image.pixels))))
    assert worst < 0.01


def test_synthesis_tracks_requested_volume_change(imaged_cohort,
                                                  latent_model):
    s = _first_imaged(imaged_cohort)
    v = ism._session_volumes(s)
    target = v.copy()
    target[1] *= 1.10                      # +10% ventricular volume
    out = ism.synthesize(s.image, v, target, latent_model)
    _, vv, _ = phantom.segment_volumes(out)
    assert abs(vv - target[1]) < 0.10 * target[1]
    assert abs(vv - target[1]) < abs(vv - v[1] * 0.98)  # moved toward target


def test_synthesize_rejects_nonpositive_volumes(imaged_cohort, latent_model):
    s = _first_imaged(imaged_cohort)
    v = ism._session_volumes(s)
    bad = v.copy()
    bad[2] = 0.0
    with pytest.raises(errors.InvalidLatent):
        ism.synthesize(s.image, v, bad, latent_model)


def test_synthesize_propagates_encoder_failure(latent_model):
    blank = phantom.PhantomImage(
        pixels=np.zeros((DEFAULT_CONFIG.resolution,
                         DEFAULT_CONFIG.resolution)))
    with pytest.raises(errors.InvalidImage):
        ism.synthesize(blank, [1000.0, 60.0, 400.0],
                       [1000.0, 60.0, 400.0], latent_model)


def test_predicted_latent_is_always_renderable(imaged_cohort, latent_model):
    """Even for extreme requested volumes the projected latent renders."""
    s = _first_imaged(imaged_cohort)
    v = ism._session_volumes(s)
    for factor in (0.5, 0.9, 1.1, 2.0):
        out = ism.synthesize(s.image, v, v * factor, latent_model)
        assert out.pixels.shape == s.image.pixels.shape
        assert np.all(np.isfinite(out.pixels))


def test_difference_map_zero_and_signed(imaged_cohort):
    s = _first_imaged(imaged_cohort)
    d0 = ism.difference_map(s.image, s.image)
    assert np.all(d0 == 0.0)
    brighter = phantom.PhantomImage(
        pixels=np.clip(s.image.pixels + 0.25, 0.0, 1.0))
    d = ism.difference_map(brighter, s.image)
    assert d.min() >= -1.0 and d.max() <= 1.0
    assert d.max() > 0.2 and d.min() >= 0.0


def test_transition_output_respects_latent_bounds(latent_model):
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = latent_model.latent_mean + rng.normal(
            size=12) * latent_model.latent_std
        v = np.abs(latent_model.vol_mean
                   + rng.normal(size=3) * latent_model.vol_std) + 1.0
        out = latent_model.transition(w, v, v * 1.05)
        phantom.validate_latent(out)   # raises if outside the valid range
