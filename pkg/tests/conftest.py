"""Shared fixtures: one small imaged cohort and models trained on it.

Everything here is session-scoped and deterministic, so the expensive
training runs happen once per pytest invocation.
"""
import numpy as np
import pytest

from causynth import bundle as bundle_mod
from causynth import cohort as cohort_mod
from causynth import ism, metrics, scmfit, simulator


@pytest.fixture(scope="session")
def ground_truth():
    return simulator.GroundTruthScm()


@pytest.fixture(scope="session")
def graph(ground_truth):
    return ground_truth.graph


@pytest.fixture(scope="session")
def small_cohort(ground_truth):
    """60 subjects, no images: enough pairs for stable linear fits."""
    return simulator.simulate_cohort(ground_truth, 60, (2, 4), seed=7)


@pytest.fixture(scope="session")
def imaged_cohort(ground_truth):
    """40 subjects with rendered scans (rendering dominates the cost).
    Seed chosen so every diagnosis class has >= 20 sessions."""
    return simulator.simulate_cohort(ground_truth, 40, (2, 3), seed=14,
                                     images=True)


@pytest.fixture(scope="session")
def normalized_small(small_cohort):
    return cohort_mod.normalize(small_cohort)


@pytest.fixture(scope="session")
def linear_model(normalized_small, graph):
    normed, stats = normalized_small
    pairs = cohort_mod.make_pairs(normed)
    return scmfit.fit_all(pairs, graph, form="linear", stats=stats)


@pytest.fixture(scope="session")
def latent_model(imaged_cohort):
    """Short training run: enough for identity behaviour, not accuracy."""
    return ism.train_gw(imaged_cohort, epochs=300, seed=0)


@pytest.fixture(scope="session")
def labeled(imaged_cohort, ground_truth):
    labels = simulator.assign_image_linked_labels(imaged_cohort,
                                                  ground_truth)
    sessions = [s for s in imaged_cohort.sessions() if s.image is not None]
    y = np.array([int(labels[(s.subject_id, s.time)]) for s in sessions])
    return sessions, y


@pytest.fixture(scope="session")
def full_bundle(graph, linear_model, latent_model, ground_truth):
    return bundle_mod.ModelBundle(
        graph=graph, scm=linear_model, latent=latent_model, classifier=None,
        stats=linear_model.stats,
        sim_config_hash=ground_truth.config.hash())
