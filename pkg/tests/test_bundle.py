"""Model bundle persistence: lossless round trips and corruption checks."""
import json

import numpy as np
import pytest

from causynth import bundle as bundle_mod
from causynth import errors, inference, scmfit
from causynth.bundle import load_bundle, save_bundle
from causynth.variables import TABULAR, Variable


def _state(cohort):
    s = next(iter(cohort.subjects.values()))[0]
    return inference.State(values=dict(s.values), time=0.0)


def test_round_trip_preserves_predictions(tmp_path, full_bundle,
                                          small_cohort):
    path = tmp_path / "bundle"
    save_bundle(full_bundle, path)
    loaded = load_bundle(path)
    base = _state(small_cohort)
    a = inference.step(full_bundle.scm, base, 1.0)
    b = inference.step(loaded.scm, base, 1.0)
    for v in TABULAR:
        assert a.values[v] == b.values[v]
    rng = np.random.default_rng(0)
    w = (full_bundle.latent.latent_mean
         + rng.normal(size=12) * full_bundle.latent.latent_std)
    vols = np.abs(full_bundle.latent.vol_mean) + 10.0
    wa = full_bundle.latent.transition(w, vols, vols * 1.05)
    wb = loaded.latent.transition(w, vols, vols * 1.05)
    assert np.array_equal(wa.vector(), wb.vector())
    assert loaded.sim_config_hash == full_bundle.sim_config_hash


def test_save_is_deterministic(tmp_path, full_bundle):
    save_bundle(full_bundle, tmp_path / "a")
    save_bundle(full_bundle, tmp_path / "b")
    for name in (bundle_mod.MANIFEST_NAME, bundle_mod.BLOB_NAME):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_truncated_blob_rejected(tmp_path, full_bundle):
    path = tmp_path / "bundle"
    save_bundle(full_bundle, path)
    blob = path / bundle_mod.BLOB_NAME
    blob.write_bytes(blob.read_bytes()[:-16])
    with pytest.raises(errors.BundleCorrupt):
        load_bundle(path)


def test_corrupt_manifest_rejected(tmp_path, full_bundle):
    path = tmp_path / "bundle"
    save_bundle(full_bundle, path)
    (path / bundle_mod.MANIFEST_NAME).write_text("{not json")
    with pytest.raises(errors.BundleCorrupt):
        load_bundle(path)


def test_missing_files_rejected(tmp_path):
    with pytest.raises(errors.BundleCorrupt):
        load_bundle(tmp_path / "nothing")


def test_version_mismatch_rejected(tmp_path, full_bundle):
    path = tmp_path / "bundle"
    save_bundle(full_bundle, path)
    manifest = json.loads((path / bundle_mod.MANIFEST_NAME).read_text())
    manifest["format_version"] = "2.0"
    (path / bundle_mod.MANIFEST_NAME).write_text(json.dumps(manifest))
    with pytest.raises(errors.VersionMismatch):
        load_bundle(path)


def test_minor_version_accepted(tmp_path, full_bundle):
    path = tmp_path / "bundle"
    save_bundle(full_bundle, path)
    manifest = json.loads((path / bundle_mod.MANIFEST_NAME).read_text())
    major = manifest["format_version"].split(".")[0]
    manifest["format_version"] = f"{major}.9"
    (path / bundle_mod.MANIFEST_NAME).write_text(json.dumps(manifest))
    loaded = load_bundle(path)
    assert loaded.scm.form == full_bundle.scm.form


def test_bundle_without_optional_models(tmp_path, graph, linear_model,
                                        ground_truth):
    lean = bundle_mod.ModelBundle(
        graph=graph, scm=linear_model, latent=None, classifier=None,
        stats=linear_model.stats,
        sim_config_hash=ground_truth.config.hash())
    path = tmp_path / "lean"
    save_bundle(lean, path)
    loaded = load_bundle(path)
    assert loaded.latent is None and loaded.classifier is None
    eq = loaded.scm.equations[Variable.GMV]
    assert np.array_equal(eq.params,
                          linear_model.equations[Variable.GMV].params)
