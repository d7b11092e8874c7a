"""Persistence for the full set of fitted models.

A bundle is a directory with two files:

* ``manifest.json`` — everything human-readable: format version, the
  causal graph, per-equation layout (target, parent list, functional
  form, hidden widths, noise scale), latent-transition and classifier
  layouts, normalization statistics, the hash of the simulator config
  the models were fitted on, and byte offsets into the blob.
* ``params.bin`` — one flat blob of little-endian 64-bit floats holding
  every learned parameter vector, concatenated in manifest order:
  first each structural equation (targets sorted by variable index),
  then the latent-transition network, then the classifier weight matrix
  flattened row-major.

Loading rebuilds the exact in-memory model objects; a save/load round
trip reproduces identical predictions bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import errors, ism, metrics, scmfit
from .cohort import NormStats
from .graph import CausalGraph
from .phantom import PhantomConfig
from .variables import Variable

FORMAT_VERSION = "1.0"
MANIFEST_NAME = "manifest.json"
BLOB_NAME = "params.bin"
BLOB_DTYPE = "<f8"


@dataclass(frozen=True)
class ModelBundle:
    graph: CausalGraph
    scm: scmfit.StructuralModel
    latent: ism.LatentTransitionModel | None
    classifier: metrics.ClassifierModel | None
    stats: NormStats
    sim_config_hash: str
    version: str = FORMAT_VERSION


def _check(bundle: ModelBundle) -> None:
    if not bundle.version:
        raise errors.VersionMismatch("empty format version")
    if tuple(bundle.graph.nodes) != tuple(bundle.scm.graph.nodes):
        raise errors.BundleCorrupt("graph and structural model disagree "
                                   "on the variable set")
    if bundle.scm.stats != bundle.stats:
        raise errors.BundleCorrupt("structural model was fitted under "
                                   "different normalization statistics")


def _manifest(bundle: ModelBundle):
    """Build the manifest dict and the list of parameter vectors."""
    blobs = []
    offset = 0

    def push(vec):
        nonlocal offset
        vec = np.asarray(vec, dtype=float).ravel()
        entry = {"offset": offset, "size": int(vec.size)}
        blobs.append(vec)
        offset += vec.size
        return entry

    eqs = []
    for target in sorted(bundle.scm.equations, key=lambda v: v.index):
        eq = bundle.scm.equations[target]
        eqs.append({
            "target": target.value,
            "parents": [[v.value, lag] for v, lag in eq.parents],
            "form": eq.form,
            "hidden": list(eq.hidden),
            "noise_sigma": eq.noise_sigma,
            "params": push(eq.params),
        })

    lat = None
    if bundle.latent is not None:
        m = bundle.latent
        lat = {
            "params": push(m.params),
            "latent_mean": list(m.latent_mean),
            "latent_std": list(m.latent_std),
            "vol_mean": list(m.vol_mean),
            "vol_std": list(m.vol_std),
            "hyper": dict(m.hyper),
            "phantom_config": {
                "resolution": m.config.resolution,
                "supersample": m.config.supersample,
                "scale_ml_per_px2": m.config.scale_ml_per_px2,
                "i_gm": m.config.i_gm,
                "i_wm": m.config.i_wm,
                "i_csf": m.config.i_csf,
                "band_halfwidth": m.config.band_halfwidth,
            },
        }

    clf = None
    if bundle.classifier is not None:
        c = bundle.classifier
        clf = {
            "weights": push(c.weights),
            "shape": list(c.weights.shape),
            "feature_mean": list(c.feature_mean),
            "feature_std": list(c.feature_std),
            "with_image": c.with_image,
        }

    manifest = {
        "format_version": bundle.version,
        "sim_config_hash": bundle.sim_config_hash,
        "graph": bundle.graph.to_json(),
        "norm_stats": bundle.stats.to_json(),
        "structural_model": {
            "form": bundle.scm.form,
            "variant": bundle.scm.variant,
            "equations": eqs,
        },
        "latent_transition": lat,
        "classifier": clf,
        "blob": {"dtype": BLOB_DTYPE, "total": offset, "file": BLOB_NAME},
    }
    return manifest, blobs


def save_bundle(bundle: ModelBundle, path) -> None:
    _check(bundle)
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest, blobs = _manifest(bundle)
    blob = (np.concatenate(blobs) if blobs
            else np.zeros(0)).astype(BLOB_DTYPE)
    (path / BLOB_NAME).write_bytes(blob.tobytes())
    (path / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _slice(blob, entry, name):
    lo, size = entry["offset"], entry["size"]
    if lo + size > blob.size:
        raise errors.BundleCorrupt(
            f"{name}: blob ends at {blob.size}, need {lo + size}")
    return blob[lo:lo + size].copy()


def load_bundle(path) -> ModelBundle:
    path = Path(path)
    mpath = path / MANIFEST_NAME
    if not mpath.exists():
        raise errors.BundleCorrupt(f"missing {mpath}")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        raise errors.BundleCorrupt(f"manifest is not valid JSON: {exc}")
    version = manifest.get("format_version")
    major = str(version).split(".")[0]
    if major != FORMAT_VERSION.split(".")[0]:
        raise errors.VersionMismatch(
            f"bundle format {version!r}, reader supports {FORMAT_VERSION}")
    blob = np.frombuffer((path / BLOB_NAME).read_bytes(),
                         dtype=manifest["blob"]["dtype"])
    if blob.size != manifest["blob"]["total"]:
        raise errors.BundleCorrupt(
            f"blob holds {blob.size} values, manifest says "
            f"{manifest['blob']['total']}")

    graph = CausalGraph.from_json(manifest["graph"])
    stats = NormStats.from_json(manifest["norm_stats"])

    sm = manifest["structural_model"]
    equations = {}
    for item in sm["equations"]:
        target = Variable(item["target"])
        equations[target] = scmfit.StructuralEquation(
            target=target,
            parents=tuple((Variable(v), lag) for v, lag in item["parents"]),
            form=item["form"],
            params=_slice(blob, item["params"], item["target"]),
            noise_sigma=item["noise_sigma"],
            hidden=tuple(item["hidden"]),
        )
    scm = scmfit.StructuralModel(equations=equations, graph=graph,
                                 form=sm["form"], variant=sm["variant"],
                                 stats=stats)

    latent = None
    if manifest.get("latent_transition") is not None:
        lat = manifest["latent_transition"]
        latent = ism.LatentTransitionModel(
            params=_slice(blob, lat["params"], "latent_transition"),
            latent_mean=np.array(lat["latent_mean"]),
            latent_std=np.array(lat["latent_std"]),
            vol_mean=np.array(lat["vol_mean"]),
            vol_std=np.array(lat["vol_std"]),
            hyper=dict(lat["hyper"]),
            config=PhantomConfig(**lat["phantom_config"]),
        )

    classifier = None
    if manifest.get("classifier") is not None:
        clf = manifest["classifier"]
        classifier = metrics.ClassifierModel(
            weights=_slice(blob, clf["weights"],
                           "classifier").reshape(clf["shape"]),
            feature_mean=np.array(clf["feature_mean"]),
            feature_std=np.array(clf["feature_std"]),
            with_image=clf["with_image"],
        )

    bundle = ModelBundle(graph=graph, scm=scm, latent=latent,
                         classifier=classifier, stats=stats,
                         sim_config_hash=manifest["sim_config_hash"],
                         version=str(version))
    _check(bundle)
    return bundle
