"""Command-line pipeline: simulate, discover, fit, train-ism, eval, infer, serve.

Every subcommand reads a single YAML run config (unknown keys rejected)
plus a few path flags, writes its artifacts into an output directory,
and exits 0 on success.  Usage errors exit 2; data errors exit 1 after
printing one machine-readable JSON line on stderr.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import (bundle as bundle_mod, cohort as cohort_mod, discovery, errors,
               inference, ism, metrics, phantom, scmfit, simulator)
from .variables import CSV_COLUMNS, DYNAMIC, TABULAR, Variable

COHORT_CSV = "cohort.csv"
IMAGES_DIR = "images"
LABELS_CSV = "labels.csv"
SIM_HASH_FILE = "sim_hash.txt"
GRAPH_JSON = "graph.json"


# --- run config -----------------------------------------------------------

def _strict(tp, obj, section):
    known = {f.name for f in dataclasses.fields(tp)}
    unknown = set(obj) - known
    if unknown:
        raise errors.UnknownConfigKey(
            f"unknown keys in '{section}': {sorted(unknown)}")
    return tp(**obj)


@dataclass(frozen=True)
class SimulateSection:
    n_subjects: int = 120
    sessions_min: int = 2
    sessions_max: int = 5
    images: bool = True
    overrides: dict = field(default_factory=dict)   # simulator config keys


@dataclass(frozen=True)
class DiscoverSection:
    alpha: float = 0.05
    vote_threshold: int = 2


@dataclass(frozen=True)
class FitSection:
    form: str = "mlp"
    variant: str = "causal"
    epochs: int = scmfit.MLP_EPOCHS
    lr: float = scmfit.MLP_LR
    weight_decay: float = scmfit.MLP_WEIGHT_DECAY


@dataclass(frozen=True)
class IsmSection:
    epochs: int = 2000
    lr: float = 0.001
    mode: str = "all"


@dataclass(frozen=True)
class ClassifierSection:
    epochs: int = 3000
    lr: float = 0.05
    gamma: float = 2.0


@dataclass(frozen=True)
class EvalSection:
    horizon: int = 3
    max_subjects: int = 50
    desired: tuple = metrics.DESIRED_GRID


@dataclass(frozen=True)
class RunConfig:
    seed: int = 41
    simulate: SimulateSection = field(default_factory=SimulateSection)
    discover: DiscoverSection = field(default_factory=DiscoverSection)
    fit: FitSection = field(default_factory=FitSection)
    ism: IsmSection = field(default_factory=IsmSection)
    classifier: ClassifierSection = field(default_factory=ClassifierSection)
    eval: EvalSection = field(default_factory=EvalSection)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        obj = dict(obj or {})
        sections = {"simulate": SimulateSection, "discover": DiscoverSection,
                    "fit": FitSection, "ism": IsmSection,
                    "classifier": ClassifierSection, "eval": EvalSection}
        kwargs = {}
        for name, tp in sections.items():
            if name in obj:
                sub = obj.pop(name)
                if name == "eval" and "desired" in sub:
                    sub = dict(sub, desired=tuple(sub["desired"]))
                kwargs[name] = _strict(tp, sub, name)
        if "seed" in obj:
            kwargs["seed"] = obj.pop("seed")
        if obj:
            raise errors.UnknownConfigKey(
                f"unknown top-level keys: {sorted(obj)}")
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        import yaml

        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def sim_config(self) -> simulator.SimConfig:
        return simulator.SimConfig.from_dict(self.simulate.overrides)


# --- shared data-dir helpers ----------------------------------------------

def load_data_dir(data_dir, with_images=True):
    """Cohort from a simulate output directory; PNGs rehydrated."""
    data_dir = Path(data_dir)
    cohort = cohort_mod.load_cohort(data_dir / COHORT_CSV)
    if not with_images:
        return cohort
    for s in cohort.sessions():
        if s.image_path and s.image is None:
            img = phantom.load_png(data_dir / s.image_path)
            object.__setattr__(s, "image", img)
    return cohort


def load_labels(data_dir) -> dict:
    path = Path(data_dir) / LABELS_CSV
    if not path.exists():
        return {}
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            labels[(row["subject_id"], float(row["time_years"]))] = int(
                row["label"])
    return labels


def _write_labels(labels: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id", "time_years", "label"])
        for (sid, t), y in sorted(labels.items()):
            w.writerow([sid, repr(float(t)), int(y)])


# --- pipeline steps (importable, CLI-independent) -------------------------

def run_simulate(cfg: RunConfig, out_dir) -> cohort_mod.Cohort:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sim_cfg = cfg.sim_config()
    scm = simulator.GroundTruthScm(config=sim_cfg)
    sec = cfg.simulate
    cohort = simulator.simulate_cohort(
        scm, sec.n_subjects, (sec.sessions_min, sec.sessions_max),
        seed=cfg.seed, images=sec.images)
    cohort_mod.save_cohort(cohort, out_dir / COHORT_CSV,
                           image_dir=str(out_dir / IMAGES_DIR)
                           if sec.images else None)
    if sec.images:
        labels = simulator.assign_image_linked_labels(
            cohort, scm, gamma=cfg.classifier.gamma)
        _write_labels(labels, out_dir / LABELS_CSV)
    sim_cfg.to_yaml(out_dir / "sim_config.yaml")
    (out_dir / SIM_HASH_FILE).write_text(sim_cfg.hash() + "\n")
    return cohort


def run_discover(cfg: RunConfig, cohort) -> tuple:
    """Consensus graph of the three searches plus per-edge validation."""
    norm, _ = cohort_mod.normalize(cohort)
    pairs = cohort_mod.make_pairs(norm)
    data = discovery.PairsData.from_pairs(pairs)
    mask = discovery.build_candidate_mask()
    sec = cfg.discover
    graphs = [discovery.discover_constraint(data, mask, alpha=sec.alpha),
              discovery.discover_score(data, mask),
              discovery.discover_lingam(data, mask, alpha=sec.alpha)]
    voted = discovery.vote(graphs, threshold=sec.vote_threshold,
                           forced=mask.forced)
    checks = discovery.validate_edges(voted, data, alpha=sec.alpha)
    for chk in checks:
        if not chk.passed:
            voted.remove(chk.edge)
    return voted, checks


def run_fit(cfg: RunConfig, cohort, graph) -> scmfit.StructuralModel:
    norm, stats = cohort_mod.normalize(cohort)
    pairs = cohort_mod.make_pairs(norm)
    sec = cfg.fit
    hyper = {}
    if sec.form == "mlp":
        hyper = dict(epochs=sec.epochs, lr=sec.lr,
                     weight_decay=sec.weight_decay)
    return scmfit.fit_all(pairs, graph, form=sec.form, variant=sec.variant,
                          stats=stats, seed=cfg.seed, **hyper)


def run_train_ism(cfg: RunConfig, cohort) -> ism.LatentTransitionModel:
    sec = cfg.ism
    return ism.train_gw(cohort, epochs=sec.epochs, lr=sec.lr,
                        seed=cfg.seed, mode=sec.mode)


def run_train_classifier(cfg: RunConfig, cohort, labels: dict):
    sessions = [s for s in cohort.sessions() if s.image is not None]
    y = [labels[(s.subject_id, s.time)] for s in sessions]
    return metrics.train_classifier(sessions, y, with_image=True,
                                    epochs=cfg.classifier.epochs,
                                    lr=cfg.classifier.lr, seed=cfg.seed)


def run_eval(cfg: RunConfig, model: bundle_mod.ModelBundle, cohort,
             labels: dict, out_dir) -> list:
    """All metric reports on a held-out cohort; CSV/JSON artifacts are
    byte-deterministic for a fixed config and seed."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []

    pairs = cohort_mod.make_pairs(cohort)
    values = {}
    for v in DYNAMIC:
        eq = model.scm.equations[v]
        truth, pred = [], []
        for p in pairs:
            pv = [model.stats.transform(
                q, (p.earlier if lag == 1 else p.later).values[q])
                for q, lag in eq.parents]
            pred.append(model.stats.inverse(
                v, scmfit.predict(eq, pv, p.delta_t)))
            truth.append(p.later.values[v])
        values[f"{v.value}.nmae"] = metrics.nmae(truth, pred)
    reports.append(metrics.MetricReport(
        "one_step_nmae", values, len(pairs),
        metrics.config_hash({"form": model.scm.form,
                             "variant": model.scm.variant})))

    if model.latent is not None:
        rep, _, _ = metrics.volume_intervention_eval(
            model.latent, cohort, desired=tuple(cfg.eval.desired),
            max_subjects=cfg.eval.max_subjects,
            ba_csv_path=out_dir / "volume_intervention.csv")
        reports.append(rep)

    if model.classifier is not None and labels:
        sessions = [s for s in cohort.sessions() if s.image is not None]
        truth = np.array([labels[(s.subject_id, s.time)] for s in sessions])
        probs = np.array([metrics.classify(model.classifier, s)
                          for s in sessions])
        reports.append(metrics.MetricReport(
            "classification", metrics.classification_metrics(truth, probs),
            len(sessions), metrics.config_hash({"with_image": True})))

    with open(out_dir / "metrics.csv", "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["report", "metric", "value", "count"])
        for rep in reports:
            for key in sorted(rep.values):
                w.writerow([rep.name, key, repr(float(rep.values[key])),
                            rep.count])
    (out_dir / "metrics.json").write_text(json.dumps(
        [rep.to_json() for rep in reports], indent=2, sort_keys=True) + "\n")
    return reports


def run_infer(model: bundle_mod.ModelBundle, query: inference.Query,
              out_dir) -> list:
    """Rollout a query; trajectory CSV plus one PNG per synthesized image.

    When the bundle carries a latent model and the query has no image,
    a neutral upright phantom is solved from the baseline volumes so the
    trajectory comes with synthesized scans.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if model.latent is not None and query.baseline.image is None:
        from .server import NEUTRAL_STYLE

        base = query.baseline
        w = phantom.latent_from_volumes(
            base.values[Variable.TIV], base.values[Variable.VV],
            base.values[Variable.GMV], NEUTRAL_STYLE, model.latent.config)
        base = dataclasses.replace(base,
                                   image=phantom.render(w,
                                                        model.latent.config))
        query = dataclasses.replace(query, baseline=base)
    states = inference.rollout(model.scm, query, latent_model=model.latent)
    with open(out_dir / "trajectory.csv", "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "time_years"] + [CSV_COLUMNS[v] for v in TABULAR]
                   + ["image"])
        for k, st in enumerate(states):
            name = ""
            if st.image is not None:
                name = f"step_{k}.png"
                phantom.save_png(st.image, out_dir / name)
            w.writerow([k, repr(float(st.time))]
                       + [repr(float(st.values[v])) for v in TABULAR]
                       + [name])
    return states


def parse_query(obj: dict) -> inference.Query:
    """Query from its JSON form (the same shape the HTTP API accepts)."""
    try:
        base = inference.State(
            values={Variable(k): float(v)
                    for k, v in obj["baseline"].items()},
            time=float(obj.get("time", 0.0)))
        ivs = tuple(inference.Intervention(
            target=Variable(iv["target"]), value=float(iv["value"]),
            step=int(iv.get("step", 0)),
            persistent=bool(iv.get("persistent", False)))
            for iv in obj.get("interventions", ()))
        return inference.Query(baseline=base, interventions=ivs,
                               horizon=int(obj.get("horizon", 1)),
                               step_dt=float(obj.get("step_dt", 1.0)))
    except (KeyError, ValueError, TypeError) as exc:
        raise errors.UnknownVariable(f"malformed query: {exc}")


# --- click wiring ----------------------------------------------------------

def _run(fn):
    """Trap pipeline errors into exit 1 with one JSON line on stderr."""
    try:
        fn()
    except errors.CausynthError as exc:
        line = json.dumps({"error": type(exc).__name__, "detail": str(exc)})
        click.echo(f"ERROR {line}", err=True)
        sys.exit(1)


def _load_config(path) -> RunConfig:
    return RunConfig.from_yaml(path) if path else RunConfig()


_config_opt = click.option("--config", "config_path", default=None,
                           type=click.Path(exists=True),
                           help="YAML run config (defaults used if omitted)")


@click.group()
def cli():
    """Causal longitudinal cohort pipeline."""


@cli.command()
@_config_opt
@click.option("--out", "out_dir", required=True, type=click.Path())
def simulate(config_path, out_dir):
    """Sample a synthetic cohort and write CSV + images + labels."""
    def go():
        cfg = _load_config(config_path)
        cohort = run_simulate(cfg, out_dir)
        click.echo(f"wrote {cohort.n_sessions} sessions of "
                   f"{cohort.n_subjects} subjects to {out_dir}")
    _run(go)


@cli.command()
@_config_opt
@click.option("--data", "data_dir", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
def discover(config_path, data_dir, out_path):
    """Run the three structure searches, vote, validate, write graph JSON."""
    def go():
        cfg = _load_config(config_path)
        cohort = load_data_dir(data_dir, with_images=False)
        graph, checks = run_discover(cfg, cohort)
        path = Path(out_path or Path(data_dir) / GRAPH_JSON)
        path.write_text(graph.to_json_str() + "\n")
        n_fail = sum(not c.passed for c in checks)
        click.echo(f"wrote {len(graph.edges)} edges to {path} "
                   f"({n_fail} candidate(s) rejected by validation)")
    _run(go)


@cli.command()
@_config_opt
@click.option("--data", "data_dir", required=True,
              type=click.Path(exists=True))
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "bundle_dir", required=True, type=click.Path())
def fit(config_path, data_dir, graph_path, bundle_dir):
    """Fit structural equations (and the classifier when labels exist)."""
    def go():
        from .graph import CausalGraph

        cfg = _load_config(config_path)
        cohort = load_data_dir(data_dir)
        graph = CausalGraph.from_json(
            json.loads(Path(graph_path).read_text()))
        scm = run_fit(cfg, cohort, graph)
        labels = load_labels(data_dir)
        clf = run_train_classifier(cfg, cohort, labels) if labels else None
        sim_hash = ""
        hash_file = Path(data_dir) / SIM_HASH_FILE
        if hash_file.exists():
            sim_hash = hash_file.read_text().strip()
        b = bundle_mod.ModelBundle(graph=graph, scm=scm, latent=None,
                                   classifier=clf, stats=scm.stats,
                                   sim_config_hash=sim_hash)
        bundle_mod.save_bundle(b, bundle_dir)
        click.echo(f"wrote bundle to {bundle_dir}")
    _run(go)


@cli.command("train-ism")
@_config_opt
@click.option("--data", "data_dir", required=True,
              type=click.Path(exists=True))
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True))
def train_ism(config_path, data_dir, bundle_dir):
    """Train the latent transition network and add it to the bundle."""
    def go():
        cfg = _load_config(config_path)
        cohort = load_data_dir(data_dir)
        b = bundle_mod.load_bundle(bundle_dir)
        latent = run_train_ism(cfg, cohort)
        b = dataclasses.replace(b, latent=latent)
        bundle_mod.save_bundle(b, bundle_dir)
        click.echo(f"updated bundle {bundle_dir} with latent model")
    _run(go)


@cli.command("eval")
@_config_opt
@click.option("--data", "data_dir", required=True,
              type=click.Path(exists=True))
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_cmd(config_path, data_dir, bundle_dir, out_dir):
    """Compute metric reports on a data directory; write CSV + JSON."""
    def go():
        cfg = _load_config(config_path)
        cohort = load_data_dir(data_dir)
        b = bundle_mod.load_bundle(bundle_dir)
        labels = load_labels(data_dir)
        reports = run_eval(cfg, b, cohort, labels, out_dir)
        for rep in reports:
            click.echo(f"{rep.name}: " + " ".join(
                f"{k}={rep.values[k]:.4f}" for k in sorted(rep.values)))
    _run(go)


@cli.command()
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True))
@click.option("--query", "query_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def infer(bundle_dir, query_path, out_dir):
    """Roll a query forward and write the trajectory CSV (+ images)."""
    def go():
        b = bundle_mod.load_bundle(bundle_dir)
        query = parse_query(json.loads(Path(query_path).read_text()))
        states = run_infer(b, query, out_dir)
        click.echo(f"wrote trajectory of {len(states)} states to {out_dir}")
    _run(go)


@cli.command()
@click.option("--bundle", "bundle_dir", required=True,
              type=click.Path(exists=True))
@click.option("--port", default=None, type=int,
              help="overrides the CAUSYNTH_PORT environment variable")
@click.option("--host", default="127.0.0.1")
def serve(bundle_dir, port, host):
    """Serve the HTTP JSON API on top of a saved bundle."""
    def go():
        import uvicorn

        from .server import create_app

        b = bundle_mod.load_bundle(bundle_dir)
        if port is None:
            resolved = int(os.environ.get("CAUSYNTH_PORT", "8000"))
        else:
            resolved = port
        uvicorn.run(create_app(b), host=host, port=resolved)
    _run(go)


def main(argv=None) -> int:
    return cli.main(args=argv, standalone_mode=True)


if __name__ == "__main__":
    main()
