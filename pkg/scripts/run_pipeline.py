#!/usr/bin/env python3
"""Run the full pipeline end to end into a working directory.

Usage:
    python scripts/run_pipeline.py WORKDIR [--config configs/run_default.yaml]

Equivalent to the CLI sequence
simulate -> discover -> fit -> train-ism -> eval, with every artifact
left under WORKDIR for inspection.
"""
import argparse
import sys
from pathlib import Path

from causynth.cli import main


def run(argv):
    code = main(argv)
    if code not in (0, None):
        sys.exit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("workdir", type=Path)
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    work = args.workdir
    data, bundle, out = work / "data", work / "bundle", work / "eval"
    cfg = ["--config", args.config] if args.config else []

    run(["simulate", *cfg, "--out", str(data)])
    run(["discover", *cfg, "--data", str(data)])
    run(["fit", *cfg, "--data", str(data),
         "--graph", str(data / "graph.json"), "--out", str(bundle)])
    run(["train-ism", *cfg, "--data", str(data), "--bundle", str(bundle)])
    run(["eval", *cfg, "--data", str(data), "--bundle", str(bundle),
         "--out", str(out)])
    print(f"done: artifacts under {work}")
