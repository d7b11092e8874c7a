"""Query engine over a fitted structural model.

Supports do-interventions (clamp a variable and cut its incoming
edges), single steps, multi-step rollouts with optional image synthesis
chained through the latent transition model, and counterfactual deltas.
All predictions here are noise-zero and therefore deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import errors, scmfit
from .variables import CONSTANT, DYNAMIC, TABULAR, Variable


@dataclass(frozen=True)
class State:
    values: dict                      # Variable -> float, x1..x10
    time: float = 0.0                 # years since baseline
    image: object = None              # optional PhantomImage

    def __post_init__(self):
        missing = [v for v in TABULAR if v not in self.values]
        if missing:
            raise errors.UnknownVariable(
                f"state missing {[v.value for v in missing]}")


@dataclass(frozen=True)
class Intervention:
    target: Variable
    value: float
    step: int = 0                     # application step (0 = first step)
    persistent: bool = False          # re-clamp at every later step

    def __post_init__(self):
        if self.target is Variable.IMAGE:
            raise errors.UnknownVariable(
                "images are synthesized, never intervened on")


@dataclass(frozen=True)
class Query:
    baseline: State
    interventions: tuple = ()
    horizon: int = 1
    step_dt: float = 1.0

    def __post_init__(self):
        if self.horizon < 1:
            raise errors.InvalidRange("horizon must be >= 1")
        if self.step_dt <= 0:
            raise errors.InvalidRange("step_dt must be > 0")


def step(model: scmfit.StructuralModel, state: State, dt: float,
         interventions=()) -> State:
    """One transition of dt years under do-clamped interventions.

    States carry raw-unit values; equations were fitted on z-scored
    values, so parents are transformed on the way in and predictions
    inverted on the way out using the model's stored stats.
    """
    if dt <= 0:
        raise errors.InvalidRange("dt must be > 0")
    stats = model.stats
    clamped = {iv.target: iv.value for iv in interventions}
    # do(x=v) holds x at v across the whole interval: lag-1 parents read
    # the clamped value, and the output keeps it (incoming edges cut).
    if clamped:
        state = replace(state, values={**state.values, **clamped})
    new = {}
    new[Variable.AGE] = clamped.get(Variable.AGE,
                                    state.values[Variable.AGE] + dt)
    for v in CONSTANT:
        new[v] = clamped.get(v, state.values[v])
    for v in model.topo_order():
        if v in new:
            continue
        if v in clamped:
            new[v] = clamped[v]
            continue
        eq = model.equations.get(v)
        if eq is None:
            new[v] = state.values[v]
            continue
        pv = [stats.transform(p, state.values[p] if lag == 1 else new[p])
              for p, lag in eq.parents]
        new[v] = stats.inverse(v, scmfit.predict(eq, pv, dt, noise="zero"))
    return State(values=new, time=state.time + dt)


def rollout(model: scmfit.StructuralModel, query: Query,
            latent_model=None) -> list:
    """Trajectory [baseline, state after step 1, ...].

    Images are chained through the latent transition model when the
    baseline carries one and a trained model is supplied.
    """
    from . import ism  # deferred: rollouts without images need no phantom

    states = [query.baseline]
    for k in range(query.horizon):
        active = [iv for iv in query.interventions
                  if iv.step == k or (iv.persistent and iv.step <= k)]
        nxt = step(model, states[-1], query.step_dt, active)
        prev = states[-1]
        if prev.image is not None and latent_model is not None:
            vols = [Variable.TIV, Variable.VV, Variable.GMV]
            img = ism.synthesize(
                prev.image,
                [prev.values[v] for v in vols],
                [nxt.values[v] for v in vols], latent_model)
            nxt = replace(nxt, image=img)
        states.append(nxt)
    return states


def counterfactual_delta(model: scmfit.StructuralModel, state: State,
                         intervention: Intervention, target: Variable,
                         dt: float = 1.0):
    """(factual, counterfactual, delta) for target after one step."""
    if target is intervention.target:
        raise errors.UnknownVariable(
            "counterfactual target equals the intervened variable")
    factual = step(model, state, dt).values[target]
    counter = step(model, state, dt, [intervention]).values[target]
    return factual, counter, counter - factual
