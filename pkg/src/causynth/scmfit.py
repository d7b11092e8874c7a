"""Structural equation fitting over session pairs.

Each fitted equation predicts a variable's next-session value from its
parents' current-session values plus the elapsed time between sessions.
Two functional forms are supported: ordinary least squares and a small
feed-forward network.  The "causal" variant uses graph parents; the
"non-causal" variant regresses on all ten tabular variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors, nets
from .cohort import NormStats
from .graph import CausalGraph
from .variables import DYNAMIC, TABULAR, Variable

MLP_HIDDEN = (32, 32)
MLP_LR = 0.001
MLP_EPOCHS = 5000
MLP_WEIGHT_DECAY = 1.2


@dataclass(frozen=True)
class StructuralEquation:
    """One fitted transition mechanism.

    ``parents`` is an ordered tuple of (Variable, lag); lag 1 means the
    value comes from the earlier session, lag 0 from the later one.  The
    input layout for prediction is the parent values in that order
    followed by the time gap in years.
    """
    target: Variable
    parents: tuple                    # tuple[(Variable, lag)]
    form: str                         # "linear" | "mlp"
    params: np.ndarray                # flat parameter vector
    noise_sigma: float
    hidden: tuple = ()                # mlp hidden-layer widths
    _net: object = field(default=None, repr=False, compare=False)

    @property
    def n_inputs(self) -> int:
        return len(self.parents) + 1  # + delta_t

    def net(self) -> nets.Mlp:
        if self._net is None:
            mlp = nets.Mlp((self.n_inputs,) + self.hidden + (1,))
            mlp.set_params(self.params)
            object.__setattr__(self, "_net", mlp)
        return self._net


@dataclass(frozen=True)
class StructuralModel:
    equations: dict                   # Variable -> StructuralEquation
    graph: CausalGraph
    form: str
    variant: str
    stats: NormStats = field(default_factory=NormStats)

    def topo_order(self):
        return self.graph.topo_order()


def _design(pairs, parents):
    """Rows [parent values..., delta_t].

    Lag-1 parents are read from the earlier session, contemporaneous
    (lag-0) parents from the later one — the same convention the query
    engine uses when it evaluates equations in topological order.
    """
    X = np.array([[(p.earlier if lag == 1 else p.later).values[v]
                   for v, lag in parents] + [p.delta_t] for p in pairs])
    return X


def _targets(pairs, target):
    return np.array([p.later.values[target] for p in pairs])


def fit_linear(pairs, graph: CausalGraph, target: Variable,
               parents=None) -> StructuralEquation:
    parents = tuple(parents if parents is not None
                    else graph.parents_of(target))
    if len(pairs) < len(parents) + 2:
        raise errors.TooFewSamples(
            f"{len(pairs)} pairs for {len(parents)} parents")
    X = _design(pairs, parents)
    y = _targets(pairs, target)
    if np.std(y) == 0.0:
        params = np.zeros(len(parents) + 2)
        params[-1] = y[0]
        return StructuralEquation(target, parents, "linear", params, 0.0)
    D = np.hstack([X, np.ones((len(pairs), 1))])
    coef, _, rank, _ = np.linalg.lstsq(D, y, rcond=None)
    if rank < D.shape[1]:
        raise errors.RankDeficient(
            f"design for {target.value} has rank {rank} < {D.shape[1]}")
    resid = y - D @ coef
    return StructuralEquation(target, parents, "linear", coef,
                              float(np.std(resid)))


def fit_mlp(pairs, graph: CausalGraph, target: Variable, parents=None,
            hidden=MLP_HIDDEN, lr=MLP_LR, epochs=MLP_EPOCHS,
            weight_decay=MLP_WEIGHT_DECAY, seed=0) -> StructuralEquation:
    parents = tuple(parents if parents is not None
                    else graph.parents_of(target))
    if len(pairs) < len(parents) + 2:
        raise errors.TooFewSamples(
            f"{len(pairs)} pairs for {len(parents)} parents")
    X = _design(pairs, parents)
    y = _targets(pairs, target).reshape(-1, 1)
    hidden = tuple(hidden)
    net = nets.Mlp((X.shape[1],) + hidden + (1,), activation="tanh",
                   seed=seed)
    nets.train(net, X, y, epochs=epochs, lr=lr, loss="l2",
               weight_decay=weight_decay)
    # Exact final step: shifting the output bias by the mean residual is
    # the closed-form optimum for that parameter and zeroes the mean.
    net.biases[-1] += np.mean(y - net.forward(X), axis=0)
    resid = y - net.forward(X)
    return StructuralEquation(target, parents, "mlp", net.get_params(),
                              float(np.std(resid)), hidden=hidden, _net=net)


def predict(eq: StructuralEquation, parent_values, delta_t: float,
            noise: str = "zero", seed=None) -> float:
    parent_values = np.asarray(parent_values, dtype=float)
    if parent_values.shape != (len(eq.parents),):
        raise errors.LayoutMismatch(
            f"{eq.target.value} expects {len(eq.parents)} parent values, "
            f"got shape {parent_values.shape}")
    if delta_t < 0:
        raise errors.InvalidRange(f"delta_t must be >= 0, got {delta_t}")
    x = np.append(parent_values, delta_t)
    if eq.form == "linear":
        value = float(x @ eq.params[:-1] + eq.params[-1])
    elif eq.form == "mlp":
        value = float(eq.net().forward(x[None, :])[0, 0])
    else:
        raise ValueError(f"unknown form {eq.form!r}")
    if noise == "zero":
        return value
    if noise == "sample":
        rng = np.random.default_rng(seed)
        return value + float(rng.normal(0.0, eq.noise_sigma))
    raise ValueError(f"unknown noise mode {noise!r}")


def fit_all(pairs, graph: CausalGraph, form: str = "linear",
            variant: str = "causal", stats: NormStats = None,
            seed: int = 0, **hyper) -> StructuralModel:
    """Fit one equation per dynamic variable.

    Age advances deterministically and constants are copied, so neither
    gets an equation.
    """
    if not pairs:
        raise errors.TooFewSamples("no session pairs")
    if variant not in ("causal", "non_causal"):
        raise ValueError(f"unknown variant {variant!r}")
    if form not in ("linear", "mlp"):
        raise ValueError(f"unknown form {form!r}")
    equations = {}
    for target in DYNAMIC:
        if variant == "causal":
            parents = graph.parents_of(target)
        else:
            parents = [(v, 1) for v in TABULAR]
        if form == "linear":
            eq = fit_linear(pairs, graph, target, parents=parents)
        else:
            eq = fit_mlp(pairs, graph, target, parents=parents,
                         seed=seed + target.index, **hyper)
        equations[target] = eq
    return StructuralModel(equations, graph, form, variant,
                           stats=stats or NormStats())
