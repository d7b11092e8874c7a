"""Small deterministic feed-forward networks on numpy.

Everything model-like in this package (structural equations, the latent
transition network) is a fully-connected net trained full-batch with
adaptive moment estimation, so runs are reproducible bit-for-bit given a
seed.
"""
from __future__ import annotations

import numpy as np

from . import errors

ADAM_BETAS = (0.9, 0.99)


class Mlp:
    """Fully-connected network with linear output layer.

    ``sizes`` gives (input, hidden..., output) widths.  Weights are
    Xavier-initialized from a seeded generator.
    """

    def __init__(self, sizes, activation: str = "tanh", seed: int = 0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if activation not in ("tanh", "relu"):
            raise ValueError(f"unknown activation {activation!r}")
        self.sizes = tuple(int(s) for s in sizes)
        self.activation = activation
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            scale = np.sqrt(2.0 / (fan_in + fan_out))
            self.weights.append(rng.normal(0.0, scale, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    # -- forward / backward ------------------------------------------------

    def _act(self, z):
        return np.tanh(z) if self.activation == "tanh" \
            else np.maximum(z, 0.0)

    def _act_grad(self, z, a):
        return 1.0 - a * a if self.activation == "tanh" \
            else (z > 0.0).astype(float)

    def forward(self, X: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(np.asarray(X, dtype=float))
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            a = self._act(a @ W + b)
        return a @ self.weights[-1] + self.biases[-1]

    def loss_and_grads(self, X, Y, loss: str = "l2", weight=None):
        """Mean loss over all output elements and its parameter gradients.

        ``weight`` optionally scales each output column's contribution.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        acts = [X]
        pre = []
        a = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            z = a @ W + b
            pre.append(z)
            a = self._act(z)
            acts.append(a)
        out = a @ self.weights[-1] + self.biases[-1]
        r = out - Y
        n = r.size
        w = 1.0 if weight is None else np.asarray(weight, dtype=float)
        if loss == "l2":
            value = float(np.mean(w * r * r))
            delta = 2.0 * w * r / n
        elif loss == "l1":
            value = float(np.mean(w * np.abs(r)))
            delta = w * np.sign(r) / n
        else:
            raise ValueError(f"unknown loss {loss!r}")
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        gw[-1] = acts[-1].T @ delta
        gb[-1] = delta.sum(axis=0)
        for k in range(len(self.weights) - 2, -1, -1):
            delta = (delta @ self.weights[k + 1].T) \
                * self._act_grad(pre[k], acts[k + 1])
            gw[k] = acts[k].T @ delta
            gb[k] = delta.sum(axis=0)
        return value, gw, gb

    # -- flat parameter vector (serialization contract) --------------------

    def get_params(self) -> np.ndarray:
        """Layer-major flat vector: W0 (row-major), b0, W1, b1, ..."""
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def set_params(self, flat: np.ndarray):
        flat = np.asarray(flat, dtype=float)
        expected = sum(W.size + b.size
                       for W, b in zip(self.weights, self.biases))
        if flat.shape != (expected,):
            raise errors.LayoutMismatch(
                f"expected {expected} parameters, got {flat.shape}")
        pos = 0
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[k] = flat[pos:pos + W.size].reshape(W.shape).copy()
            pos += W.size
            self.biases[k] = flat[pos:pos + b.size].copy()
            pos += b.size


def train(net: Mlp, X, Y, epochs: int, lr: float = 0.001,
          loss: str = "l2", betas=ADAM_BETAS, weight=None,
          weight_decay: float = 0.0) -> list:
    """Full-batch adaptive-moment training; returns the loss history.

    ``weight_decay`` applies decoupled shrinkage to weight matrices
    (never biases) each step.
    """
    b1, b2 = betas
    eps = 1e-8
    mw = [np.zeros_like(W) for W in net.weights]
    vw = [np.zeros_like(W) for W in net.weights]
    mb = [np.zeros_like(b) for b in net.biases]
    vb = [np.zeros_like(b) for b in net.biases]
    history = []
    for step in range(1, epochs + 1):
        value, gw, gb = net.loss_and_grads(X, Y, loss=loss, weight=weight)
        if not np.isfinite(value):
            raise errors.NonFiniteLoss(f"loss became {value} at step {step}")
        history.append(value)
        c1 = 1.0 - b1 ** step
        c2 = 1.0 - b2 ** step
        for k in range(len(net.weights)):
            mw[k] = b1 * mw[k] + (1 - b1) * gw[k]
            vw[k] = b2 * vw[k] + (1 - b2) * gw[k] ** 2
            net.weights[k] -= lr * (mw[k] / c1) / (np.sqrt(vw[k] / c2) + eps)
            if weight_decay:
                net.weights[k] -= lr * weight_decay * net.weights[k]
            mb[k] = b1 * mb[k] + (1 - b1) * gb[k]
            vb[k] = b2 * vb[k] + (1 - b2) * gb[k] ** 2
            net.biases[k] -= lr * (mb[k] / c1) / (np.sqrt(vb[k] / c2) + eps)
    return history


def gradient_check(net: Mlp, X, Y, loss: str = "l2",
                   step: float = 1e-4) -> float:
    """Max relative error between analytic and central finite-difference
    gradients over all parameters."""
    flat = net.get_params()
    _, gw, gb = net.loss_and_grads(X, Y, loss=loss)
    analytic = np.concatenate([g.ravel() for pair in zip(gw, gb)
                               for g in pair])
    numeric = np.empty_like(analytic)
    for k in range(flat.size):
        probe = flat.copy()
        probe[k] = flat[k] + step
        net.set_params(probe)
        hi = net.loss_and_grads(X, Y, loss=loss)[0]
        probe[k] = flat[k] - step
        net.set_params(probe)
        lo = net.loss_and_grads(X, Y, loss=loss)[0]
        numeric[k] = (hi - lo) / (2 * step)
    net.set_params(flat)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
