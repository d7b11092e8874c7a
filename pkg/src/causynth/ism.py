"""Volume-conditioned latent transition and image synthesis.

A five-layer network maps (latent at the earlier scan, volumes at the
earlier scan, volumes at the later scan) to the latent of the later
scan.  Composing encoder -> transition -> renderer turns a desired
volume change into a synthesized image.  Latents and volume triples are
z-normalized with training-set statistics before entering the network,
and predicted latents are projected onto the valid phantom range.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors, nets, phantom
from .phantom import DEFAULT_CONFIG, PhantomConfig, PhantomImage
from .variables import Variable

HIDDEN = (64, 64, 64)
N_LATENT = 12
N_INPUT = N_LATENT + 3 + 3

#: training loss weights per latent coordinate
#: (a, b, av, bv, g, theta, dx, dy, i_csf, i_gm, i_wm, eps) — the
#: volume-bearing geometry gets extra weight because segmented volumes
#: are quadratically sensitive to the semi-axes and ring thickness
LOSS_WEIGHT = np.array([2, 2, 4, 4, 2, 1, 1, 1, 1, 1, 1, 1], dtype=float)

#: volume variables feeding the network, in input order
VOLUME_VARS = (Variable.TIV, Variable.VV, Variable.GMV)


@dataclass(frozen=True)
class LatentTransitionModel:
    params: np.ndarray                # flat network parameters
    latent_mean: np.ndarray           # (12,)
    latent_std: np.ndarray            # (12,)
    vol_mean: np.ndarray              # (3,)
    vol_std: np.ndarray               # (3,)
    hyper: dict = field(default_factory=dict)   # seed, epochs, lr, mode
    config: PhantomConfig = DEFAULT_CONFIG
    _net: object = field(default=None, repr=False, compare=False)

    def net(self) -> nets.Mlp:
        if self._net is None:
            mlp = nets.Mlp((N_INPUT,) + HIDDEN + (N_LATENT,))
            mlp.set_params(self.params)
            object.__setattr__(self, "_net", mlp)
        return self._net

    def transition(self, w_vec, v_tm, v_tn) -> phantom.PhantomLatent:
        """Predict the later-scan latent and project it onto valid range.

        The network predicts the z-scored latent *change*; the input
        latent is carried through a skip connection, so an untrained
        network is already close to the copy baseline.
        """
        zw = (np.asarray(w_vec, float) - self.latent_mean) / self.latent_std
        x = np.concatenate([
            zw,
            (np.asarray(v_tm, float) - self.vol_mean) / self.vol_std,
            (np.asarray(v_tn, float) - self.vol_mean) / self.vol_std,
        ])
        z = zw + self.net().forward(x[None, :])[0]
        return phantom.clamp_latent(z * self.latent_std + self.latent_mean,
                                    self.config)


def _imaged_pairs(cohort):
    """Per subject, the time-ordered imaged sessions (>= 2 each)."""
    out = {}
    for sid, sessions in cohort.subjects.items():
        imaged = [s for s in sessions if s.image is not None]
        if len(imaged) >= 2:
            out[sid] = imaged
    return out


def _session_volumes(session) -> np.ndarray:
    return np.array([session.values[v] for v in VOLUME_VARS], dtype=float)


def _safe_std(x, axis=0, floor=0.05):
    """Per-coordinate std with a floor.

    Near-constant coordinates (tissue intensities vary only by encoder
    jitter) would otherwise blow up under z-scoring and dominate the L1
    objective with noise.
    """
    return np.maximum(np.std(x, axis=axis), floor)


def train_gw(cohort, epochs: int = 2000, lr: float = 0.001, seed: int = 0,
             mode: str = "all",
             config: PhantomConfig = DEFAULT_CONFIG) -> LatentTransitionModel:
    """Fit the latent transition network on a cohort with images.

    ``mode`` "all" trains full-batch on every ordered same-subject scan
    pair; "random" draws one pair per subject per epoch from a seeded
    generator.
    """
    by_subject = _imaged_pairs(cohort)
    if len(by_subject) < 10:
        raise errors.TooFewPairs(
            f"need >=2 imaged sessions for >=10 subjects, "
            f"have {len(by_subject)}")
    latents = {}     # id(session) -> latent vector
    for sessions in by_subject.values():
        for s in sessions:
            latents[id(s)] = phantom.encode(s.image, config).vector()
    pairs = []       # (w_tm, v_tm, v_tn, w_tn, subject index)
    anchors = []     # zero-change rows pinning the map at v_tn == v_tm
    for k, sessions in enumerate(by_subject.values()):
        for i in range(len(sessions)):
            for j in range(i + 1, len(sessions)):
                a, b = sessions[i], sessions[j]
                pairs.append((latents[id(a)], _session_volumes(a),
                              _session_volumes(b), latents[id(b)], k))
        for s in sessions:
            anchors.append((latents[id(s)], _session_volumes(s),
                            _session_volumes(s), latents[id(s)], k))
    all_latents = np.array(list(latents.values()))
    all_vols = np.array([v for p in pairs for v in (p[1], p[2])])
    lm, ls = all_latents.mean(axis=0), _safe_std(all_latents)
    vm, vs = all_vols.mean(axis=0), _safe_std(all_vols)

    def encode_rows(rows):
        X = np.array([np.concatenate([(w - lm) / ls, (va - vm) / vs,
                                      (vb - vm) / vs])
                      for w, va, vb, _, _ in rows])
        Y = np.array([(wt - w) / ls for w, _, _, wt, _ in rows])
        return X, Y

    net = nets.Mlp((N_INPUT,) + HIDDEN + (N_LATENT,), seed=seed)
    if mode == "all":
        X, Y = encode_rows(pairs + anchors)
        nets.train(net, X, Y, epochs=epochs, lr=lr, loss="l1",
                   weight=LOSS_WEIGHT)
    elif mode == "random":
        rng = np.random.default_rng(seed)
        groups = {}
        for row in pairs:
            groups.setdefault(row[4], []).append(row)
        groups = list(groups.values())
        for _ in range(epochs):
            batch = [g[rng.integers(len(g))] for g in groups] + anchors
            X, Y = encode_rows(batch)
            nets.train(net, X, Y, epochs=1, lr=lr, loss="l1",
                       weight=LOSS_WEIGHT)
    else:
        raise ValueError(f"unknown pair mode {mode!r}")
    return LatentTransitionModel(
        params=net.get_params(), latent_mean=lm, latent_std=ls,
        vol_mean=vm, vol_std=vs,
        hyper={"seed": seed, "epochs": epochs, "lr": lr, "mode": mode},
        config=config, _net=net)


def synthesize(img_tm: PhantomImage, v_tm, v_tn,
               model: LatentTransitionModel) -> PhantomImage:
    """Image at the later scan given its target volumes (TIV, VV, GMV)."""
    v_tm = np.asarray(v_tm, dtype=float)
    v_tn = np.asarray(v_tn, dtype=float)
    if np.min(v_tm) <= 0 or np.min(v_tn) <= 0:
        raise errors.InvalidLatent("volumes must be strictly positive")
    w = phantom.encode(img_tm, model.config)
    w_new = model.transition(w.vector(), v_tm, v_tn)
    return phantom.render(w_new, model.config)


def difference_map(a: PhantomImage, b: PhantomImage) -> np.ndarray:
    """Signed pixelwise a - b in [-1, 1]."""
    return phantom.difference_map(a, b)
