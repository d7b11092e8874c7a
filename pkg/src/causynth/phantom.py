"""Analytic brain phantom: a 12-parameter latent renders to a 2D grayscale
image whose tissue volumes are closed-form functions of the latent.

Geometry: an outer "skull" ellipse filled with white matter, a grey-matter
annulus of thickness g, and an offset ventricle ellipse filled with CSF.
Intensities follow the configured ordering i_gm < i_wm < i_csf so that every
anti-aliased boundary pixel is a mix of two *adjacent* intensity levels,
which makes fractional segmentation exact up to supersampling quantization.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from . import errors

LATENT_FIELDS = ("a", "b", "av", "bv", "g", "theta", "dx", "dy",
                 "i_csf", "i_gm", "i_wm", "eps")


@dataclass(frozen=True)
class PhantomConfig:
    resolution: int = 96
    supersample: int = 4
    scale_ml_per_px2: float = 1.0      # px^2 -> ml
    i_gm: float = 0.35
    i_wm: float = 0.65
    i_csf: float = 0.95
    band_halfwidth: float = 0.02

    def intensities(self):
        return (self.i_gm, self.i_wm, self.i_csf)


DEFAULT_CONFIG = PhantomConfig()


@dataclass(frozen=True)
class PhantomLatent:
    a: float          # skull semi-axis (x) [px]
    b: float          # skull semi-axis (y) [px]
    av: float         # ventricle semi-axis (x) [px]
    bv: float         # ventricle semi-axis (y) [px]
    g: float          # grey-ring thickness [px]
    theta: float      # rotation [rad]
    dx: float         # ventricle center offset (rotated frame) [px]
    dy: float
    i_csf: float      # tissue intensities in (0,1)
    i_gm: float
    i_wm: float
    eps: float        # boundary perturbation amplitude [px]

    def vector(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in LATENT_FIELDS], dtype=float)

    @classmethod
    def from_vector(cls, vec) -> "PhantomLatent":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(LATENT_FIELDS),):
            raise errors.InvalidLatent(f"latent must have {len(LATENT_FIELDS)} fields")
        return cls(**{f: float(x) for f, x in zip(LATENT_FIELDS, vec)})


@dataclass(frozen=True)
class PhantomImage:
    pixels: np.ndarray               # (H, W) floats in [0,1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def content_hash(self) -> str:
        q = np.round(self.pixels * 255).astype(np.uint8)
        return hashlib.sha1(q.tobytes()).hexdigest()[:16]


def validate_latent(w: PhantomLatent) -> None:
    vec = w.vector()
    if not np.all(np.isfinite(vec)):
        raise errors.InvalidLatent("non-finite latent field")
    if w.a <= 0 or w.b <= 0 or w.g <= 0:
        raise errors.InvalidLatent("skull axes and ring thickness must be positive")
    if w.g >= min(w.a, w.b):
        raise errors.InvalidLatent("ring thickness exceeds skull axes")
    if not (0 < w.av < w.a - w.g and 0 < w.bv < w.b - w.g):
        raise errors.InvalidLatent("ventricle does not fit inside white matter")
    if w.eps < 0:
        raise errors.InvalidLatent("negative boundary perturbation")
    for name in ("i_csf", "i_gm", "i_wm"):
        v = getattr(w, name)
        if not (0 < v < 1):
            raise errors.InvalidLatent(f"{name} outside (0,1)")
    if not (w.i_gm < w.i_wm < w.i_csf):
        raise errors.InvalidLatent("intensities must satisfy i_gm < i_wm < i_csf")
    # offset ventricle must stay strictly inside the inner (WM) ellipse
    ai, bi = w.a - w.g, w.b - w.g
    phi = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    px = (w.dx + w.av * np.cos(phi)) / ai
    py = (w.dy + w.bv * np.sin(phi)) / bi
    if np.max(px * px + py * py) >= 1.0:
        raise errors.InvalidLatent("offset ventricle crosses the grey ring")


def volume_of_latent(w: PhantomLatent,
                     config: PhantomConfig = DEFAULT_CONFIG):
    """Closed-form (TIV, VV, GMV) in ml-equivalent units."""
    validate_latent(w)
    s = config.scale_ml_per_px2
    tiv = math.pi * w.a * w.b * s
    vv = math.pi * w.av * w.bv * s
    gmv = (math.pi * w.a * w.b - math.pi * (w.a - w.g) * (w.b - w.g)) * s
    return tiv, vv, gmv


_GRID_CACHE = {}


def _grid(resolution: int, ss: int):
    key = (resolution, ss)
    if key not in _GRID_CACHE:
        n = resolution * ss
        c = resolution / 2.0
        coords = (np.arange(n) + 0.5) / ss - c
        xx, yy = np.meshgrid(coords, coords)
        _GRID_CACHE[key] = (xx, yy)
    return _GRID_CACHE[key]


def _perturbation(phi: np.ndarray) -> np.ndarray:
    # fixed low-frequency field, zero mean, |p| <= 1
    return 0.6 * np.sin(3 * phi + 1.3) + 0.4 * np.sin(5 * phi + 2.1)


def render(w: PhantomLatent,
           config: PhantomConfig = DEFAULT_CONFIG) -> PhantomImage:
    """Deterministic rasterization with supersampled anti-aliasing."""
    validate_latent(w)
    res, ss = config.resolution, config.supersample
    xx, yy = _grid(res, ss)
    ct, st = math.cos(w.theta), math.sin(w.theta)
    xr = ct * xx + st * yy
    yr = st * xx - ct * yy
    yr *= -1.0

    # restrict work to the skull bounding box
    margin = 2.0 + w.eps
    box = (np.abs(xr) <= w.a + margin) & (np.abs(yr) <= w.b + margin)
    xb, yb = xr[box], yr[box]

    ux, uy = xb / w.a, yb / w.b
    rho2 = ux * ux + uy * uy
    ai, bi = w.a - w.g, w.b - w.g
    uxi, uyi = xb / ai, yb / bi
    rho2_i = uxi * uxi + uyi * uyi
    if w.eps > 0:
        eps_rel = w.eps / ((w.a + w.b) / 2.0)
        phi = np.arctan2(uy, ux)
        bound = 1.0 + eps_rel * _perturbation(phi)
        phi_i = np.arctan2(uyi, uxi)
        bound_i = 1.0 + (w.eps / ((ai + bi) / 2.0)) * _perturbation(phi_i)
        brain = rho2 <= bound * bound
        inner = rho2_i <= bound_i * bound_i
    else:
        brain = rho2 <= 1.0
        inner = rho2_i <= 1.0

    vx, vy = (xb - w.dx) / w.av, (yb - w.dy) / w.bv
    vent = vx * vx + vy * vy <= 1.0

    vals = np.where(brain, np.where(inner & brain,
                                    np.where(vent, w.i_csf, w.i_wm),
                                    w.i_gm), 0.0)
    img = np.zeros(xx.shape)
    img[box] = vals
    # box-average the supersampled field down to pixel resolution
    pix = img.reshape(res, ss, res, ss).mean(axis=(1, 3))
    return PhantomImage(pixels=pix)


def _class_masses(pixels: np.ndarray, config: PhantomConfig):
    """Fractional per-pixel (gm, wm, csf) masses.

    Pixels inside an intensity band are pure; values between adjacent bands
    are split linearly between the two neighboring classes; values below the
    GM band are background/GM mixes.
    """
    i_g, i_w, i_c = config.intensities()
    h = config.band_halfwidth
    if not (h < (i_w - i_g) / 2 and h < (i_c - i_w) / 2 and h < i_g / 2):
        raise errors.AmbiguousIntensities(
            "intensity bands overlap; shrink band_halfwidth")
    p = pixels
    gm = np.zeros_like(p)
    wm = np.zeros_like(p)
    csf = np.zeros_like(p)

    lo = p < i_g - h
    gm[lo] = p[lo] / i_g                       # background/GM boundary mix
    in_g = (p >= i_g - h) & (p <= i_g + h)
    gm[in_g] = 1.0
    gw = (p > i_g + h) & (p < i_w - h)
    t = (p[gw] - i_g) / (i_w - i_g)
    gm[gw] = 1.0 - t
    wm[gw] = t
    in_w = (p >= i_w - h) & (p <= i_w + h)
    wm[in_w] = 1.0
    wc = (p > i_w + h) & (p < i_c - h)
    t = (p[wc] - i_w) / (i_c - i_w)
    wm[wc] = 1.0 - t
    csf[wc] = t
    hi = p >= i_c - h
    csf[hi] = 1.0
    return gm, wm, csf


def segment_volumes(img: PhantomImage,
                    config: PhantomConfig = DEFAULT_CONFIG):
    """Intensity-based (TIV, VV, GMV) from fractional class masses."""
    p = img.pixels
    if np.min(p) < 0 or np.max(p) > 1:
        raise errors.InvalidImage("pixel values outside [0,1]")
    gm, wm, csf = _class_masses(p, config)
    s = config.scale_ml_per_px2
    gmv = float(gm.sum()) * s
    vv = float(csf.sum()) * s
    tiv = float((gm + wm + csf).sum()) * s
    return tiv, vv, gmv


def ring_thickness_for_gmv(a: float, b: float, gmv_px2: float) -> float:
    """Solve pi*(ab - (a-g)(b-g)) = gmv_px2 for the smaller root g."""
    c = gmv_px2 / math.pi
    disc = (a + b) ** 2 - 4 * c
    if disc < 0:
        raise errors.InvalidLatent("requested GMV exceeds attainable ring area")
    return ((a + b) - math.sqrt(disc)) / 2.0


def latent_from_volumes(tiv: float, vv: float, gmv: float, style: dict,
                        config: PhantomConfig = DEFAULT_CONFIG) -> PhantomLatent:
    """Solve the geometric latent realizing (TIV, VV, GMV) for a given style.

    ``style`` fixes the non-volume coordinates: aspect ratios ``ratio`` (b/a)
    and ``vratio`` (bv/av), rotation, ventricle offset, intensities, eps.
    """
    s = config.scale_ml_per_px2
    if min(tiv, vv, gmv) <= 0 or gmv >= tiv:
        raise errors.InvalidLatent("volumes must be positive with GMV < TIV")
    r = style["ratio"]
    rv = style["vratio"]
    a = math.sqrt(tiv / (s * math.pi * r))
    b = r * a
    av = math.sqrt(vv / (s * math.pi * rv))
    bv = rv * av
    g = ring_thickness_for_gmv(a, b, gmv / s)
    w = PhantomLatent(
        a=a, b=b, av=av, bv=bv, g=g,
        theta=style.get("theta", 0.0),
        dx=style.get("dx", 0.0), dy=style.get("dy", 0.0),
        i_csf=style.get("i_csf", config.i_csf),
        i_gm=style.get("i_gm", config.i_gm),
        i_wm=style.get("i_wm", config.i_wm),
        eps=style.get("eps", 0.0),
    )
    validate_latent(w)
    return w


def clamp_latent(vec: np.ndarray,
                 config: PhantomConfig = DEFAULT_CONFIG) -> PhantomLatent:
    """Project an unconstrained latent vector onto the valid range.

    Used as the output projection of the latent-transition network so that
    every predicted latent renders.
    """
    res = config.resolution
    v = dict(zip(LATENT_FIELDS, np.asarray(vec, dtype=float)))
    lim = res / 2.0 - 2.0
    v["a"] = float(np.clip(v["a"], 6.0, lim))
    v["b"] = float(np.clip(v["b"], 6.0, lim))
    v["g"] = float(np.clip(v["g"], 0.5, min(v["a"], v["b"]) - 2.0))
    ai, bi = v["a"] - v["g"], v["b"] - v["g"]
    v["av"] = float(np.clip(v["av"], 0.3, 0.92 * ai))
    v["bv"] = float(np.clip(v["bv"], 0.3, 0.92 * bi))
    v["theta"] = float(np.clip(v["theta"], -math.pi / 2, math.pi / 2))
    # shrink the offset until the ventricle fits strictly inside WM
    v["dx"] = float(np.clip(v["dx"], -(ai - v["av"]), ai - v["av"]))
    v["dy"] = float(np.clip(v["dy"], -(bi - v["bv"]), bi - v["bv"]))
    for _ in range(40):
        phi = np.linspace(0, 2 * math.pi, 64, endpoint=False)
        px = (v["dx"] + v["av"] * np.cos(phi)) / ai
        py = (v["dy"] + v["bv"] * np.sin(phi)) / bi
        if np.max(px * px + py * py) < 0.995:
            break
        v["dx"] *= 0.85
        v["dy"] *= 0.85
        v["av"] *= 0.97
        v["bv"] *= 0.97
    v["i_gm"] = float(np.clip(v["i_gm"], 0.05, 0.93))
    v["i_wm"] = float(np.clip(v["i_wm"], v["i_gm"] + 0.02, 0.95))
    v["i_csf"] = float(np.clip(v["i_csf"], v["i_wm"] + 0.02, 0.99))
    v["eps"] = float(np.clip(v["eps"], 0.0, 2.0))
    return PhantomLatent(**v)


def canonicalize_latent(w: PhantomLatent) -> PhantomLatent:
    """Fold the rotation into (-pi/4, pi/4] using the quarter-turn relabeling
    symmetry of axis-aligned ellipses: for eps = 0,
    (a, b, av, bv, theta, dx, dy) renders identically to
    (b, a, bv, av, theta + pi/2, dy, -dx).  Picking the representative with
    the smallest rotation makes the geometric fields identifiable."""
    a, b, av, bv = w.a, w.b, w.av, w.bv
    th, dx, dy = w.theta, w.dx, w.dy
    while th > math.pi / 4:
        a, b, av, bv = b, a, bv, av
        th -= math.pi / 2
        dx, dy = -dy, dx
    while th <= -math.pi / 4:
        a, b, av, bv = b, a, bv, av
        th += math.pi / 2
        dx, dy = dy, -dx
    if (a, b, av, bv, th, dx, dy) == (w.a, w.b, w.av, w.bv,
                                       w.theta, w.dx, w.dy):
        return w
    return replace(w, a=a, b=b, av=av, bv=bv, theta=th, dx=dx, dy=dy)


def _moment_ellipse(mass: np.ndarray):
    """Centroid, semi-axes and orientation of a fractional mask, assuming a
    solid ellipse (second central moment = axis^2 / 4)."""
    total = mass.sum()
    ys, xs = np.mgrid[0:mass.shape[0], 0:mass.shape[1]]
    xs = xs + 0.5
    ys = ys + 0.5
    cx = float((mass * xs).sum() / total)
    cy = float((mass * ys).sum() / total)
    dxs, dys = xs - cx, ys - cy
    mxx = float((mass * dxs * dxs).sum() / total)
    myy = float((mass * dys * dys).sum() / total)
    mxy = float((mass * dxs * dys).sum() / total)
    cov = np.array([[mxx, mxy], [mxy, myy]])
    evals, evecs = np.linalg.eigh(cov)        # ascending
    major = 2.0 * math.sqrt(max(evals[1], 1e-12))
    minor = 2.0 * math.sqrt(max(evals[0], 1e-12))
    vx, vy = evecs[:, 1]
    theta = math.atan2(vy, vx)
    if theta > math.pi / 2:
        theta -= math.pi
    elif theta < -math.pi / 2:
        theta += math.pi
    return cx, cy, major, minor, theta


_REFINE_STEPS = {
    "a": 0.25, "b": 0.25, "av": 0.15, "bv": 0.15, "g": 0.12,
    "theta": 0.012, "dx": 0.15, "dy": 0.15,
    "i_csf": 0.008, "i_gm": 0.008, "i_wm": 0.008, "eps": 0.06,
}


def reconstruction_error(img: PhantomImage, w: PhantomLatent,
                         config: PhantomConfig = DEFAULT_CONFIG) -> float:
    return float(np.abs(render(w, config).pixels - img.pixels).mean())


def encode(img: PhantomImage, config: PhantomConfig = DEFAULT_CONFIG,
           max_sweeps: int = 6, error_threshold: float = 0.05,
           refine: bool = True, stop_error: float = 8e-4) -> PhantomLatent:
    """Invert an image to its latent: moment-based initialization followed by
    pattern-search coordinate descent on mean absolute pixel error."""
    p = img.pixels
    if np.min(p) < 0 or np.max(p) > 1 or not np.all(np.isfinite(p)):
        raise errors.InvalidImage("pixel values outside [0,1]")
    gm, wm, csf = _class_masses(p, config)
    tissue = gm + wm + csf
    if tissue.sum() < 50:
        raise errors.InvalidImage("no tissue found")
    if csf.sum() < 1 or gm.sum() < 1:
        raise errors.InvalidImage("missing tissue class")

    cx0, cy0, a, b, theta = _moment_ellipse(tissue)
    vcx, vcy, _, _, _ = _moment_ellipse(csf)
    # ventricle axes from its area and the covariance aspect along brain axes
    ct, st = math.cos(theta), math.sin(theta)
    ys, xs = np.mgrid[0:p.shape[0], 0:p.shape[1]]
    xs, ys = xs + 0.5 - vcx, ys + 0.5 - vcy
    xr = ct * xs + st * ys
    yr = -st * xs + ct * ys
    tot = csf.sum()
    vxx = float((csf * xr * xr).sum() / tot)
    vyy = float((csf * yr * yr).sum() / tot)
    av = 2.0 * math.sqrt(max(vxx, 1e-9))
    bv = 2.0 * math.sqrt(max(vyy, 1e-9))
    c = config.resolution / 2.0
    odx = ct * (vcx - c) + st * (vcy - c)
    ody = -st * (vcx - c) + ct * (vcy - c)
    try:
        g = ring_thickness_for_gmv(a, b, float(gm.sum()))
    except errors.InvalidLatent:
        g = 0.1 * min(a, b)

    # intensities from near-pure pixels, config defaults as fallback
    def _pure_mean(mask, default):
        sel = mask > 0.999
        return float(p[sel].mean()) if sel.sum() >= 20 else default

    init = np.array([a, b, av, bv, g, theta, odx, ody,
                     _pure_mean(csf, config.i_csf),
                     _pure_mean(gm, config.i_gm),
                     _pure_mean(wm, config.i_wm),
                     0.0])
    w = canonicalize_latent(clamp_latent(init, config))
    if not refine:
        return w

    best = reconstruction_error(img, w, config)
    steps = dict(_REFINE_STEPS)
    for _ in range(max_sweeps):
        if best < stop_error:
            break
        improved = False
        for name in LATENT_FIELDS:
            step = steps[name]
            for sign in (1.0, -1.0):
                cand_vec = w.vector()
                cand_vec[LATENT_FIELDS.index(name)] += sign * step
                cand = clamp_latent(cand_vec, config)
                err = reconstruction_error(img, cand, config)
                if err < best - 1e-7:
                    w, best = cand, err
                    improved = True
                    break
        if not improved:
            for name in steps:
                steps[name] *= 0.5
            if steps["a"] < 0.02:
                break
    if best > error_threshold:
        raise errors.NotConverged(
            f"reconstruction error {best:.4f} above {error_threshold}")
    cand = canonicalize_latent(w)
    if cand is not w and reconstruction_error(img, cand, config) <= best + 1e-9:
        w = cand
    return w


def difference_map(a: PhantomImage, b: PhantomImage) -> np.ndarray:
    """Signed pixelwise a - b in [-1, 1]."""
    if a.pixels.shape != b.pixels.shape:
        raise errors.ShapeMismatch(
            f"{a.pixels.shape} vs {b.pixels.shape}")
    return a.pixels - b.pixels


def save_png(img: PhantomImage, path) -> None:
    from PIL import Image

    q = np.round(img.pixels * 255).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path)


def load_png(path) -> PhantomImage:
    from PIL import Image

    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=float) / 255.0
    return PhantomImage(pixels=arr)


def png_bytes(img: PhantomImage) -> bytes:
    import io

    from PIL import Image

    q = np.round(img.pixels * 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(q, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def diff_png_bytes(diff: np.ndarray, scale: float = 0.5) -> bytes:
    """Signed map rendered blue (negative) to red (positive) on a fixed
    symmetric scale."""
    import io

    from PIL import Image

    t = np.clip(diff / scale, -1.0, 1.0)
    rgb = np.zeros(diff.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.round(np.clip(t, 0, 1) * 255)
    rgb[..., 2] = np.round(np.clip(-t, 0, 1) * 255)
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
