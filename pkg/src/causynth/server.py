"""HTTP JSON API over a loaded model bundle.

All endpoints are read-only with respect to the bundle; the only shared
mutable state is an insert-only image cache keyed by content hash, so
concurrent identical requests always return identical answers.  Images
referenced in responses are fetched separately as PNGs by their id.

Error contract: malformed request bodies are 400, unknown image ids are
404, values outside a variable's domain are 422 (the offending variable
named in the payload), anything unexpected is 500 with an opaque id.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import replace
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, errors, inference, ism, metrics, phantom
from .bundle import ModelBundle
from .cohort import Session
from .variables import CONSTANT, DESCRIPTIONS, DISCRETE, TABULAR, Variable
from .variables import check_domain

#: non-volume latent coordinates used when a request carries no image:
#: a neutral upright phantom whose geometry is solved from the volumes
NEUTRAL_STYLE = {"ratio": 1.25, "vratio": 1.0, "theta": 0.0,
                 "dx": 0.0, "dy": 0.0, "eps": 0.0}


class StateBody(BaseModel):
    values: dict[str, float]
    time: float = 0.0
    image_id: Optional[str] = None


class InterventionBody(BaseModel):
    target: str
    value: float
    step: int = 0
    persistent: bool = False


class PredictBody(BaseModel):
    state: StateBody
    dt: float
    interventions: list[InterventionBody] = Field(default_factory=list)


class QueryBody(BaseModel):
    baseline: StateBody
    interventions: list[InterventionBody] = Field(default_factory=list)
    horizon: int = 1
    step_dt: float = 1.0


class RolloutBody(BaseModel):
    query: QueryBody
    with_images: bool = True


class CounterfactualBody(BaseModel):
    state: StateBody
    intervention: InterventionBody
    target: str
    dt: float = 1.0


class ClassifyBody(BaseModel):
    state: StateBody


class ImageCache:
    """Insert-only content-hash keyed store; publication under a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._images = {}

    def put(self, img: phantom.PhantomImage) -> str:
        key = img.content_hash()
        with self._lock:
            self._images.setdefault(key, img)
        return key

    def get(self, key: str) -> phantom.PhantomImage:
        with self._lock:
            img = self._images.get(key)
        if img is None:
            raise errors.UnknownImage(key)
        return img


def _variable(name: str) -> Variable:
    try:
        return Variable(name)
    except ValueError:
        raise errors.UnknownVariable(name)


def _parse_state(body: StateBody, cache: ImageCache) -> inference.State:
    values = {}
    for key, val in body.values.items():
        var = _variable(key)
        check_domain(var, float(val))
        values[var] = float(val)
    image = cache.get(body.image_id) if body.image_id else None
    return inference.State(values=values, time=body.time, image=image)


def _parse_intervention(body: InterventionBody) -> inference.Intervention:
    var = _variable(body.target)
    check_domain(var, float(body.value))
    return inference.Intervention(target=var, value=float(body.value),
                                  step=body.step, persistent=body.persistent)


def _state_json(state: inference.State, image_id=None) -> dict:
    out = {"values": {v.value: state.values[v] for v in TABULAR},
           "time": state.time}
    if image_id is not None:
        out["image_id"] = image_id
    return out


def _baseline_image(state: inference.State,
                    latent_model) -> phantom.PhantomImage:
    w = phantom.latent_from_volumes(
        state.values[Variable.TIV], state.values[Variable.VV],
        state.values[Variable.GMV], NEUTRAL_STYLE, latent_model.config)
    return phantom.render(w, latent_model.config)


def create_app(bundle: ModelBundle) -> FastAPI:
    app = FastAPI(title="causynth gateway", version=__version__)
    cache = ImageCache()

    @app.exception_handler(RequestValidationError)
    async def on_schema(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "error": "schema_violation",
            "detail": [{"loc": [str(x) for x in e["loc"]],
                        "msg": e["msg"]} for e in exc.errors()]})

    @app.exception_handler(errors.UnknownImage)
    async def on_image(_req: Request, exc: errors.UnknownImage):
        return JSONResponse(status_code=404, content={
            "error": "unknown_image", "detail": str(exc)})

    @app.exception_handler(errors.CausynthError)
    async def on_domain(_req: Request, exc: errors.CausynthError):
        variable = getattr(exc, "variable", None)
        return JSONResponse(status_code=422, content={
            "error": "domain_violation", "detail": str(exc),
            "variable": variable})

    @app.exception_handler(Exception)
    async def on_internal(_req: Request, exc: Exception):
        return JSONResponse(status_code=500, content={
            "error": "internal", "id": uuid.uuid4().hex})

    @app.get("/api/health")
    def health():
        return {"version": __version__,
                "bundle_format": bundle.version,
                "sim_config_hash": bundle.sim_config_hash}

    @app.get("/api/graph")
    def graph():
        return bundle.graph.to_json()

    @app.get("/api/variables")
    def variables():
        out = []
        for v in TABULAR:
            desc, unit = DESCRIPTIONS[v]
            out.append({"id": v.value, "description": desc, "unit": unit,
                        "group": v.group.value,
                        "constant": v in CONSTANT,
                        "discrete": v in DISCRETE})
        return out

    @app.post("/api/predict")
    def predict(body: PredictBody):
        state = _parse_state(body.state, cache)
        if body.dt <= 0:
            raise errors.InvalidRange("dt must be > 0")
        nxt = inference.step(bundle.scm, state, body.dt,
                             [_parse_intervention(iv)
                              for iv in body.interventions])
        return {"state": _state_json(nxt)}

    @app.post("/api/rollout")
    def rollout(body: RolloutBody):
        q = body.query
        baseline = _parse_state(q.baseline, cache)
        if (body.with_images and bundle.latent is not None
                and baseline.image is None):
            baseline = replace(baseline,
                               image=_baseline_image(baseline, bundle.latent))
        query = inference.Query(
            baseline=baseline,
            interventions=tuple(_parse_intervention(iv)
                                for iv in q.interventions),
            horizon=q.horizon, step_dt=q.step_dt)
        states = inference.rollout(bundle.scm, query,
                                   latent_model=bundle.latent
                                   if body.with_images else None)
        traj = []
        for st in states:
            image_id = cache.put(st.image) if st.image is not None else None
            traj.append(_state_json(st, image_id=image_id))
        return {"trajectory": traj}

    @app.post("/api/counterfactual")
    def counterfactual(body: CounterfactualBody):
        state = _parse_state(body.state, cache)
        iv = _parse_intervention(body.intervention)
        target = _variable(body.target)
        factual, counter, delta = inference.counterfactual_delta(
            bundle.scm, state, iv, target, dt=body.dt)
        return {"target": target.value, "factual": factual,
                "counterfactual": counter, "delta": delta}

    @app.post("/api/classify")
    def classify(body: ClassifyBody):
        if bundle.classifier is None:
            raise errors.ClassMissing("bundle carries no classifier")
        state = _parse_state(body.state, cache)
        image = state.image
        if image is None and bundle.classifier.with_image:
            if bundle.latent is None:
                raise errors.InvalidImage(
                    "classifier needs an image and the bundle has no "
                    "latent model to synthesize one")
            image = _baseline_image(state, bundle.latent)
        session = Session("query", max(state.time, 0.0),
                          dict(state.values), image=image)
        probs = metrics.classify(bundle.classifier, session)
        return {"probabilities": [float(p) for p in probs],
                "classes": ["NC", "MCI", "AD"]}

    @app.get("/api/image/{image_id}.png")
    def image_png(image_id: str):
        img = cache.get(image_id)
        return Response(content=phantom.png_bytes(img),
                        media_type="image/png")

    @app.get("/api/diff/{id_a}/{id_b}.png")
    def diff_png(id_a: str, id_b: str):
        a, b = cache.get(id_a), cache.get(id_b)
        diff = ism.difference_map(a, b)
        return Response(content=phantom.diff_png_bytes(diff),
                        media_type="image/png")

    return app
