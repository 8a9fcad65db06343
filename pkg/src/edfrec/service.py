"""HTTP interface: live recognition, sample submission, model lifecycle.

Recognition runs against an immutable model snapshot that is swapped
atomically by an explicit rebuild; sample submissions append to a
pending dataset file on disk and never change the live model.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .classifier import classify
from .dtw import DtwConfig
from .features import FeatureConfig, extract_curvature_points, extract_edf
from .ink import (
    OOV_LABEL,
    Dataset,
    DatasetError,
    Point,
    Stroke,
    parse_dataset,
    stroke_to_record,
)
from .smoothing import smooth_stroke
from .trainer import ModelError, ReferenceModel, TrainerConfig, build_model, save_model

log = logging.getLogger(__name__)

DEFAULT_PORT = 8472


@dataclass
class ServiceState:
    vocabulary: list[str]
    pending_path: Path
    base_path: Path | None = None
    model: ReferenceModel | None = None
    feature_config: FeatureConfig = FeatureConfig()
    trainer_config: TrainerConfig = TrainerConfig()
    dtw_config: DtwConfig = DtwConfig()
    _append_lock: threading.Lock = field(default_factory=threading.Lock)
    _rebuild_lock: threading.Lock = field(default_factory=threading.Lock)
    _id_counter: "itertools.count" = field(default_factory=itertools.count)

    def combined_dataset(self) -> Dataset:
        text = ""
        if self.base_path is not None and self.base_path.exists():
            text += self.base_path.read_text("utf-8")
        if self.pending_path.exists():
            text += self.pending_path.read_text("utf-8")
        return parse_dataset(text, self.vocabulary)

    def next_sample_id(self) -> str:
        existing: set[str] = set()
        for path in (self.base_path, self.pending_path):
            if path is not None and path.exists():
                for line in path.read_text("utf-8").splitlines():
                    if line.strip():
                        try:
                            existing.add(json.loads(line).get("id", ""))
                        except json.JSONDecodeError:
                            pass
        while True:
            candidate = f"sample_{next(self._id_counter):06d}"
            if candidate not in existing:
                return candidate


class RecognizeRequest(BaseModel):
    points: list[list[float]]
    method: str = "2"
    top_k: int = Field(default=3, ge=1)


class SampleRequest(BaseModel):
    points: list[list[float]]
    label: str
    writer: str


def _points_from_body(raw: list[list[float]]) -> tuple[Point, ...]:
    arities = {len(p) for p in raw}
    if not raw or not arities <= {2, 3} or len(arities) > 1:
        raise HTTPException(400, "points must be [x, y] or [x, y, t] arrays, unmixed")
    points: list[Point] = []
    try:
        for p in raw:
            pt = Point(float(p[0]), float(p[1]), int(p[2]) if len(p) == 3 else None)
            if points and points[-1].same_position(pt):
                continue
            points.append(pt)
    except (DatasetError, ValueError) as e:
        raise HTTPException(400, f"invalid points: {e}") from None
    if len(points) < 2:
        raise HTTPException(400, "need at least 2 distinct points")
    return tuple(points)


def create_app(state: ServiceState, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="edfrec recognizer", version="1")
    app.state.service = state
    if cors_origins:
        app.add_middleware(
            CORSMiddleware, allow_origins=cors_origins,
            allow_methods=["*"], allow_headers=["*"],
        )
    else:
        app.add_middleware(
            CORSMiddleware,
            allow_origin_regex=r"http://(localhost|127\.0\.0\.1)(:\d+)?",
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/v1/primitives")
    def primitives():
        return {"labels": state.vocabulary}

    @app.get("/api/v1/model")
    def model_summary():
        model = state.model
        if model is None:
            raise HTTPException(503, "no model loaded")
        return {
            "version": model.version,
            "labels": [
                {"label": lm.label, "tau": lm.tau, "references": len(lm.references)}
                for lm in model.labels
            ],
            "reference_count": len(model.all_references()),
        }

    @app.post("/api/v1/recognize")
    def recognize(req: RecognizeRequest):
        model = state.model
        if model is None:
            raise HTTPException(503, "no model loaded")
        if req.method not in ("1", "2"):
            raise HTTPException(400, f"method must be '1' or '2', got {req.method!r}")
        points = _points_from_body(req.points)
        stroke = Stroke(id="query", writer="query", points=points)
        smoothed = smooth_stroke(stroke, state.feature_config.smoothing)
        cps = extract_curvature_points(smoothed, state.feature_config.epsilon)
        edf = extract_edf(smoothed, cps, state.feature_config.y_up)
        result = classify(edf, model, req.method, state.dtw_config)
        return {
            "method": req.method,
            "ranking": [
                {"label": label, "score": score}
                for label, score in result.ranking[: req.top_k]
            ],
            "curvature_count": cps.k,
            "edf_length": len(edf),
        }

    @app.post("/api/v1/samples")
    def submit_sample(req: SampleRequest):
        if req.label != OOV_LABEL and req.label not in state.vocabulary:
            raise HTTPException(400, f"label {req.label!r} not in vocabulary")
        if not req.writer:
            raise HTTPException(400, "writer must be non-empty")
        points = _points_from_body(req.points)
        with state._append_lock:
            sample_id = state.next_sample_id()
            stroke = Stroke(
                id=sample_id, writer=req.writer, points=points, label=req.label
            )
            line = json.dumps(stroke_to_record(stroke)) + "\n"
            state.pending_path.parent.mkdir(parents=True, exist_ok=True)
            with open(state.pending_path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        return {"id": sample_id}

    @app.post("/api/v1/model/rebuild")
    def rebuild():
        if not state._rebuild_lock.acquire(blocking=False):
            raise HTTPException(409, "rebuild already in progress")
        try:
            try:
                dataset = state.combined_dataset()
            except DatasetError as e:
                raise HTTPException(422, f"cannot read training data: {e}") from None
            try:
                model = build_model(
                    dataset,
                    state.feature_config,
                    state.trainer_config,
                    state.dtw_config,
                )
            except ModelError as e:
                raise HTTPException(422, str(e)) from None
            state.model = model  # atomic reference swap
            return {
                "labels": model.label_names(),
                "reference_count": len(model.all_references()),
            }
        finally:
            state._rebuild_lock.release()

    return app


def save_model_file(model: ReferenceModel, path: Path) -> None:
    path.write_text(save_model(model), encoding="utf-8")
