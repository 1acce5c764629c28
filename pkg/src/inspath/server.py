"""HTTP session API over a run directory: cluster payloads for the viewer,
operator selection, and plan retrieval. Session state lives in the run
directory (session.json + record.json), so restarting the server over the
same run reconstructs the same session."""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import pipeline
from .errors import ConfigError, EmptyProfileError, InsPathError, InvalidArgumentError, StageError

CLUSTER_POINT_CAP = 100_000


class SelectionRequest(BaseModel):
    ids: list[int]
    slice: dict | None = None


def _thin_indices(points: np.ndarray, cap: int) -> np.ndarray:
    """Representative subset (first point per voxel), growing the voxel until
    the payload fits under the cap. Keeps exact positions and labels."""
    n = len(points)
    if n <= cap:
        return np.arange(n)
    span = float(np.max(points.max(axis=0) - points.min(axis=0)))
    voxel = max(span / 256.0, 1e-9)
    while True:
        keys = np.floor((points - points.min(axis=0)) / voxel).astype(np.int64)
        _, first = np.unique(keys, axis=0, return_index=True)
        if len(first) <= cap:
            return np.sort(first)
        voxel *= 1.5


def create_app(run_dir, ui_dir=None) -> FastAPI:
    run_dir = Path(run_dir)
    record = pipeline.load_record(run_dir)
    store = pipeline.RunStore(run_dir)
    lock = threading.Lock()

    app = FastAPI(title="inspath session")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def session_doc() -> dict:
        return {
            "id": record.run_id,
            "state": record.state,
            "selected_ids": record.selected_ids,
            "slice": record.slice_used,
            "plan_versions": list(record.plan_versions),
            "counts": {k: int(v) for k, v in record.counts.items()},
        }

    def check_id(session_id: str):
        if session_id != record.run_id:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": [record.run_id]}

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        check_id(session_id)
        return session_doc()

    @app.get("/api/session/{session_id}/clusters")
    def get_clusters(session_id: str):
        check_id(session_id)
        if record.state not in ("awaiting_selection", "planned"):
            raise HTTPException(status_code=409,
                                detail=f"session in state {record.state!r}")
        cloud = store.load_stage("normals")
        cset = store.load_clusters()
        keep = _thin_indices(cloud.points, CLUSTER_POINT_CAP)
        return {
            "summaries": [s.to_json() for s in cset.summaries],
            "points": cloud.points[keep].tolist(),
            "labels": cset.labels[keep].tolist(),
            "colors": cloud.colors[keep].tolist() if cloud.colors is not None else None,
            "total_points": len(cloud),
            "thinned": len(keep) < len(cloud),
        }

    @app.post("/api/session/{session_id}/selection", status_code=202)
    def post_selection(session_id: str, req: SelectionRequest):
        check_id(session_id)
        with lock:
            if record.state not in ("awaiting_selection", "planned"):
                raise HTTPException(status_code=409,
                                    detail=f"session in state {record.state!r}")
            try:
                pipeline.resume(record, req.ids, slice_override=req.slice)
            except StageError as exc:
                raise HTTPException(status_code=422, detail=str(exc.cause)) from exc
            except (InvalidArgumentError, EmptyProfileError, ConfigError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            except InsPathError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "plan": f"/api/session/{record.run_id}/plan",
            "version": len(record.plan_versions),
            "state": record.state,
        }

    @app.get("/api/session/{session_id}/plan")
    def get_plan(session_id: str, version: int | None = None):
        check_id(session_id)
        if record.state != "planned":
            raise HTTPException(status_code=409,
                                detail=f"session in state {record.state!r}, no plan yet")
        if version is None:
            path = record.plan_path
        else:
            if version < 1 or version > len(record.plan_versions):
                raise HTTPException(status_code=404, detail=f"no plan version {version}")
            path = record.run_dir / record.plan_versions[version - 1]
        return Response(content=path.read_bytes(), media_type="application/json")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
