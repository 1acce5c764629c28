"""End-to-end orchestration: sampling, merge, visibility, downsample, normal
estimation, clustering, profile slicing, target generation, and the filter
chain, all driven by one config. Every stage's cloud is persisted into a run
directory together with a manifest (content hashes), the run record, and the
plan, so interactive sessions can suspend at cluster selection and resume."""

from __future__ import annotations

import hashlib
import json
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import targets as tg
from .acquisition import majority_vote_merge, sample_clouds
from .cloud import PointCloud, estimate_normals, hidden_point_removal, voxel_downsample
from .clustering import ClusterSet, ClusterSummary, CropBox, dbscan, resolve_selection, select_clusters
from .config import PipelineConfig, config_from_dict, config_to_dict
from .errors import InsPathError, InvalidArgumentError, StageError
from .fileio import read_cloud, write_cloud
from .profiles import extract_profiles

STAGE_ORDER = ("merge", "visible", "downsample", "normals", "object", "profile",
               "targets_generated", "targets_final")


@dataclass
class RunRecord:
    """Everything needed to inspect or reproduce one pipeline run."""

    run_id: str
    run_dir: Path
    config: PipelineConfig
    source_info: dict = field(default_factory=dict)
    seed: int | None = None
    sample_counts: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)
    state: str = "rendering"
    selected_ids: list | None = None
    slice_used: dict | None = None
    plan_versions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    plan: tg.PathPlan | None = None

    @property
    def plan_path(self) -> Path:
        return self.run_dir / "plan.json"

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "config": config_to_dict(self.config),
            "source": self.source_info,
            "seed": self.seed,
            "sample_counts": [int(c) for c in self.sample_counts],
            "counts": {k: int(v) for k, v in self.counts.items()},
            "timings_ms": {k: float(v) for k, v in self.timings_ms.items()},
            "state": self.state,
            "selected_ids": self.selected_ids,
            "slice_used": self.slice_used,
            "plan_versions": self.plan_versions,
            "warnings": self.warnings,
        }


class RunStore:
    """Path bookkeeping + JSON persistence for one run directory."""

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)

    def stage_path(self, name: str) -> Path:
        return self.run_dir / f"stage-{name}.ply"

    def save_stage(self, name: str, cloud: PointCloud) -> None:
        path = self.stage_path(name)
        write_cloud(cloud, path, "ply-binary")
        manifest = self.load_manifest()
        manifest["stages"][name] = {
            "file": path.name,
            "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            "points": len(cloud),
        }
        self.write_json("manifest.json", manifest)

    def load_stage(self, name: str) -> PointCloud:
        return read_cloud(self.stage_path(name))

    def load_manifest(self) -> dict:
        path = self.run_dir / "manifest.json"
        if path.exists():
            return json.loads(path.read_text())
        return {"stages": {}}

    def write_json(self, name: str, doc: dict) -> None:
        (self.run_dir / name).write_text(json.dumps(doc, indent=2) + "\n")

    def read_json(self, name: str) -> dict:
        return json.loads((self.run_dir / name).read_text())

    def save_clusters(self, cset: ClusterSet) -> None:
        self.write_json("clusters.json", {
            "labels": [int(x) for x in cset.labels],
            "summaries": [s.to_json() for s in cset.summaries],
        })

    def load_clusters(self) -> ClusterSet:
        doc = self.read_json("clusters.json")
        summaries = tuple(
            ClusterSummary(s["id"], s["count"], np.asarray(s["centroid"]),
                           CropBox(s["aabb"]["min"], s["aabb"]["max"]))
            for s in doc["summaries"])
        return ClusterSet(np.asarray(doc["labels"], dtype=np.int64), summaries)

    def save_record(self, record: RunRecord) -> None:
        self.write_json("record.json", record.to_json())

    def save_session(self, record: RunRecord, error: str | None = None) -> None:
        self.write_json("session.json", {
            "id": record.run_id,
            "state": record.state,
            "selected_ids": record.selected_ids,
            "slice": record.slice_used,
            "plan_versions": record.plan_versions,
            "error": error,
        })


def load_record(run_dir) -> RunRecord:
    store = RunStore(Path(run_dir))
    doc = store.read_json("record.json")
    return RunRecord(
        run_id=doc["run_id"],
        run_dir=store.run_dir,
        config=config_from_dict(doc["config"]),
        source_info=doc.get("source", {}),
        seed=doc.get("seed"),
        sample_counts=doc.get("sample_counts", []),
        counts=doc.get("counts", {}),
        timings_ms=doc.get("timings_ms", {}),
        state=doc["state"],
        selected_ids=doc.get("selected_ids"),
        slice_used=doc.get("slice_used"),
        plan_versions=doc.get("plan_versions", []),
        warnings=doc.get("warnings", []),
    )


def _staged(record: RunRecord, stage: str, fn):
    t0 = time.perf_counter()
    try:
        result = fn()
    except InsPathError as exc:
        record.state = "error"
        raise StageError(stage, exc) from exc
    record.timings_ms[stage] = (time.perf_counter() - t0) * 1e3
    return result


def run(source, config: PipelineConfig, out_dir, run_id: str | None = None,
        seed: int | None = None, source_info: dict | None = None) -> RunRecord:
    """Execute the full pipeline on `source` under `config`.

    With cluster_selection="interactive" the run suspends after clustering in
    state "awaiting_selection"; continue it with `resume`. Otherwise the plan
    is produced headlessly and the state ends at "planned".
    """
    if run_id is None:
        run_id = time.strftime("%Y%m%d-%H%M%S") + "-" + secrets.token_hex(2)
    run_dir = Path(out_dir) / f"run-{run_id}"
    run_dir.mkdir(parents=True, exist_ok=True)
    store = RunStore(run_dir)
    record = RunRecord(run_id=run_id, run_dir=run_dir, config=config,
                       source_info=source_info or {}, seed=seed)

    camera_origin = np.asarray(getattr(source, "camera_pose").translation)

    clouds = _staged(record, "sample",
                     lambda: sample_clouds(source, config.s, config.crop, config.ground_z))
    record.sample_counts = [len(c) for c in clouds]

    merged = _staged(record, "merge",
                     lambda: majority_vote_merge(clouds, config.vote_tolerance))
    record.counts["merge"] = len(merged)
    store.save_stage("merge", merged)

    visible = merged
    if config.hpr.enabled:
        hpr_cam = config.hpr.camera if config.hpr.camera is not None else camera_origin
        idx = _staged(record, "visible",
                      lambda: hidden_point_removal(merged, hpr_cam, config.hpr.radius_scale))
        visible = merged.select(idx)
        store.save_stage("visible", visible)
    record.counts["visible"] = len(visible)

    down = _staged(record, "downsample", lambda: voxel_downsample(visible, config.voxel))
    record.counts["downsample"] = len(down)
    store.save_stage("downsample", down)

    viewpoint = (config.normals.viewpoint if config.normals.viewpoint is not None
                 else camera_origin)
    with_normals = _staged(record, "normals",
                           lambda: estimate_normals(down, config.normals.k, viewpoint))
    record.counts["normals"] = len(with_normals)
    store.save_stage("normals", with_normals)

    cset = _staged(record, "clusters",
                   lambda: dbscan(with_normals, config.dbscan_eps, config.dbscan.min_pts))
    record.counts["clusters"] = len(cset.summaries)
    store.save_clusters(cset)

    if config.cluster_selection == "interactive":
        record.state = "awaiting_selection"
        store.save_record(record)
        store.save_session(record)
        return record

    ids = _staged(record, "select",
                  lambda: resolve_selection(cset, config.cluster_selection))
    return _continue(record, store, with_normals, cset, ids, slice_override=None)


def resume(checkpoint: RunRecord, ids, slice_override: dict | None = None) -> RunRecord:
    """Continue a suspended (or planned) run with operator choices. Re-entrant:
    each call produces a new plan version; upstream artifacts are untouched."""
    if checkpoint.state not in ("awaiting_selection", "planned"):
        raise InvalidArgumentError(
            f"run {checkpoint.run_id} is in state {checkpoint.state!r}, cannot resume")
    store = RunStore(checkpoint.run_dir)
    with_normals = store.load_stage("normals")
    cset = store.load_clusters()
    ids = resolve_selection(cset, ids if ids is not None else "largest")
    return _continue(checkpoint, store, with_normals, cset, ids, slice_override)


def _continue(record: RunRecord, store: RunStore, with_normals: PointCloud,
              cset: ClusterSet, ids: list, slice_override: dict | None) -> RunRecord:
    config = record.config
    prior_state = record.state
    try:
        obj = _staged(record, "select", lambda: select_clusters(cset, with_normals, ids))
        record.selected_ids = [int(i) for i in ids]
        record.counts["object"] = len(obj)
        store.save_stage("object", obj)

        spec = config.slice_spec(slice_override)
        profiles = _staged(record, "profile", lambda: extract_profiles(obj, spec))
        record.counts["profile"] = sum(len(p) for p in profiles)
        record.counts["rows"] = len(profiles)
        record.slice_used = {
            "mode": spec.mode,
            "direction": None if spec.direction is None else [float(x) for x in spec.direction],
            "segment": None if spec.segment is None else
            {"min": [float(x) for x in spec.segment.min],
             "max": [float(x) for x in spec.segment.max]},
            "band_width": spec.band_width,
            "row_count": spec.row_count,
            "min_step": spec.min_step,
        }

        plan = _staged(record, "targets", lambda: _make_plan(record, profiles))
    except StageError:
        record.state = prior_state if prior_state != "rendering" else "error"
        store.save_record(record)
        raise
    record.plan = plan
    record.state = "planned"

    plan_bytes = tg.plan_to_json_bytes(plan)
    version = len(record.plan_versions) + 1
    version_name = f"plan-v{version}.json"
    (record.run_dir / version_name).write_bytes(plan_bytes)
    record.plan_path.write_bytes(plan_bytes)
    record.plan_versions.append(version_name)
    store.save_record(record)
    store.save_session(record)
    return record


def _make_plan(record: RunRecord, profiles) -> tg.PathPlan:
    config = record.config
    generated = tg.targets_from_profiles(profiles, config.standoff)
    record.counts["targets_generated"] = len(generated)

    def gen_ids(ts):
        return {t.gen_index for t in ts}

    after_anom = tg.filter_anomalies(generated)
    after_thresh = tg.filter_threshold(after_anom, config.min_clearance, config.ground_z)
    after_close = tg.filter_close(after_thresh, config.voxel)
    after_dec = tg.decimate(after_close, config.decimation_n)
    dropped = {
        "anomaly": sorted(gen_ids(generated) - gen_ids(after_anom)),
        "threshold": sorted(gen_ids(after_anom) - gen_ids(after_thresh)),
        "proximity": sorted(gen_ids(after_thresh) - gen_ids(after_close)),
        "decimation": sorted(gen_ids(after_close) - gen_ids(after_dec)),
    }
    record.counts["targets_final"] = len(after_dec)

    params = dict(config_to_dict(config))
    del params["cluster_selection"]
    params["selected_ids"] = record.selected_ids
    params["slice"] = record.slice_used
    params["seed"] = record.seed
    return tg.finalize_plan(after_dec, config.reverse, config.hand_eye,
                            config.base_in_world, dropped=dropped, params=params)
