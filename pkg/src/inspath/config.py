"""Pipeline configuration: one dataclass per stage group, a strict JSON
loader (unknown keys rejected, errors name the JSON path), and a canonical
dict form used for run records and plan parameter snapshots."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cloud import CropBox
from .errors import ConfigError
from .geom import RigidTransform, Rotation
from .profiles import SliceSpec

_BIG = 1.0e6  # effectively-unbounded default crop


@dataclass(frozen=True, eq=False)
class HprConfig:
    enabled: bool = False
    camera: np.ndarray | None = None  # None: use the source camera position
    radius_scale: float = 100.0


@dataclass(frozen=True, eq=False)
class NormalsConfig:
    k: int = 10
    viewpoint: np.ndarray | None = None  # None: use the source camera position


@dataclass(frozen=True, eq=False)
class DbscanConfig:
    eps: float | None = None  # None: 2 x voxel
    min_pts: int = 10


@dataclass(frozen=True, eq=False)
class SliceConfig:
    mode: str = "auto"
    direction: np.ndarray | None = None
    segment: CropBox | None = None
    band_width: float | None = None  # None: 1.5 x voxel
    row_count: int = 1
    min_step: float | None = None  # None: voxel size


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    s: int = 5
    crop: CropBox = field(default_factory=lambda: CropBox((-_BIG,) * 3, (_BIG,) * 3))
    ground_z: float = -_BIG
    vote_tolerance: float = 0.05
    hpr: HprConfig = field(default_factory=HprConfig)
    voxel: float = 0.02
    normals: NormalsConfig = field(default_factory=NormalsConfig)
    dbscan: DbscanConfig = field(default_factory=DbscanConfig)
    cluster_selection: object = "largest"  # "largest" | "interactive" | [ids]
    slice: SliceConfig = field(default_factory=SliceConfig)
    standoff: float = 0.3
    min_clearance: float = 0.05
    decimation_n: int = 0
    reverse: bool = True
    hand_eye: RigidTransform = field(default_factory=RigidTransform.identity)
    base_in_world: RigidTransform = field(default_factory=RigidTransform.identity)

    @property
    def dbscan_eps(self) -> float:
        return self.dbscan.eps if self.dbscan.eps is not None else 2.0 * self.voxel

    @property
    def band_width(self) -> float:
        bw = self.slice.band_width
        return bw if bw is not None else 1.5 * self.voxel

    def slice_spec(self, override: dict | None = None) -> SliceSpec:
        """Resolved SliceSpec; `override` is a slice JSON dict (from the
        session API) replacing the configured one."""
        sl = self.slice
        if override is not None:
            sl = _parse_slice(override, "slice")
        return SliceSpec(
            mode=sl.mode, direction=sl.direction, segment=sl.segment,
            band_width=sl.band_width if sl.band_width is not None else 1.5 * self.voxel,
            row_count=sl.row_count,
            min_step=sl.min_step if sl.min_step is not None else self.voxel)


# --- parsing helpers ----------------------------------------------------------


def _err(path, message):
    raise ConfigError(message, path=path)


def _expect_keys(doc: dict, path: str, allowed: set):
    if not isinstance(doc, dict):
        _err(path or "config", f"expected an object, got {doc!r}")
    for key in doc:
        if key not in allowed:
            _err(f"{path}.{key}" if path else key, "unknown key")


def _number(doc, path, *, lo=None, hi=None, strict_lo=False):
    if isinstance(doc, bool) or not isinstance(doc, (int, float)):
        _err(path, f"expected a number, got {doc!r}")
    v = float(doc)
    if lo is not None and (v <= lo if strict_lo else v < lo):
        _err(path, f"must be {'>' if strict_lo else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        _err(path, f"must be <= {hi}, got {v}")
    return v


def _integer(doc, path, lo=None):
    if isinstance(doc, bool) or not isinstance(doc, int):
        _err(path, f"expected an integer, got {doc!r}")
    if lo is not None and doc < lo:
        _err(path, f"must be >= {lo}, got {doc}")
    return int(doc)


def _boolean(doc, path):
    if not isinstance(doc, bool):
        _err(path, f"expected a boolean, got {doc!r}")
    return doc


def _vec3(doc, path):
    if not isinstance(doc, (list, tuple)) or len(doc) != 3:
        _err(path, f"expected [x, y, z], got {doc!r}")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(doc)])


def _cropbox(doc, path):
    if not isinstance(doc, dict):
        _err(path, f"expected {{min, max}}, got {doc!r}")
    _expect_keys(doc, path, {"min", "max"})
    if "min" not in doc or "max" not in doc:
        _err(path, "needs both 'min' and 'max'")
    try:
        return CropBox(_vec3(doc["min"], f"{path}.min"), _vec3(doc["max"], f"{path}.max"))
    except ValueError as exc:
        _err(path, str(exc))


def _pose(doc, path):
    if not isinstance(doc, dict):
        _err(path, f"expected {{quaternion, translation}}, got {doc!r}")
    _expect_keys(doc, path, {"quaternion", "translation"})
    quat = doc.get("quaternion", [1.0, 0.0, 0.0, 0.0])
    if not isinstance(quat, (list, tuple)) or len(quat) != 4:
        _err(f"{path}.quaternion", f"expected [w, x, y, z], got {quat!r}")
    trans = _vec3(doc.get("translation", [0.0, 0.0, 0.0]), f"{path}.translation")
    try:
        return RigidTransform(Rotation(np.asarray(quat, dtype=np.float64)), trans)
    except ValueError as exc:
        _err(path, str(exc))


def _parse_slice(doc, path) -> SliceConfig:
    if not isinstance(doc, dict):
        _err(path, f"expected an object, got {doc!r}")
    _expect_keys(doc, path,
                 {"mode", "direction", "segment", "band_width", "row_count", "min_step"})
    mode = doc.get("mode", "auto")
    if mode not in ("auto", "direction", "segment"):
        _err(f"{path}.mode", f"must be auto|direction|segment, got {mode!r}")
    direction = doc.get("direction")
    if direction is not None:
        direction = _vec3(direction, f"{path}.direction")
        norm = np.linalg.norm(direction)
        if norm == 0:
            _err(f"{path}.direction", "must be non-zero")
        direction = direction / norm
    segment = _cropbox(doc["segment"], f"{path}.segment") if doc.get("segment") is not None else None
    band_width = doc.get("band_width")
    if band_width is not None:
        band_width = _number(band_width, f"{path}.band_width", lo=0.0, strict_lo=True)
    row_count = _integer(doc.get("row_count", 1), f"{path}.row_count", lo=1)
    min_step = doc.get("min_step")
    if min_step is not None:
        min_step = _number(min_step, f"{path}.min_step", lo=0.0, strict_lo=True)
    if (direction is not None) != (mode == "direction"):
        _err(f"{path}.direction", "given exactly when mode='direction'")
    if (segment is not None) != (mode == "segment"):
        _err(f"{path}.segment", "given exactly when mode='segment'")
    return SliceConfig(mode, direction, segment, band_width, row_count, min_step)


def config_from_dict(doc: dict) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")
    _expect_keys(doc, "", {
        "s", "crop", "ground_z", "vote_tolerance", "hpr", "voxel", "normals",
        "dbscan", "cluster_selection", "slice", "standoff", "min_clearance",
        "decimation_n", "reverse", "hand_eye", "base_in_world",
    })
    kw = {}
    if "s" in doc:
        kw["s"] = _integer(doc["s"], "s", lo=1)
    if "crop" in doc:
        kw["crop"] = _cropbox(doc["crop"], "crop")
    if "ground_z" in doc:
        kw["ground_z"] = _number(doc["ground_z"], "ground_z")
    if "vote_tolerance" in doc:
        kw["vote_tolerance"] = _number(doc["vote_tolerance"], "vote_tolerance", lo=0.0)
    if "hpr" in doc:
        sub = doc["hpr"]
        _expect_keys(sub, "hpr", {"enabled", "camera", "radius_scale"})
        kw["hpr"] = HprConfig(
            enabled=_boolean(sub.get("enabled", False), "hpr.enabled"),
            camera=_vec3(sub["camera"], "hpr.camera") if sub.get("camera") is not None else None,
            radius_scale=_number(sub.get("radius_scale", 100.0), "hpr.radius_scale",
                                 lo=0.0, strict_lo=True),
        )
    if "voxel" in doc:
        kw["voxel"] = _number(doc["voxel"], "voxel", lo=0.0, strict_lo=True)
    if "normals" in doc:
        sub = doc["normals"]
        _expect_keys(sub, "normals", {"k", "viewpoint"})
        kw["normals"] = NormalsConfig(
            k=_integer(sub.get("k", 10), "normals.k", lo=3),
            viewpoint=_vec3(sub["viewpoint"], "normals.viewpoint")
            if sub.get("viewpoint") is not None else None,
        )
    if "dbscan" in doc:
        sub = doc["dbscan"]
        _expect_keys(sub, "dbscan", {"eps", "min_pts"})
        eps = sub.get("eps")
        kw["dbscan"] = DbscanConfig(
            eps=_number(eps, "dbscan.eps", lo=0.0, strict_lo=True) if eps is not None else None,
            min_pts=_integer(sub.get("min_pts", 10), "dbscan.min_pts", lo=1),
        )
    if "cluster_selection" in doc:
        sel = doc["cluster_selection"]
        if isinstance(sel, list):
            sel = [_integer(v, f"cluster_selection[{i}]", lo=0) for i, v in enumerate(sel)]
        elif sel not in ("largest", "interactive"):
            _err("cluster_selection", f"must be 'largest', 'interactive' or an id list, got {sel!r}")
        kw["cluster_selection"] = sel
    if "slice" in doc:
        kw["slice"] = _parse_slice(doc["slice"], "slice")
    if "standoff" in doc:
        kw["standoff"] = _number(doc["standoff"], "standoff", lo=0.0)
    if "min_clearance" in doc:
        kw["min_clearance"] = _number(doc["min_clearance"], "min_clearance", lo=0.0)
    if "decimation_n" in doc:
        kw["decimation_n"] = _integer(doc["decimation_n"], "decimation_n", lo=0)
    if "reverse" in doc:
        kw["reverse"] = _boolean(doc["reverse"], "reverse")
    if "hand_eye" in doc:
        kw["hand_eye"] = _pose(doc["hand_eye"], "hand_eye")
    if "base_in_world" in doc:
        kw["base_in_world"] = _pose(doc["base_in_world"], "base_in_world")
    return PipelineConfig(**kw)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(doc)


# --- canonical dict form --------------------------------------------------------


def _vec_list(v):
    return None if v is None else [float(x) for x in v]


def _pose_dict(pose: RigidTransform) -> dict:
    return {"quaternion": [float(x) for x in pose.rotation.wxyz],
            "translation": [float(x) for x in pose.translation]}


def _slice_dict(sl: SliceConfig) -> dict:
    return {
        "mode": sl.mode,
        "direction": _vec_list(sl.direction),
        "segment": None if sl.segment is None else
        {"min": _vec_list(sl.segment.min), "max": _vec_list(sl.segment.max)},
        "band_width": sl.band_width,
        "row_count": sl.row_count,
        "min_step": sl.min_step,
    }


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Stable, JSON-ready form; load_config(json.dumps(...)) round-trips."""
    return {
        "s": cfg.s,
        "crop": {"min": _vec_list(cfg.crop.min), "max": _vec_list(cfg.crop.max)},
        "ground_z": cfg.ground_z,
        "vote_tolerance": cfg.vote_tolerance,
        "hpr": {"enabled": cfg.hpr.enabled, "camera": _vec_list(cfg.hpr.camera),
                "radius_scale": cfg.hpr.radius_scale},
        "voxel": cfg.voxel,
        "normals": {"k": cfg.normals.k, "viewpoint": _vec_list(cfg.normals.viewpoint)},
        "dbscan": {"eps": cfg.dbscan.eps, "min_pts": cfg.dbscan.min_pts},
        "cluster_selection": cfg.cluster_selection,
        "slice": _slice_dict(cfg.slice),
        "standoff": cfg.standoff,
        "min_clearance": cfg.min_clearance,
        "decimation_n": cfg.decimation_n,
        "reverse": cfg.reverse,
        "hand_eye": _pose_dict(cfg.hand_eye),
        "base_in_world": _pose_dict(cfg.base_in_world),
    }
