"""Turn ordered profiles into filtered, ordered end-effector target poses:
standoff placement along the normal, the three coordinate filters, decimation,
optional reversal, and the hand-eye / base transform into the robot frame."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .geom import RigidTransform, align_z_to_normal
from .profiles import Profile


@dataclass(frozen=True, eq=False)
class TargetPose:
    """One inspection pose plus where it came from.

    `source_index` points into the originating profile row; `gen_index` is the
    global position in the initially generated sequence and identifies the
    target in drop provenance.
    """

    pose: RigidTransform
    source_index: int
    row_index: int
    gen_index: int = -1

    def position(self) -> np.ndarray:
        return self.pose.translation

    def approach_axis(self) -> np.ndarray:
        """+z of the target frame; points at the surface."""
        return self.pose.rotation.matrix[:, 2]


@dataclass
class PathPlan:
    """Ordered targets plus which generated targets each filter removed."""

    targets: list
    dropped: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def poses_from_profile(profile: Profile, standoff: float) -> list[TargetPose]:
    """Place one target per profile point at `standoff` along its normal, tool
    +z axis aimed back at the surface (R z = -n)."""
    if standoff < 0:
        raise InvalidArgumentError(f"standoff must be >= 0, got {standoff}")
    out = []
    for i, (p, n) in enumerate(zip(profile.points, profile.normals)):
        rot = align_z_to_normal(-n)
        out.append(TargetPose(RigidTransform(rot, p + standoff * n),
                              source_index=i, row_index=profile.row_index))
    return out


def targets_from_profiles(profiles: list[Profile], standoff: float) -> list[TargetPose]:
    """Concatenate per-row targets and assign global generation indices."""
    flat = []
    for profile in profiles:
        flat.extend(poses_from_profile(profile, standoff))
    return [TargetPose(t.pose, t.source_index, t.row_index, gen_index=k)
            for k, t in enumerate(flat)]


def _rows(targets: list[TargetPose]):
    row: list[TargetPose] = []
    for t in targets:
        if row and t.row_index != row[-1].row_index:
            yield row
            row = []
        row.append(t)
    if row:
        yield row


def filter_anomalies(targets: list[TargetPose]) -> list[TargetPose]:
    """Drop targets whose coordinates buck the row's trend on two or more axes.

    Per row, each axis gets an expected trend from sign(last - first); targets
    before the middle element must not exceed the middle coordinate along an
    increasing axis (and after, must not fall below it), mirrored for
    decreasing axes. Rows shorter than three pass through unchanged.
    """
    out = []
    for row in _rows(targets):
        if len(row) < 3:
            out.extend(row)
            continue
        coords = np.array([t.position() for t in row])
        mid_i = len(row) // 2
        mid = coords[mid_i]
        trend = np.sign(coords[-1] - coords[0])
        for i, t in enumerate(row):
            if i == mid_i:
                out.append(t)
                continue
            bad_axes = 0
            for ax in range(3):
                s = trend[ax]
                if s == 0:
                    continue
                before = i < mid_i
                lo_side = before if s > 0 else not before
                ok = coords[i, ax] <= mid[ax] if lo_side else coords[i, ax] >= mid[ax]
                if not ok:
                    bad_axes += 1
            if bad_axes < 2:
                out.append(t)
    return out


def filter_threshold(targets: list[TargetPose], min_clearance: float,
                     ground_z: float) -> list[TargetPose]:
    """Drop targets closer to the ground plane than `min_clearance`."""
    if min_clearance < 0:
        raise InvalidArgumentError("min_clearance must be >= 0")
    cutoff = ground_z + min_clearance
    return [t for t in targets if t.position()[2] >= cutoff]


def filter_close(targets: list[TargetPose], voxel: float) -> list[TargetPose]:
    """Greedy spacing filter: within each row, drop any target closer than
    twice the downsample resolution to the last kept one."""
    if voxel <= 0:
        raise InvalidArgumentError("voxel must be positive")
    limit = 2.0 * voxel
    out = []
    for row in _rows(targets):
        kept = [row[0]]
        for t in row[1:]:
            if np.linalg.norm(t.position() - kept[-1].position()) >= limit:
                kept.append(t)
        out.extend(kept)
    return out


def decimate(targets: list[TargetPose], n: int) -> list[TargetPose]:
    """Keep every (n+1)-th target of each row plus always the row's last."""
    if n < 0:
        raise InvalidArgumentError("decimation count must be >= 0")
    if n == 0:
        return list(targets)
    out = []
    for row in _rows(targets):
        keep = list(range(0, len(row), n + 1))
        if keep[-1] != len(row) - 1:
            keep.append(len(row) - 1)
        out.extend(row[i] for i in keep)
    return out


def finalize_plan(targets: list[TargetPose], reverse: bool,
                  hand_eye: RigidTransform, base_in_world: RigidTransform,
                  dropped: dict | None = None, params: dict | None = None) -> PathPlan:
    """Optionally reverse the whole path (rows renumbered in the new traversal
    order, preserving serpentine continuity), then map every world pose into
    the end-effector frame: T_e = base_in_world^-1 . T_p . hand_eye^-1."""
    ordered = list(reversed(targets)) if reverse else list(targets)
    base_inv = base_in_world.inverse()
    he_inv = hand_eye.inverse()
    out = []
    row_id = -1
    last_row = None
    for t in ordered:
        if t.row_index != last_row:
            row_id += 1
            last_row = t.row_index
        out.append(TargetPose(base_inv @ t.pose @ he_inv,
                              t.source_index, row_id, t.gen_index))
    return PathPlan(out, dropped=dict(dropped or {}), params=dict(params or {}))


# --- plan serialization -------------------------------------------------------


def _round9(value):
    """Round floats to 9 significant digits, recursively, for byte-stable JSON."""
    if isinstance(value, float):
        return float(f"{value:.9g}")
    if isinstance(value, dict):
        return {k: _round9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round9(v) for v in value]
    return value


def plan_to_doc(plan: PathPlan) -> dict:
    targets = []
    seq = 0
    last_row = None
    for t in plan.targets:
        if t.row_index != last_row:
            seq = 0
            last_row = t.row_index
        targets.append({
            "row": int(t.row_index),
            "seq": seq,
            "position": [float(x) for x in t.pose.translation],
            "quaternion": [float(x) for x in t.pose.rotation.wxyz],
        })
        seq += 1
    doc = {
        "targets": targets,
        "dropped": {k: [int(i) for i in v] for k, v in plan.dropped.items()},
        "params": plan.params,
    }
    return _round9(doc)


def plan_to_json_bytes(plan: PathPlan) -> bytes:
    return (json.dumps(plan_to_doc(plan), indent=2) + "\n").encode()
