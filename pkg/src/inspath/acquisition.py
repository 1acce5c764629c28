"""Frame sources and the sampling filter: back-project depth frames into
clouds, crop them, and merge the majority-agreeing samples.

Frames come from a replay directory (PNG color + 16-bit millimeter depth) or
from the synthetic renderer in `scenes`; both expose the same iteration
protocol: iterate Frames, with `intrinsics` and `camera_pose` attributes held
constant across a sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .cloud import CropBox, PointCloud, concat_clouds, filter_passthrough
from .errors import InsufficientFramesError, InvalidArgumentError
from .geom import RigidTransform, Rotation


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidArgumentError("focal lengths must be positive")


@dataclass(frozen=True, eq=False)
class Frame:
    """One RGB-D capture: color (H, W, 3) uint8, depth (H, W) meters with
    0 marking invalid pixels, plus intrinsics and the camera-in-world pose."""

    color: np.ndarray
    depth: np.ndarray
    intrinsics: Intrinsics
    camera_pose: RigidTransform

    def __post_init__(self):
        color = np.ascontiguousarray(self.color, dtype=np.uint8)
        depth = np.ascontiguousarray(self.depth, dtype=np.float64)
        if color.ndim != 3 or color.shape[2] != 3:
            raise InvalidArgumentError("color must be (H, W, 3)")
        if depth.shape != color.shape[:2]:
            raise InvalidArgumentError(
                f"depth shape {depth.shape} != color shape {color.shape[:2]}")
        if np.any(depth < 0) or not np.all(np.isfinite(depth)):
            raise InvalidArgumentError("depth values must be finite and >= 0")
        color.flags.writeable = False
        depth.flags.writeable = False
        object.__setattr__(self, "color", color)
        object.__setattr__(self, "depth", depth)


def generate_point_cloud(frame: Frame) -> PointCloud:
    """Pinhole back-projection of every valid depth pixel into the world frame."""
    h, w = frame.depth.shape
    intr = frame.intrinsics
    mask = frame.depth > 0
    if not np.any(mask):
        return PointCloud.empty()
    vs, us = np.nonzero(mask)
    d = frame.depth[mask]
    pts_cam = np.stack([
        d * (us - intr.cx) / intr.fx,
        d * (vs - intr.cy) / intr.fy,
        d,
    ], axis=1)
    pts = frame.camera_pose.apply(pts_cam)
    colors = frame.color[mask].astype(np.float64) / 255.0
    return PointCloud(pts, colors)


def sample_clouds(source, s: int, crop: CropBox, ground_z: float) -> list[PointCloud]:
    """Capture `s` frames, back-project and crop each; order follows capture."""
    if s < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {s}")
    clouds = []
    it = iter(source)
    for i in range(s):
        try:
            frame = next(it)
        except StopIteration:
            raise InsufficientFramesError(
                f"source exhausted after {i} of {s} frames") from None
        clouds.append(filter_passthrough(generate_point_cloud(frame), crop, ground_z))
    return clouds


def majority_vote_merge(clouds: list[PointCloud], tolerance: float = 0.05) -> PointCloud:
    """Merge the largest group of clouds with mutually similar point counts.

    Counts are single-link chained in sorted order: adjacent counts belong to
    the same group when |n_i - n_j| <= tolerance * max(n_i, n_j). The largest
    group wins; ties go to the group with the larger median count. Selected
    clouds are concatenated in capture order.
    """
    if not clouds:
        raise InvalidArgumentError("majority_vote_merge needs at least one cloud")
    counts = np.array([len(c) for c in clouds], dtype=np.int64)
    order = np.argsort(counts, kind="stable")
    groups = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if counts[cur] - counts[prev] <= tolerance * max(counts[cur], counts[prev]):
            groups[-1].append(cur)
        else:
            groups.append([cur])
    best = max(groups, key=lambda g: (len(g), float(np.median(counts[g]))))
    return concat_clouds([clouds[i] for i in sorted(best)])


# --- replay directories -----------------------------------------------------
#
# Layout: <root>/frames/NNNN.color.png   8-bit RGB
#         <root>/frames/NNNN.depth.png   16-bit grayscale, millimeters
#         <root>/frames/intrinsics.json  fx, fy, cx, cy, width, height
#         <root>/frames/pose.json        camera-in-world quaternion + translation


def _pose_to_json(pose: RigidTransform) -> dict:
    return {
        "quaternion": [float(x) for x in pose.rotation.wxyz],
        "translation": [float(x) for x in pose.translation],
    }


def _pose_from_json(doc: dict) -> RigidTransform:
    return RigidTransform(Rotation(np.asarray(doc["quaternion"], dtype=np.float64)),
                          np.asarray(doc["translation"], dtype=np.float64))


def save_replay(root, frames: list[Frame]) -> Path:
    """Write frames in the replay layout; depth is quantized to millimeters."""
    if not frames:
        raise InvalidArgumentError("cannot save an empty frame sequence")
    frames_dir = Path(root) / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    first = frames[0]
    h, w = first.depth.shape
    intr = first.intrinsics
    (frames_dir / "intrinsics.json").write_text(json.dumps({
        "fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
        "width": w, "height": h,
    }, indent=2))
    (frames_dir / "pose.json").write_text(json.dumps(_pose_to_json(first.camera_pose), indent=2))
    for i, frame in enumerate(frames):
        Image.fromarray(frame.color, mode="RGB").save(frames_dir / f"{i:04d}.color.png")
        mm = np.clip(np.round(frame.depth * 1000.0), 0, 65535).astype(np.uint16)
        Image.fromarray(mm).save(frames_dir / f"{i:04d}.depth.png")
    return frames_dir


class ReplaySource:
    """Replays a recorded frame directory in index order."""

    def __init__(self, root):
        self.root = Path(root)
        frames_dir = self.root / "frames"
        if not frames_dir.is_dir():
            raise InvalidArgumentError(f"no frames/ directory under {self.root}")
        intr = json.loads((frames_dir / "intrinsics.json").read_text())
        self.intrinsics = Intrinsics(intr["fx"], intr["fy"], intr["cx"], intr["cy"])
        self.width = int(intr["width"])
        self.height = int(intr["height"])
        self.camera_pose = _pose_from_json(json.loads((frames_dir / "pose.json").read_text()))
        self._color_paths = sorted(frames_dir.glob("*.color.png"))
        self._frames_dir = frames_dir

    def __len__(self) -> int:
        return len(self._color_paths)

    def __iter__(self):
        for color_path in self._color_paths:
            depth_path = self._frames_dir / color_path.name.replace(".color.", ".depth.")
            color = np.asarray(Image.open(color_path).convert("RGB"))
            mm = np.asarray(Image.open(depth_path), dtype=np.float64)
            yield Frame(color, mm / 1000.0, self.intrinsics, self.camera_pose)
