"""Virtual depth camera over analytic primitives (plane, sphere, cylinder,
box), with Gaussian depth noise, pixel dropout, and a strobe-style dropout
cycle. Every primitive carries an exact normal, so rendered scenes double as
ground truth for the estimation oracles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import Frame, Intrinsics
from .errors import InvalidArgumentError
from .geom import RigidTransform, Rotation

_EPS = 1e-9

# one fixed color per primitive index so clusters are tellable apart
_PALETTE = np.array([
    [230, 80, 60], [70, 160, 230], [110, 200, 90], [240, 190, 60],
    [180, 100, 220], [80, 210, 200], [240, 130, 180], [150, 150, 150],
], dtype=np.uint8)

_SHAPE_DIMS = {"plane": 2, "sphere": 1, "cylinder": 2, "box": 3}


@dataclass(frozen=True)
class Primitive:
    """One analytic surface. Dimensions by shape:
    plane (size_x, size_y) rectangle in the local z=0 plane, normal +z;
    sphere (radius); cylinder (radius, height) lateral surface about local z;
    box (size_x, size_y, size_z) solid, centered at the local origin."""

    shape: str
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    dimensions: tuple = ()

    def __post_init__(self):
        if self.shape not in _SHAPE_DIMS:
            raise InvalidArgumentError(f"unknown primitive shape {self.shape!r}")
        dims = tuple(float(d) for d in self.dimensions)
        if len(dims) != _SHAPE_DIMS[self.shape]:
            raise InvalidArgumentError(
                f"{self.shape} needs {_SHAPE_DIMS[self.shape]} dimensions, got {dims}")
        if any(d <= 0 or not math.isfinite(d) for d in dims):
            raise InvalidArgumentError(f"dimensions must be positive finite: {dims}")
        object.__setattr__(self, "dimensions", dims)

    def raycast(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Smallest positive hit parameter t per ray (inf on miss), computed
        in the primitive's local frame."""
        inv = self.pose.inverse()
        o = inv.apply(origins)
        d = inv.rotation.apply(dirs)
        t = np.full(len(o), np.inf)
        if self.shape == "plane":
            sx, sy = self.dimensions
            dz = d[:, 2]
            ok = np.abs(dz) > _EPS
            tc = np.where(ok, -o[:, 2] / np.where(ok, dz, 1.0), np.inf)
            hit = o + tc[:, None] * d
            ok &= (tc > _EPS) & (np.abs(hit[:, 0]) <= sx / 2) & (np.abs(hit[:, 1]) <= sy / 2)
            t[ok] = tc[ok]
        elif self.shape == "sphere":
            (r,) = self.dimensions
            t = _quadratic_hits(o, d, mask_fn=None, radius=r, full3d=True)
        elif self.shape == "cylinder":
            r, h = self.dimensions
            t = _quadratic_hits(
                o, d, mask_fn=lambda p: np.abs(p[:, 2]) <= h / 2, radius=r, full3d=False)
        elif self.shape == "box":
            half = np.asarray(self.dimensions) / 2
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (-half - o) / d
                t2 = (half - o) / d
            near = np.nanmax(np.minimum(t1, t2), axis=1)
            far = np.nanmin(np.maximum(t1, t2), axis=1)
            ok = (near <= far) & (near > _EPS)
            t[ok] = near[ok]
        return t

    def local_normal(self, q: np.ndarray) -> np.ndarray:
        """Outward unit normal in the local frame at an on-surface point q."""
        if self.shape == "plane":
            return np.array([0.0, 0.0, 1.0])
        if self.shape == "sphere":
            return q / np.linalg.norm(q)
        if self.shape == "cylinder":
            radial = np.array([q[0], q[1], 0.0])
            return radial / np.linalg.norm(radial)
        half = np.asarray(self.dimensions) / 2
        ratio = np.abs(q) / half
        axis = int(np.argmax(ratio))
        n = np.zeros(3)
        n[axis] = math.copysign(1.0, q[axis]) if q[axis] != 0 else 1.0
        return n

    def surface_distance(self, p) -> float:
        """Unsigned distance from p to this primitive's surface."""
        q = self.pose.inverse().apply(np.asarray(p, dtype=np.float64))
        if self.shape == "plane":
            sx, sy = self.dimensions
            dx = max(abs(q[0]) - sx / 2, 0.0)
            dy = max(abs(q[1]) - sy / 2, 0.0)
            return math.sqrt(dx * dx + dy * dy + q[2] * q[2])
        if self.shape == "sphere":
            return abs(np.linalg.norm(q) - self.dimensions[0])
        if self.shape == "cylinder":
            r, h = self.dimensions
            radial = math.hypot(q[0], q[1])
            dz = max(abs(q[2]) - h / 2, 0.0)
            return math.hypot(radial - r, dz)
        half = np.asarray(self.dimensions) / 2
        outside = np.maximum(np.abs(q) - half, 0.0)
        d_out = float(np.linalg.norm(outside))
        if d_out > 0:
            return d_out
        return float(np.min(half - np.abs(q)))


def _quadratic_hits(o, d, mask_fn, radius, full3d):
    """Smallest positive root of |proj(o + t d)| = radius, optional hit mask."""
    sel = slice(None) if full3d else slice(0, 2)
    oo, dd = o[:, sel], d[:, sel]
    a = np.sum(dd * dd, axis=1)
    b = 2.0 * np.sum(oo * dd, axis=1)
    c = np.sum(oo * oo, axis=1) - radius * radius
    disc = b * b - 4 * a * c
    t = np.full(len(o), np.inf)
    ok = (disc >= 0) & (a > _EPS)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    for sign in (-1.0, 1.0):  # near root first; far root fills remaining misses
        tc = np.where(ok, (-b + sign * sq) / (2 * np.where(ok, a, 1.0)), np.inf)
        valid = ok & (tc > _EPS) & (tc < t)
        if mask_fn is not None:
            hit = o + tc[:, None] * d
            valid &= mask_fn(hit)
        t[valid] = tc[valid]
    return t


@dataclass(frozen=True)
class Scene:
    primitives: tuple

    def __post_init__(self):
        prims = tuple(self.primitives)
        if not prims:
            raise InvalidArgumentError("scene needs at least one primitive")
        object.__setattr__(self, "primitives", prims)

    def surface_distance(self, p) -> float:
        return min(prim.surface_distance(p) for prim in self.primitives)


@dataclass(frozen=True)
class NoiseSpec:
    """Depth sensor disturbance model. `strobe_period`, when set, cycles the
    dropout probability through per-phase multipliers frame by frame,
    emulating ambient light flicker."""

    depth_sigma: float = 0.0
    dropout_prob: float = 0.0
    strobe_period: int | None = None
    strobe_multipliers: tuple | None = None

    def __post_init__(self):
        if self.depth_sigma < 0:
            raise InvalidArgumentError("depth_sigma must be >= 0")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise InvalidArgumentError("dropout_prob must lie in [0, 1]")
        mults = self.strobe_multipliers
        if self.strobe_period is not None:
            if self.strobe_period < 1:
                raise InvalidArgumentError("strobe_period must be >= 1")
            if mults is None:
                # first phase saturates, the rest stay mild: one frame per
                # cycle visibly under-covers the scene
                mults = (4.0,) + (0.5,) * (self.strobe_period - 1)
            mults = tuple(float(m) for m in mults)
            if len(mults) != self.strobe_period:
                raise InvalidArgumentError("strobe_multipliers length must equal strobe_period")
            if any(m < 0 for m in mults):
                raise InvalidArgumentError("strobe multipliers must be >= 0")
        elif mults is not None:
            raise InvalidArgumentError("strobe_multipliers require strobe_period")
        object.__setattr__(self, "strobe_multipliers", mults)

    def dropout_for_phase(self, phase: int) -> float:
        p = self.dropout_prob
        if self.strobe_period is not None:
            p *= self.strobe_multipliers[phase % self.strobe_period]
        return float(np.clip(p, 0.0, 1.0))


@dataclass(frozen=True)
class Camera:
    pose: RigidTransform
    intrinsics: Intrinsics
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("camera resolution must be >= 1x1")


def render_depth(scene: Scene, camera: Camera, noise: NoiseSpec = NoiseSpec(),
                 seed=0, phase: int = 0) -> Frame:
    """Ray-cast one frame. Depth is range along the optical axis, so rendered
    frames back-project exactly onto the analytic surfaces when noise-free.
    The same (scene, camera, noise, seed, phase) always yields the same bits.
    """
    w, h = camera.width, camera.height
    intr = camera.intrinsics
    us, vs = np.meshgrid(np.arange(w), np.arange(h))
    dirs_cam = np.stack([
        (us.ravel() - intr.cx) / intr.fx,
        (vs.ravel() - intr.cy) / intr.fy,
        np.ones(w * h),
    ], axis=1)
    dirs = camera.pose.rotation.apply(dirs_cam)
    origins = np.broadcast_to(camera.pose.translation, (w * h, 3))

    depth = np.full(w * h, np.inf)
    prim_id = np.full(w * h, -1, dtype=np.int64)
    for i, prim in enumerate(scene.primitives):
        t = prim.raycast(origins, dirs)
        closer = t < depth
        depth[closer] = t[closer]
        prim_id[closer] = i
    valid = np.isfinite(depth)
    depth[~valid] = 0.0

    rng = np.random.default_rng(seed)
    if noise.depth_sigma > 0:
        depth = depth + valid * rng.normal(0.0, noise.depth_sigma, size=depth.shape)
        depth = np.maximum(depth, 0.0)
    p_drop = noise.dropout_for_phase(phase)
    if p_drop > 0:
        drop = rng.uniform(size=depth.shape) < p_drop
        depth[drop] = 0.0
        valid &= ~drop

    color = np.zeros((w * h, 3), dtype=np.uint8)
    hit = prim_id >= 0
    color[hit] = _PALETTE[prim_id[hit] % len(_PALETTE)]
    return Frame(color.reshape(h, w, 3), depth.reshape(h, w),
                 intr, camera.pose)


def ground_truth_normal(scene: Scene, p, tol: float = 1e-6) -> np.ndarray:
    """Analytic outward unit normal of the primitive nearest to p (world
    frame); p must lie within `tol` of that surface."""
    p = np.asarray(p, dtype=np.float64).reshape(3)
    dists = [prim.surface_distance(p) for prim in scene.primitives]
    best = int(np.argmin(dists))
    if dists[best] > tol:
        raise InvalidArgumentError(
            f"point {p} is {dists[best]:.3g} m from the nearest surface (> {tol:g})")
    prim = scene.primitives[best]
    q = prim.pose.inverse().apply(p)
    return prim.pose.rotation.apply(prim.local_normal(q))


class SyntheticSource:
    """Frame source backed by the renderer; one deterministic stream per seed.

    The strobe phase starts at `seed % strobe_period` so that different seeds
    catch the flicker at different points in its cycle, like an unsynchronized
    camera would.
    """

    def __init__(self, scene: Scene, camera: Camera, noise: NoiseSpec = NoiseSpec(),
                 seed: int = 0, count: int = 1):
        if count < 1:
            raise InvalidArgumentError("frame count must be >= 1")
        self.scene = scene
        self.camera = camera
        self.noise = noise
        self.seed = int(seed)
        self.count = int(count)
        self.intrinsics = camera.intrinsics
        self.camera_pose = camera.pose

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        period = self.noise.strobe_period
        offset = self.seed % period if period else 0
        for i in range(self.count):
            phase = (offset + i) % period if period else 0
            yield render_depth(self.scene, self.camera, self.noise,
                               seed=[self.seed, i], phase=phase)


# --- scene files -------------------------------------------------------------


@dataclass(frozen=True)
class SceneSpec:
    """A scene JSON bundle: geometry, camera, noise model, default seed."""

    scene: Scene
    camera: Camera
    noise: NoiseSpec
    seed: int = 0

    def source(self, count: int, seed: int | None = None) -> SyntheticSource:
        return SyntheticSource(self.scene, self.camera, self.noise,
                               self.seed if seed is None else seed, count)


def look_at_pose(position, target, up=(0.0, 0.0, 1.0)) -> RigidTransform:
    """Camera pose at `position` with the optical (+z) axis toward `target`;
    image x points right and image y down relative to `up`."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    norm = np.linalg.norm(forward)
    if norm < 1e-12:
        raise InvalidArgumentError("camera position coincides with its target")
    forward = forward / norm
    up = np.asarray(up, dtype=np.float64)
    right = np.cross(forward, up)
    if np.linalg.norm(right) < 1e-9:  # looking along `up`: pick another reference
        right = np.cross(forward, np.array([0.0, 1.0, 0.0]))
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rot = Rotation.from_matrix(np.column_stack([right, down, forward]))
    return RigidTransform(rot, position)


def _pose_from_dict(doc: dict) -> RigidTransform:
    if doc is None:
        return RigidTransform.identity()
    if "look_at" in doc:
        return look_at_pose(doc["position"], doc["look_at"], doc.get("up", (0.0, 0.0, 1.0)))
    return RigidTransform(Rotation(np.asarray(doc["quaternion"], dtype=np.float64)),
                          np.asarray(doc["translation"], dtype=np.float64))


def scene_from_dict(doc: dict) -> SceneSpec:
    prims = tuple(
        Primitive(p["shape"], _pose_from_dict(p.get("pose")), tuple(p["dimensions"]))
        for p in doc["primitives"]
    )
    cam = doc["camera"]
    camera = Camera(_pose_from_dict(cam.get("pose")),
                    Intrinsics(cam["fx"], cam["fy"], cam["cx"], cam["cy"]),
                    int(cam["width"]), int(cam["height"]))
    noise_doc = doc.get("noise") or {}
    mults = noise_doc.get("strobe_multipliers")
    noise = NoiseSpec(
        depth_sigma=float(noise_doc.get("depth_sigma", 0.0)),
        dropout_prob=float(noise_doc.get("dropout_prob", 0.0)),
        strobe_period=noise_doc.get("strobe_period"),
        strobe_multipliers=tuple(mults) if mults is not None else None,
    )
    return SceneSpec(Scene(prims), camera, noise, int(doc.get("seed", 0)))


def load_scene(path) -> SceneSpec:
    return scene_from_dict(json.loads(Path(path).read_text()))
