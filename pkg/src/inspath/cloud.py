"""Point clouds and the per-cloud kernels: pass-through cropping, voxel
downsampling, hidden point removal, and covariance normal estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateGeometryError, InvalidArgumentError
from .spatial import GridIndex

_NORMAL_UNIT_TOL = 1e-6


def _as_points(arr, name) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.size == 0:
        out = out.reshape(0, 3)
    if out.ndim != 2 or out.shape[1] != 3:
        raise InvalidArgumentError(f"{name} must be an (N, 3) array")
    return out


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Positions with optional per-point colors (RGB in [0,1]) and unit normals.

    Immutable; all derived clouds are new values. `frame` tags the coordinate
    frame the positions live in ("camera" or "world").
    """

    points: np.ndarray
    colors: np.ndarray | None = None
    normals: np.ndarray | None = None
    frame: str = "world"

    def __post_init__(self):
        pts = _as_points(self.points, "points")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("points contain NaN/Inf coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        for name in ("colors", "normals"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = _as_points(arr, name)
            if len(arr) != len(pts):
                raise InvalidArgumentError(f"{name} length {len(arr)} != points {len(pts)}")
            if name == "colors" and (arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0):
                raise InvalidArgumentError("colors must lie in [0, 1]")
            if name == "normals" and len(arr):
                norms = np.linalg.norm(arr, axis=1)
                if np.any(np.abs(norms - 1.0) > _NORMAL_UNIT_TOL):
                    raise InvalidArgumentError("normals must be unit length")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.points)

    def select(self, idx) -> "PointCloud":
        """Sub-cloud at the given indices or boolean mask, order preserving."""
        return PointCloud(
            self.points[idx],
            self.colors[idx] if self.colors is not None else None,
            self.normals[idx] if self.normals is not None else None,
            self.frame,
        )

    @staticmethod
    def empty(frame: str = "world") -> "PointCloud":
        return PointCloud(np.zeros((0, 3)), frame=frame)


def concat_clouds(clouds: list[PointCloud]) -> PointCloud:
    """Plain concatenation; colors/normals kept only if every part has them."""
    if not clouds:
        return PointCloud.empty()
    pts = np.concatenate([c.points for c in clouds])
    colors = None
    if all(c.colors is not None for c in clouds):
        colors = np.concatenate([c.colors for c in clouds])
    normals = None
    if all(c.normals is not None for c in clouds):
        normals = np.concatenate([c.normals for c in clouds])
    return PointCloud(pts, colors, normals, clouds[0].frame)


@dataclass(frozen=True, eq=False)
class CropBox:
    """Axis-aligned keep-region, min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.array(self.min, dtype=np.float64).reshape(3)
        hi = np.array(self.max, dtype=np.float64).reshape(3)
        if np.any(lo > hi):
            raise InvalidArgumentError(f"crop box min {lo} exceeds max {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the box (inclusive bounds)."""
        return np.all((points >= self.min) & (points <= self.max), axis=1)


def filter_passthrough(cloud: PointCloud, keep: CropBox, ground_z: float) -> PointCloud:
    """Keep points inside `keep` with z strictly above `ground_z`."""
    if len(cloud) == 0:
        return cloud
    mask = keep.contains(cloud.points) & (cloud.points[:, 2] > ground_z)
    return cloud.select(mask)


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """One output point per occupied voxel: member centroid, colors averaged,
    normals averaged then renormalized.

    The voxel grid is anchored at the cloud's minimum corner. Output voxels
    are ordered by key, which is deterministic for a given cloud.
    """
    if voxel <= 0:
        raise InvalidArgumentError(f"voxel size must be positive, got {voxel}")
    if len(cloud) == 0:
        return cloud
    origin = cloud.points.min(axis=0)
    keys = np.floor((cloud.points - origin) / voxel).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    m = len(uniq)
    counts = np.bincount(inverse, minlength=m).astype(np.float64)

    def group_mean(values):
        sums = np.zeros((m, 3))
        np.add.at(sums, inverse, values)
        return sums / counts[:, None]

    pts = group_mean(cloud.points)
    colors = group_mean(cloud.colors) if cloud.colors is not None else None
    normals = None
    if cloud.normals is not None:
        avg = group_mean(cloud.normals)
        norms = np.linalg.norm(avg, axis=1)
        degenerate = norms < 1e-12
        if np.any(degenerate):
            # antipodal members cancelled out; fall back to the first member
            first = np.full(m, len(cloud), dtype=np.int64)
            np.minimum.at(first, inverse, np.arange(len(cloud)))
            avg[degenerate] = cloud.normals[first[degenerate]]
            norms = np.linalg.norm(avg, axis=1)
        normals = avg / norms[:, None]
    return PointCloud(pts, colors, normals, cloud.frame)


def hidden_point_removal(cloud: PointCloud, camera, radius_scale: float = 100.0) -> np.ndarray:
    """Indices of points visible from `camera` via spherical flip + convex hull.

    Each point p (in the camera frame) maps to p + 2 (R - |p|) p / |p| with
    R = radius_scale * max |p|; points whose image lies on the convex hull of
    the flipped set plus the origin are visible.
    """
    if len(cloud) == 0:
        raise InvalidArgumentError("hidden_point_removal needs a non-empty cloud")
    camera = np.asarray(camera, dtype=np.float64).reshape(3)
    local = cloud.points - camera
    norms = np.linalg.norm(local, axis=1)
    if np.any(norms < 1e-12):
        raise InvalidArgumentError("camera coincides with a cloud point")
    radius = radius_scale * norms.max()
    flipped = local + 2.0 * (radius - norms)[:, None] * local / norms[:, None]
    try:
        hull = ConvexHull(np.vstack([flipped, np.zeros(3)]))
    except QhullError as exc:
        raise DegenerateGeometryError(f"convex hull failed: {exc}") from exc
    visible = np.array(sorted(v for v in hull.vertices if v < len(cloud)), dtype=np.int64)
    return visible


def estimate_normals(cloud: PointCloud, k: int, viewpoint) -> PointCloud:
    """Per-point normals from the covariance of the k nearest neighbors
    (self included), oriented so n . (viewpoint - p) >= 0."""
    n = len(cloud)
    if k < 3 or k > n:
        raise InvalidArgumentError(f"k={k} must satisfy 3 <= k <= {n}")
    viewpoint = np.asarray(viewpoint, dtype=np.float64).reshape(3)
    index = GridIndex(cloud.points)
    nbr_idx = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        nbr_idx[i] = index.knn(cloud.points[i], k)
    nbrs = cloud.points[nbr_idx]                      # (n, k, 3)
    centered = nbrs - nbrs.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered)
    w, v = np.linalg.eigh(cov)                        # ascending eigenvalues
    normals = v[:, :, 0].copy()
    # near-ties (isotropic neighborhoods): pick the eigenvector whose absolute
    # component vector is lexicographically largest, for deterministic output
    scale = np.maximum(np.abs(w[:, 2]), 1.0)
    tied = np.nonzero(w[:, 1] - w[:, 0] <= 1e-12 * scale)[0]
    for i in tied:
        cands = np.nonzero(w[i] - w[i, 0] <= 1e-12 * scale[i])[0]
        best = max(cands, key=lambda j: tuple(np.abs(v[i, :, j])))
        normals[i] = v[i, :, best]
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    flip = np.sum(normals * (viewpoint - cloud.points), axis=1) < 0.0
    normals[flip] *= -1.0
    return PointCloud(cloud.points, cloud.colors, normals, cloud.frame)
