"""Reduce the selected object cloud to ordered point rows ("profiles") along
a slicing direction: automatic from the dominant positional axis, an explicit
user direction, or a user-chosen segment box."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cloud import CropBox, PointCloud
from .errors import DegenerateGeometryError, EmptyProfileError, InvalidArgumentError
from .geom import normalized

log = logging.getLogger(__name__)

MODES = ("auto", "direction", "segment")

_UNIT_X = np.array([1.0, 0.0, 0.0])
_UNIT_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class SliceSpec:
    """How to slice the object cloud into rows.

    band_width is the thickness of each kept band around its row center line;
    row_count bands are spread evenly over the cloud's transverse extent.
    """

    mode: str = "auto"
    direction: np.ndarray | None = None
    segment: CropBox | None = None
    band_width: float = 0.03
    row_count: int = 1
    min_step: float | None = None  # thin each row to one point per step along the axis

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"slice mode must be one of {MODES}, got {self.mode!r}")
        if (self.direction is not None) != (self.mode == "direction"):
            raise InvalidArgumentError("direction must be given exactly when mode='direction'")
        if (self.segment is not None) != (self.mode == "segment"):
            raise InvalidArgumentError("segment must be given exactly when mode='segment'")
        if self.band_width <= 0:
            raise InvalidArgumentError("band_width must be positive")
        if self.row_count < 1:
            raise InvalidArgumentError("row_count must be >= 1")
        if self.min_step is not None and self.min_step <= 0:
            raise InvalidArgumentError("min_step must be positive when given")
        if self.direction is not None:
            d = np.asarray(self.direction, dtype=np.float64).reshape(3)
            if abs(np.linalg.norm(d) - 1.0) > 1e-6:
                raise InvalidArgumentError("slice direction must be a unit vector")
            d.flags.writeable = False
            object.__setattr__(self, "direction", d)


@dataclass(frozen=True, eq=False)
class Profile:
    """One ordered row of surface points with their normals."""

    points: np.ndarray
    normals: np.ndarray
    row_index: int

    def __post_init__(self):
        for name in ("points", "normals"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.points)


def auto_direction(cloud: PointCloud) -> np.ndarray:
    """Dominant positional axis: unit eigenvector of the largest eigenvalue of
    the position covariance, sign fixed toward non-negative x (then y, z)."""
    if len(cloud) < 3 or cloud.normals is None:
        raise InvalidArgumentError("auto_direction needs >= 3 points with normals")
    centered = cloud.points - cloud.points.mean(axis=0)
    cov = centered.T @ centered / len(cloud)
    w, v = np.linalg.eigh(cov)
    if w[-1] < 1e-18:
        raise DegenerateGeometryError("cloud has no positional extent")
    axis = normalized(v[:, -1])
    for comp in range(3):
        if abs(axis[comp]) > 1e-12:
            if axis[comp] < 0:
                axis = -axis
            break
    return axis


def _transverse_axis(a: np.ndarray) -> np.ndarray:
    """Component of world z (fallback world x) orthogonal to the slice axis."""
    ref = _UNIT_X if abs(float(a @ _UNIT_Z)) > 0.99 else _UNIT_Z
    return normalized(ref - (ref @ a) * a)


def extract_profiles(cloud: PointCloud, spec: SliceSpec) -> list[Profile]:
    """Slice the cloud into `row_count` ordered rows.

    Points inside each transverse band are ordered by their coordinate along
    the slicing axis; exact ties keep the point nearest the band center line.
    Rows alternate traversal direction (serpentine) so consecutive rows
    connect at near ends. Bands with fewer than two points are omitted.
    """
    if len(cloud) == 0:
        raise EmptyProfileError("object cloud is empty")
    if cloud.normals is None:
        raise InvalidArgumentError("extract_profiles needs a cloud with normals")
    work = cloud
    if spec.mode == "segment":
        work = cloud.select(spec.segment.contains(cloud.points))
        if len(work) == 0:
            raise EmptyProfileError("segment box contains no points")
    a = spec.direction if spec.mode == "direction" else auto_direction(work)
    t = _transverse_axis(a)

    alpha = work.points @ a
    tau = work.points @ t
    t_min, t_max = float(tau.min()), float(tau.max())
    span = t_max - t_min

    rows: list[Profile] = []
    for band in range(spec.row_count):
        center = t_min + (band + 0.5) * span / spec.row_count
        sel = np.nonzero(np.abs(tau - center) <= spec.band_width / 2)[0]
        if len(sel) >= 2:
            if spec.min_step is not None:
                # one representative per axis step: the point nearest the
                # band center line wins, so the row hugs a single strand of a
                # curved surface instead of zigzagging across the band; the
                # step grid is anchored at the world origin so bin boundaries
                # do not move with the sampled extent
                bins = np.floor(alpha[sel] / spec.min_step)
                order = np.lexsort((sel, np.abs(tau[sel] - center), bins))
                sel = sel[order]
                keep = np.ones(len(sel), dtype=bool)
                keep[1:] = np.diff(bins[order]) > 0
                sel = sel[keep]
            else:
                order = np.lexsort((sel, np.abs(tau[sel] - center), alpha[sel]))
                sel = sel[order]
                keep = np.ones(len(sel), dtype=bool)
                keep[1:] = np.diff(alpha[sel]) > 0
                sel = sel[keep]
        if len(sel) < 2:
            log.warning("profile band %d/%d omitted: %d usable points",
                        band, spec.row_count, len(sel))
            continue
        if len(rows) % 2 == 1:
            sel = sel[::-1]
        rows.append(Profile(work.points[sel], work.normals[sel], row_index=len(rows)))
    if not rows:
        raise EmptyProfileError(
            f"no profile rows with >= 2 points (row_count={spec.row_count}, "
            f"band_width={spec.band_width})")
    return rows
