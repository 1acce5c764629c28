"""Small fixed-dimension geometry: unit quaternions, rigid transforms, and the
axis-angle construction that aims a tool axis along a surface normal.

Rotations are stored as unit quaternions (w, x, y, z); matrices are derived.
All values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

UNIT_Z = np.array([0.0, 0.0, 1.0])

_QUAT_NORM_TOL = 1e-6
_DEGENERATE_CROSS = 1e-8


def as_vec3(v, name: str = "vector") -> np.ndarray:
    """Coerce to a read-only float64 (3,) array, rejecting non-finite input."""
    out = np.array(v, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError(f"{name} has non-finite components: {out!r}")
    out.flags.writeable = False
    return out


def normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InvalidArgumentError("cannot normalize the zero vector")
    return v / n


@dataclass(frozen=True, eq=False)
class Rotation:
    """A 3D rotation as a unit quaternion (w, x, y, z)."""

    wxyz: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        q = np.array(self.wxyz, dtype=np.float64).reshape(4)
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > _QUAT_NORM_TOL:
            raise InvalidArgumentError(f"quaternion norm {norm} is not 1")
        q /= norm
        q.flags.writeable = False
        object.__setattr__(self, "wxyz", q)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation()

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "Rotation":
        """Rotation by `angle` radians about a unit `axis` (right-hand rule)."""
        axis = as_vec3(axis, "axis")
        if abs(np.linalg.norm(axis) - 1.0) > _QUAT_NORM_TOL:
            raise InvalidArgumentError(f"axis {axis!r} is not unit length")
        half = 0.5 * angle
        return Rotation(np.concatenate(([math.cos(half)], math.sin(half) * axis)))

    @staticmethod
    def from_matrix(m) -> "Rotation":
        """Quaternion from a rotation matrix (Shepperd's method)."""
        m = np.asarray(m, dtype=np.float64).reshape(3, 3)
        tr = np.trace(m)
        if tr > 0:
            s = math.sqrt(tr + 1.0) * 2.0
            q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                 (m[1, 0] - m[0, 1]) / s]
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s,
                 (m[0, 2] + m[2, 0]) / s]
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s,
                 (m[1, 2] + m[2, 1]) / s]
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                 (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        q = np.asarray(q)
        return Rotation(q / np.linalg.norm(q))

    @property
    def matrix(self) -> np.ndarray:
        w, x, y, z = self.wxyz
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def apply(self, v) -> np.ndarray:
        """Rotate a (3,) vector or an (N, 3) array of vectors."""
        v = np.asarray(v, dtype=np.float64)
        return v @ self.matrix.T

    def to_axis_angle(self) -> tuple[np.ndarray, float]:
        """Recover (unit axis, angle in [0, pi]); axis is arbitrary at angle 0."""
        w = float(np.clip(self.wxyz[0], -1.0, 1.0))
        angle = 2.0 * math.acos(abs(w))
        xyz = self.wxyz[1:] if w >= 0 else -self.wxyz[1:]
        s = np.linalg.norm(xyz)
        axis = xyz / s if s > 1e-12 else np.array([1.0, 0.0, 0.0])
        return axis, angle

    def inverse(self) -> "Rotation":
        return Rotation(self.wxyz * np.array([1.0, -1.0, -1.0, -1.0]))

    def __matmul__(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self.wxyz
        w2, x2, y2, z2 = other.wxyz
        return Rotation(np.array([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation followed by translation: T(p) = R p + t."""

    rotation: Rotation = field(default_factory=Rotation.identity)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "translation", as_vec3(self.translation, "translation"))

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_matrix(m) -> "RigidTransform":
        m = np.asarray(m, dtype=np.float64).reshape(4, 4)
        return RigidTransform(Rotation.from_matrix(m[:3, :3]), m[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation.matrix
        out[:3, 3] = self.translation
        return out

    def apply(self, points) -> np.ndarray:
        """Transform a (3,) point or an (N, 3) array of points."""
        return self.rotation.apply(points) + self.translation

    def inverse(self) -> "RigidTransform":
        rinv = self.rotation.inverse()
        return RigidTransform(rinv, -rinv.apply(self.translation))

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation.apply(other.translation) + self.translation,
        )


def rotation_from_axis_angle(axis, angle: float) -> Rotation:
    """Rodrigues-style rotation about a unit axis; raises on a non-unit axis."""
    return Rotation.from_axis_angle(axis, angle)


def align_z_to_normal(n_p) -> Rotation:
    """Rotation R with R @ (0,0,1) == n_p for a unit normal n_p.

    Built as a rotation of -acos(n_p . z) about normalize(n_p x z). At the
    poles the cross product vanishes: parallel input returns the identity,
    antiparallel input a half turn about (1,0,0), both satisfying the contract.
    """
    n_p = as_vec3(n_p, "normal")
    if abs(np.linalg.norm(n_p) - 1.0) > _QUAT_NORM_TOL:
        raise InvalidArgumentError(f"normal {n_p!r} is not unit length")
    cross = np.cross(n_p, UNIT_Z)
    s = np.linalg.norm(cross)
    if s < _DEGENERATE_CROSS:
        if n_p[2] > 0:
            return Rotation.identity()
        return Rotation.from_axis_angle((1.0, 0.0, 0.0), math.pi)
    angle = -math.acos(float(np.clip(np.dot(n_p, UNIT_Z), -1.0, 1.0)))
    return Rotation.from_axis_angle(cross / s, angle)


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """(a o b)(p) = a(b(p))."""
    return a @ b
