"""Inspection path planning from depth-camera point clouds: extract a
filtered object profile and generate ordered 6-DoF end-effector targets that
traverse the surface orthogonally at a fixed standoff."""

from .cloud import CropBox, PointCloud
from .config import PipelineConfig, load_config
from .geom import RigidTransform, Rotation, align_z_to_normal, rotation_from_axis_angle
from .pipeline import RunRecord, load_record, resume, run
from .profiles import Profile, SliceSpec
from .targets import PathPlan, TargetPose

__version__ = "0.1.0"

__all__ = [
    "CropBox", "PointCloud", "PipelineConfig", "load_config",
    "RigidTransform", "Rotation", "align_z_to_normal", "rotation_from_axis_angle",
    "RunRecord", "load_record", "resume", "run",
    "Profile", "SliceSpec", "PathPlan", "TargetPose", "__version__",
]
