"""Density-based segmentation of the processed cloud and cluster selection.

The DBSCAN here is deliberately order-deterministic: seeds expand in input
index order and region queries return sorted indices, so border points always
join the first core cluster that reaches them, run after run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .cloud import CropBox, PointCloud
from .errors import InvalidArgumentError
from .spatial import GridIndex

NOISE = -1


@dataclass(frozen=True)
class ClusterSummary:
    cluster_id: int
    count: int
    centroid: np.ndarray
    aabb: CropBox

    def to_json(self) -> dict:
        return {
            "id": self.cluster_id,
            "count": self.count,
            "centroid": [float(x) for x in self.centroid],
            "aabb": {"min": [float(x) for x in self.aabb.min],
                     "max": [float(x) for x in self.aabb.max]},
        }


@dataclass(frozen=True, eq=False)
class ClusterSet:
    """Per-point labels (-1 = noise, 0..C-1 = cluster) plus cluster summaries."""

    labels: np.ndarray
    summaries: tuple

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "summaries", tuple(self.summaries))

    @property
    def cluster_ids(self) -> list[int]:
        return [s.cluster_id for s in self.summaries]

    def largest(self) -> int:
        if not self.summaries:
            raise InvalidArgumentError("no clusters to select from")
        return max(self.summaries, key=lambda s: (s.count, -s.cluster_id)).cluster_id


def _summarize(points: np.ndarray, labels: np.ndarray) -> tuple:
    out = []
    for cid in range(labels.max(initial=-1) + 1):
        member = points[labels == cid]
        out.append(ClusterSummary(
            cluster_id=cid,
            count=len(member),
            centroid=member.mean(axis=0),
            aabb=CropBox(member.min(axis=0), member.max(axis=0)),
        ))
    return tuple(out)


def dbscan(cloud: PointCloud, eps: float, min_pts: int) -> ClusterSet:
    """Standard DBSCAN over Euclidean eps-neighborhoods (self included)."""
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise InvalidArgumentError(f"min_pts must be >= 1, got {min_pts}")
    n = len(cloud)
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return ClusterSet(labels, ())
    index = GridIndex(cloud.points, cell_size=eps)
    neighborhoods = [index.radius_neighbors(cloud.points[i], eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighborhoods])

    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for nb in neighborhoods[j]:
                if labels[nb] == NOISE:
                    labels[nb] = cluster
                    if core[nb]:
                        queue.append(nb)
        cluster += 1
    return ClusterSet(labels, _summarize(cloud.points, labels))


def select_clusters(cset: ClusterSet, cloud: PointCloud, ids) -> PointCloud:
    """Sub-cloud of the points labeled with any of `ids`, order preserved."""
    ids = [int(i) for i in ids]
    known = set(cset.cluster_ids)
    for cid in ids:
        if cid not in known:
            raise InvalidArgumentError(f"unknown cluster id {cid}; have {sorted(known)}")
    if len(cset.labels) != len(cloud):
        raise InvalidArgumentError("cluster labels do not match the cloud")
    mask = np.isin(cset.labels, ids)
    return cloud.select(mask)


def resolve_selection(cset: ClusterSet, selection) -> list[int]:
    """Turn a selection policy ("largest" or an explicit id list) into ids."""
    if selection == "largest":
        return [cset.largest()]
    if isinstance(selection, (list, tuple)):
        return [int(i) for i in selection]
    raise InvalidArgumentError(f"unsupported cluster selection {selection!r}")
