"""Uniform-grid spatial index for exact k-NN and radius queries on 3D points.

Points are binned into cubic cells; queries expand over cell rings until the
candidate set provably contains the answer, then distances are resolved with
numpy on the gathered candidates. Results are exact and deterministic: ties
in distance are broken by the lower point index.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


class GridIndex:
    """Immutable uniform-grid index over an (N, 3) point array."""

    def __init__(self, points: np.ndarray, cell_size: float | None = None):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidArgumentError("points must be (N, 3)")
        if len(points) == 0:
            raise InvalidArgumentError("cannot index an empty point set")
        self.points = points
        self.n = len(points)
        self.origin = points.min(axis=0)
        extent = points.max(axis=0) - self.origin
        if cell_size is None:
            # heuristic spacing: bounding-diagonal divided by the cube root of N
            diag = float(np.linalg.norm(extent))
            cell_size = max(diag / max(self.n ** (1.0 / 3.0), 1.0), 1e-9)
        if cell_size <= 0:
            raise InvalidArgumentError("cell_size must be positive")
        self.cell = float(cell_size)

        keys = np.floor((points - self.origin) / self.cell).astype(np.int64)
        self.dims = keys.max(axis=0) + 1
        flat = (keys[:, 0] * self.dims[1] + keys[:, 1]) * self.dims[2] + keys[:, 2]
        order = np.argsort(flat, kind="stable")
        self._sorted_idx = order
        self._sorted_flat = flat[order]
        # CSR over occupied cells: cell flat id -> slice into _sorted_idx
        self._cell_ids, starts = np.unique(self._sorted_flat, return_index=True)
        self._cell_starts = starts
        self._cell_ends = np.append(starts[1:], len(flat))
        self._keys = keys

    def _cells_in_box(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Indices (into point array) of all points in cells [lo, hi] inclusive."""
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, self.dims - 1)
        if np.any(lo > hi):
            return np.empty(0, dtype=np.int64)
        xs = np.arange(lo[0], hi[0] + 1)
        ys = np.arange(lo[1], hi[1] + 1)
        zs = np.arange(lo[2], hi[2] + 1)
        cells = ((xs[:, None, None] * self.dims[1] + ys[None, :, None])
                 * self.dims[2] + zs[None, None, :]).ravel()
        pos = np.searchsorted(self._cell_ids, cells)
        valid = pos < len(self._cell_ids)
        pos = pos[valid]
        hit = pos[self._cell_ids[pos] == cells[valid]]
        if len(hit) == 0:
            return np.empty(0, dtype=np.int64)
        chunks = [self._sorted_idx[self._cell_starts[h]:self._cell_ends[h]] for h in hit]
        return np.concatenate(chunks)

    def knn(self, query, k: int) -> np.ndarray:
        """Indices of the k nearest points to `query`, nearest first."""
        if k < 1 or k > self.n:
            raise InvalidArgumentError(f"k={k} out of range for {self.n} points")
        query = np.asarray(query, dtype=np.float64).reshape(3)
        center = np.floor((query - self.origin) / self.cell).astype(np.int64)
        ring = 1
        max_ring = int(np.max(self.dims)) + 2
        while True:
            cand = self._cells_in_box(center - ring, center + ring)
            if len(cand) >= k:
                d2 = np.sum((self.points[cand] - query) ** 2, axis=1)
                # the k-th candidate is provably nearest once it is closer than
                # the nearest unexplored cell boundary
                kth = np.partition(d2, k - 1)[k - 1]
                guard = self._boundary_distance(query, center, ring)
                if kth <= guard * guard or ring >= max_ring:
                    order = np.lexsort((cand, d2))
                    return cand[order[:k]]
            elif ring >= max_ring:
                # grid exhausted; fewer candidates can only mean duplicates
                d2 = np.sum((self.points[cand] - query) ** 2, axis=1)
                order = np.lexsort((cand, d2))
                return cand[order[:k]]
            ring += 1

    def _boundary_distance(self, query: np.ndarray, center: np.ndarray, ring: int) -> float:
        """Minimum distance from `query` to any cell outside the current ring box."""
        lo = self.origin + (center - ring) * self.cell
        hi = self.origin + (center + ring + 1) * self.cell
        return float(np.min(np.concatenate((query - lo, hi - query))))

    def radius_neighbors(self, query, radius: float) -> np.ndarray:
        """Sorted indices of all points within `radius` of `query` (inclusive)."""
        query = np.asarray(query, dtype=np.float64).reshape(3)
        center = np.floor((query - self.origin) / self.cell).astype(np.int64)
        ring = int(np.ceil(radius / self.cell))
        cand = self._cells_in_box(center - ring, center + ring)
        if len(cand) == 0:
            return cand
        d2 = np.sum((self.points[cand] - query) ** 2, axis=1)
        return np.sort(cand[d2 <= radius * radius])


def brute_force_knn(points: np.ndarray, query, k: int) -> np.ndarray:
    """Reference k-NN by full scan; same tie rule as GridIndex.knn."""
    d2 = np.sum((points - np.asarray(query, dtype=np.float64)) ** 2, axis=1)
    order = np.lexsort((np.arange(len(points)), d2))
    return order[:k]
