#!/usr/bin/env python3
"""Sampling-filter experiment: how the merged cloud and the object profile
grow with the number of sampled frames under flickering dropout.

Runs the acquisition front of the pipeline for s in {1, 5, 10} over many
seeds and prints the per-s medians as a table (merged points, sampling time,
profile points, final targets).
"""

import argparse
import time
from pathlib import Path

import numpy as np

from inspath.acquisition import majority_vote_merge, sample_clouds
from inspath.cloud import estimate_normals, voxel_downsample
from inspath.clustering import dbscan, resolve_selection, select_clusters
from inspath.config import config_from_dict
from inspath.profiles import extract_profiles
from inspath.scenes import load_scene
from inspath.targets import (decimate, filter_anomalies, filter_close,
                             filter_threshold, targets_from_profiles)


def one_run(spec, cfg, s, seed):
    t0 = time.perf_counter()
    source = spec.source(count=s, seed=seed)
    clouds = sample_clouds(source, s, cfg.crop, cfg.ground_z)
    merged = majority_vote_merge(clouds, cfg.vote_tolerance)
    sampling_time = time.perf_counter() - t0

    down = voxel_downsample(merged, cfg.voxel)
    with_normals = estimate_normals(down, cfg.normals.k,
                                    source.camera_pose.translation)
    cset = dbscan(with_normals, cfg.dbscan_eps, cfg.dbscan.min_pts)
    obj = select_clusters(cset, with_normals, resolve_selection(cset, "largest"))
    profiles = extract_profiles(obj, cfg.slice_spec())
    targets = targets_from_profiles(profiles, cfg.standoff)
    targets = filter_anomalies(targets)
    targets = filter_threshold(targets, cfg.min_clearance, cfg.ground_z)
    targets = filter_close(targets, cfg.voxel)
    targets = decimate(targets, cfg.decimation_n)
    return (len(down), sampling_time,
            sum(len(p) for p in profiles), len(targets))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scene", type=Path, default=Path("scenes/strobe_plane.json"))
    parser.add_argument("--seeds", type=int, default=25)
    parser.add_argument("--samples", type=int, nargs="+", default=[1, 5, 10])
    args = parser.parse_args()

    spec = load_scene(args.scene)
    cfg = config_from_dict({"s": 1, "ground_z": -5.0,
                            "slice": {"band_width": 0.06, "min_step": 0.03}})

    header = ["s", "Number of points", "Sampling time [sec]",
              "Object profile points", "Final targets generated"]
    rows = []
    for s in args.samples:
        results = np.array([one_run(spec, cfg, s, seed) for seed in range(args.seeds)])
        med = np.median(results, axis=0)
        rows.append([f"s={s}", f"{med[0]:.0f}", f"{med[1]:.2f}",
                     f"{med[2]:.0f}", f"{med[3]:.0f}"])

    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    print(f"\n(medians over {args.seeds} seeds on {args.scene})")


if __name__ == "__main__":
    main()
