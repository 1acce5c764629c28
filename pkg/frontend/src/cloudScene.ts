/**
 * Point-cloud scene construction: one THREE.Points for the whole payload
 * (per-vertex colors by cluster, selection highlighted, noise dimmed) plus
 * one invisible pickable proxy per cluster so raycasting hits clusters, not
 * individual points.
 */

import * as THREE from "three";
import { ClustersPayload, ClusterSummary } from "./api.js";
import { clusterColor, highlightColor, NOISE_COLOR } from "./palette.js";

export function buildCloudPoints(
  payload: ClustersPayload,
  selected: Set<number>,
): THREE.Points {
  const n = payload.points.length;
  const positions = new Float32Array(n * 3);
  const colors = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    positions.set(payload.points[i], i * 3);
    const label = payload.labels[i];
    let rgb: [number, number, number];
    if (label < 0) {
      rgb = NOISE_COLOR;
    } else if (selected.has(label)) {
      rgb = highlightColor(label);
    } else {
      rgb = clusterColor(label);
    }
    colors.set(rgb, i * 3);
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.setAttribute("color", new THREE.BufferAttribute(colors, 3));
  const material = new THREE.PointsMaterial({ size: 0.012, vertexColors: true });
  const points = new THREE.Points(geometry, material);
  points.name = "cloud";
  return points;
}

/** One pickable entity per cluster, centered on its bounding box. */
export function buildClusterPickables(summaries: ClusterSummary[]): THREE.Group {
  const group = new THREE.Group();
  group.name = "pickables";
  for (const summary of summaries) {
    const size = new THREE.Vector3(
      Math.max(summary.aabb.max[0] - summary.aabb.min[0], 0.02),
      Math.max(summary.aabb.max[1] - summary.aabb.min[1], 0.02),
      Math.max(summary.aabb.max[2] - summary.aabb.min[2], 0.02),
    );
    const box = new THREE.Mesh(
      new THREE.BoxGeometry(size.x, size.y, size.z),
      new THREE.MeshBasicMaterial({ visible: false }),
    );
    box.position.set(...summary.centroid);
    box.userData.clusterId = summary.id;
    group.add(box);
  }
  return group;
}

/**
 * Cluster id under a normalized-device-coordinate cursor, or null. Raycasts
 * against the pickable proxies; nearest hit wins.
 */
export function pickClusterAt(
  ndc: { x: number; y: number },
  camera: THREE.Camera,
  pickables: THREE.Group,
): number | null {
  const raycaster = new THREE.Raycaster();
  raycaster.setFromCamera(new THREE.Vector2(ndc.x, ndc.y), camera);
  const hits = raycaster.intersectObjects(pickables.children, false);
  if (hits.length === 0) return null;
  const id = hits[0].object.userData.clusterId;
  return typeof id === "number" ? id : null;
}

/** Centroid of the displayed cloud; the plan triads should aim near it. */
export function cloudCentroid(payload: ClustersPayload): THREE.Vector3 {
  const c = new THREE.Vector3();
  for (const p of payload.points) c.add(new THREE.Vector3(...p));
  return payload.points.length ? c.divideScalar(payload.points.length) : c;
}
