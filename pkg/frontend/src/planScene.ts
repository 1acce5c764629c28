/**
 * Plan preview: every target renders as an RGB axis triad at its pose, and
 * each row gets an ordered polyline connecting its targets. Triad +z (blue)
 * is the approach axis and should point at the surface.
 */

import * as THREE from "three";
import { Plan, PlanTarget } from "./api.js";
import { clusterColor } from "./palette.js";

export const TRIAD_NAME = "target-triad";
export const POLYLINE_NAME = "row-polyline";

export function quaternionToThree(q: [number, number, number, number]): THREE.Quaternion {
  // plan files store (w, x, y, z); three wants (x, y, z, w)
  return new THREE.Quaternion(q[1], q[2], q[3], q[0]);
}

export function approachAxis(target: PlanTarget): THREE.Vector3 {
  return new THREE.Vector3(0, 0, 1).applyQuaternion(quaternionToThree(target.quaternion));
}

function buildTriad(target: PlanTarget, size: number): THREE.Group {
  const triad = new THREE.Group();
  triad.name = TRIAD_NAME;
  const axes: [THREE.Vector3, number][] = [
    [new THREE.Vector3(1, 0, 0), 0xe05048],
    [new THREE.Vector3(0, 1, 0), 0x50c878],
    [new THREE.Vector3(0, 0, 1), 0x4878e0],
  ];
  for (const [dir, color] of axes) {
    const geometry = new THREE.BufferGeometry().setFromPoints([
      new THREE.Vector3(0, 0, 0),
      dir.clone().multiplyScalar(size),
    ]);
    triad.add(new THREE.Line(geometry, new THREE.LineBasicMaterial({ color })));
  }
  triad.position.set(...target.position);
  triad.quaternion.copy(quaternionToThree(target.quaternion));
  triad.userData.row = target.row;
  triad.userData.seq = target.seq;
  return triad;
}

export function buildPlanGroup(plan: Plan, triadSize = 0.05): THREE.Group {
  const group = new THREE.Group();
  group.name = "plan";
  const rows = new Map<number, PlanTarget[]>();
  for (const target of plan.targets) {
    group.add(buildTriad(target, triadSize));
    const row = rows.get(target.row);
    if (row) {
      row.push(target);
    } else {
      rows.set(target.row, [target]);
    }
  }
  for (const [rowId, targets] of rows) {
    if (targets.length < 2) continue;
    const pts = targets.map((t) => new THREE.Vector3(...t.position));
    const geometry = new THREE.BufferGeometry().setFromPoints(pts);
    const [r, g, b] = clusterColor(rowId);
    const line = new THREE.Line(
      geometry,
      new THREE.LineBasicMaterial({ color: new THREE.Color(r, g, b) }),
    );
    line.name = POLYLINE_NAME;
    line.userData.row = rowId;
    group.add(line);
  }
  return group;
}

export function triadCount(group: THREE.Group): number {
  return group.children.filter((c) => c.name === TRIAD_NAME).length;
}

export function polylineCount(group: THREE.Group): number {
  return group.children.filter((c) => c.name === POLYLINE_NAME).length;
}

/**
 * Fraction of targets whose approach axis points toward the cloud (negative
 * dot with the outward direction from the cloud center). Shown as a badge so
 * the operator can sanity-check orientation before executing anything.
 */
export function facingFraction(plan: Plan, cloudCenter: THREE.Vector3): number {
  if (plan.targets.length === 0) return 0;
  let facing = 0;
  for (const target of plan.targets) {
    const pos = new THREE.Vector3(...target.position);
    const outward = pos.clone().sub(cloudCenter).normalize();
    if (approachAxis(target).dot(outward) < 0) facing += 1;
  }
  return facing / plan.targets.length;
}
