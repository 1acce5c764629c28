/**
 * Slice-direction input: the operator drags an arrow across the cloud; the
 * two screen points unproject onto the plane through the cloud center facing
 * the camera, and their difference becomes a unit world direction.
 */

import * as THREE from "three";

export function ndcToPlanePoint(
  ndc: { x: number; y: number },
  camera: THREE.Camera,
  plane: THREE.Plane,
): THREE.Vector3 | null {
  const raycaster = new THREE.Raycaster();
  raycaster.setFromCamera(new THREE.Vector2(ndc.x, ndc.y), camera);
  const hit = new THREE.Vector3();
  return raycaster.ray.intersectPlane(plane, hit) ? hit : null;
}

export function dragToWorldDirection(
  start: { x: number; y: number },
  end: { x: number; y: number },
  camera: THREE.Camera,
  cloudCenter: THREE.Vector3,
): [number, number, number] | null {
  const normal = new THREE.Vector3();
  camera.getWorldDirection(normal);
  const plane = new THREE.Plane().setFromNormalAndCoplanarPoint(normal, cloudCenter);
  const a = ndcToPlanePoint(start, camera, plane);
  const b = ndcToPlanePoint(end, camera, plane);
  if (!a || !b) return null;
  const dir = b.sub(a);
  if (dir.length() < 1e-9) return null;
  dir.normalize();
  return [dir.x, dir.y, dir.z];
}

export interface SegmentBox {
  min: [number, number, number];
  max: [number, number, number];
}

/**
 * Segment-box gizmo: a screen rectangle dragged over the cloud becomes an
 * axis-aligned world box. The two corners unproject onto the camera-facing
 * plane through the cloud center; along the view axis the box is padded out
 * to the cloud bounds so it cuts through the whole depth of the cloud.
 */
export function dragToSegmentBox(
  start: { x: number; y: number },
  end: { x: number; y: number },
  camera: THREE.Camera,
  cloudBox: THREE.Box3,
): SegmentBox | null {
  const center = cloudBox.getCenter(new THREE.Vector3());
  const normal = new THREE.Vector3();
  camera.getWorldDirection(normal);
  const plane = new THREE.Plane().setFromNormalAndCoplanarPoint(normal, center);
  const a = ndcToPlanePoint(start, camera, plane);
  const b = ndcToPlanePoint(end, camera, plane);
  if (!a || !b) return null;
  const lo = new THREE.Vector3(Math.min(a.x, b.x), Math.min(a.y, b.y), Math.min(a.z, b.z));
  const hi = new THREE.Vector3(Math.max(a.x, b.x), Math.max(a.y, b.y), Math.max(a.z, b.z));
  if (lo.distanceTo(hi) < 1e-9) return null;
  const axes = [Math.abs(normal.x), Math.abs(normal.y), Math.abs(normal.z)];
  const viewAxis = axes.indexOf(Math.max(...axes));
  lo.setComponent(viewAxis, cloudBox.min.getComponent(viewAxis) - 1e-6);
  hi.setComponent(viewAxis, cloudBox.max.getComponent(viewAxis) + 1e-6);
  return { min: [lo.x, lo.y, lo.z], max: [hi.x, hi.y, hi.z] };
}
