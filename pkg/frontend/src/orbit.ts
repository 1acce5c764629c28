/** Minimal orbit camera: left-drag rotates, wheel zooms, shift-drag pans. */

import * as THREE from "three";

export class OrbitCamera {
  target = new THREE.Vector3();
  radius = 3;
  theta = Math.PI / 4; // azimuth
  phi = Math.PI / 3; // polar, from +z

  constructor(public camera: THREE.PerspectiveCamera) {}

  attach(element: HTMLElement): void {
    let dragging = false;
    let panning = false;
    let lastX = 0;
    let lastY = 0;
    element.addEventListener("pointerdown", (e) => {
      dragging = true;
      panning = e.shiftKey || e.button === 2;
      lastX = e.clientX;
      lastY = e.clientY;
      element.setPointerCapture(e.pointerId);
    });
    element.addEventListener("pointerup", () => {
      dragging = false;
    });
    element.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      const dx = e.clientX - lastX;
      const dy = e.clientY - lastY;
      lastX = e.clientX;
      lastY = e.clientY;
      if (panning) {
        this.pan(dx, dy);
      } else {
        this.theta -= dx * 0.008;
        this.phi = Math.min(Math.PI - 0.05, Math.max(0.05, this.phi - dy * 0.008));
      }
      this.apply();
    });
    element.addEventListener(
      "wheel",
      (e) => {
        e.preventDefault();
        this.radius *= Math.exp(e.deltaY * 0.001);
        this.radius = Math.min(50, Math.max(0.2, this.radius));
        this.apply();
      },
      { passive: false },
    );
    element.addEventListener("contextmenu", (e) => e.preventDefault());
    this.apply();
  }

  private pan(dx: number, dy: number): void {
    const scale = this.radius * 0.0015;
    const right = new THREE.Vector3();
    const up = new THREE.Vector3();
    this.camera.matrixWorld.extractBasis(right, up, new THREE.Vector3());
    this.target.addScaledVector(right, -dx * scale);
    this.target.addScaledVector(up, dy * scale);
  }

  fit(box: THREE.Box3): void {
    box.getCenter(this.target);
    const size = box.getSize(new THREE.Vector3()).length();
    this.radius = Math.max(size * 1.4, 0.5);
    this.apply();
  }

  apply(): void {
    const sp = Math.sin(this.phi);
    this.camera.position.set(
      this.target.x + this.radius * sp * Math.cos(this.theta),
      this.target.y + this.radius * sp * Math.sin(this.theta),
      this.target.z + this.radius * Math.cos(this.phi),
    );
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(this.target);
  }
}
