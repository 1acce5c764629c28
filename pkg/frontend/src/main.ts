/**
 * Browser entry: wires the 3D canvas, the cluster panel, slice controls, and
 * the submit/preview workflow against the session API. All reusable logic
 * lives in the sibling modules; this file is DOM glue.
 */

import * as THREE from "three";
import { ApiError, ClustersPayload, SessionApi, SliceSpec } from "./api.js";
import { buildCloudPoints, buildClusterPickables, cloudCentroid, pickClusterAt } from "./cloudScene.js";
import { dragToSegmentBox, dragToWorldDirection, SegmentBox } from "./directions.js";
import { OrbitCamera } from "./orbit.js";
import { clusterColor } from "./palette.js";
import { buildPlanGroup, facingFraction, triadCount } from "./planScene.js";
import { initialState, submitSelection, syncSession, toggleCluster, ViewState } from "./state.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const panel = {
  session: el("session-label"),
  status: el("status-banner"),
  clusters: el("cluster-list"),
  sliceMode: el("slice-mode") as HTMLSelectElement,
  rowCount: el("row-count") as HTMLInputElement,
  directionLabel: el("direction-label"),
  drawDirection: el("draw-direction") as HTMLButtonElement,
  drawSegment: el("draw-segment") as HTMLButtonElement,
  submit: el("submit") as HTMLButtonElement,
  overlay: el("plan-overlay") as HTMLInputElement,
  planInfo: el("plan-info"),
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
const scene = new THREE.Scene();
scene.background = new THREE.Color(0x10141a);
const camera = new THREE.PerspectiveCamera(55, 1, 0.01, 200);
const orbit = new OrbitCamera(camera);
orbit.attach(canvas);

let state: ViewState;
let api: SessionApi;
let payload: ClustersPayload | null = null;
let cloud: THREE.Points | null = null;
let pickables: THREE.Group | null = null;
let planGroup: THREE.Group | null = null;
let armedDirection = false;
let armedSegment = false;
let segmentBox: SegmentBox | null = null;
let dragStart: { x: number; y: number } | null = null;

function resize(): void {
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  renderer.setSize(w, h, false);
  camera.aspect = w / Math.max(h, 1);
  camera.updateProjectionMatrix();
}

function ndcFromEvent(e: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((e.clientX - rect.left) / rect.width) * 2 - 1,
    y: -((e.clientY - rect.top) / rect.height) * 2 + 1,
  };
}

function setStatus(text: string, kind: "info" | "error" = "info"): void {
  panel.status.textContent = text;
  panel.status.className = kind === "error" ? "banner error" : "banner";
}

function rebuildCloud(): void {
  if (!payload) return;
  if (cloud) scene.remove(cloud);
  cloud = buildCloudPoints(payload, state.selected);
  scene.add(cloud);
}

function rebuildPlan(): void {
  if (planGroup) {
    scene.remove(planGroup);
    planGroup = null;
  }
  if (state.plan && state.showPlanOverlay && payload) {
    planGroup = buildPlanGroup(state.plan);
    scene.add(planGroup);
    const facing = Math.round(facingFraction(state.plan, cloudCentroid(payload)) * 100);
    const rows = new Set(state.plan.targets.map((t) => t.row)).size;
    panel.planInfo.textContent =
      `plan v${state.planVersion}: ${triadCount(planGroup)} targets in ${rows} row(s), ` +
      `${facing}% facing the surface`;
  } else if (!state.plan) {
    panel.planInfo.textContent = "no plan yet";
  }
}

function renderClusterList(): void {
  if (!payload) return;
  panel.clusters.replaceChildren();
  for (const summary of payload.summaries) {
    const row = document.createElement("label");
    row.className = "cluster-row";
    const check = document.createElement("input");
    check.type = "checkbox";
    check.checked = state.selected.has(summary.id);
    check.addEventListener("change", () => {
      toggleCluster(state, summary.id);
      rebuildCloud();
      renderClusterList();
    });
    const chip = document.createElement("span");
    chip.className = "chip";
    const [r, g, b] = clusterColor(summary.id);
    chip.style.background = `rgb(${r * 255}, ${g * 255}, ${b * 255})`;
    const text = document.createElement("span");
    text.textContent = `cluster ${summary.id} — ${summary.count} pts`;
    row.append(check, chip, text);
    panel.clusters.append(row);
  }
}

function currentSlice(): SliceSpec | null {
  const mode = panel.sliceMode.value as SliceSpec["mode"];
  const rowCount = Math.max(1, Number(panel.rowCount.value) || 1);
  if (mode === "auto") {
    return rowCount === 1 ? null : { mode: "auto", row_count: rowCount };
  }
  if (mode === "direction") {
    if (!state.slice || state.slice.mode !== "direction" || !state.slice.direction) {
      return null; // not drawn yet; submit falls back to auto
    }
    return { mode: "direction", direction: state.slice.direction, row_count: rowCount };
  }
  if (mode === "segment") {
    return segmentBox ? { mode: "segment", segment: segmentBox, row_count: rowCount } : null;
  }
  return null;
}

canvas.addEventListener("pointerdown", (e) => {
  if (armedDirection || armedSegment) dragStart = ndcFromEvent(e);
});

canvas.addEventListener("pointerup", (e) => {
  const ndc = ndcFromEvent(e);
  if (armedDirection && dragStart && payload) {
    const dir = dragToWorldDirection(dragStart, ndc, camera, cloudCentroid(payload));
    if (dir) {
      state.slice = { mode: "direction", direction: dir, row_count: Number(panel.rowCount.value) || 1 };
      panel.directionLabel.textContent =
        `direction: [${dir.map((v) => v.toFixed(2)).join(", ")}]`;
      panel.sliceMode.value = "direction";
    }
    armedDirection = false;
    dragStart = null;
    panel.drawDirection.textContent = "draw direction";
    return;
  }
  if (armedSegment && dragStart && cloud) {
    const box = dragToSegmentBox(dragStart, ndc, camera,
                                 new THREE.Box3().setFromObject(cloud));
    if (box) {
      segmentBox = box;
      panel.sliceMode.value = "segment";
      panel.directionLabel.textContent =
        `segment: [${box.min.map((v) => v.toFixed(2)).join(", ")}] .. ` +
        `[${box.max.map((v) => v.toFixed(2)).join(", ")}]`;
    }
    armedSegment = false;
    dragStart = null;
    panel.drawSegment.textContent = "draw segment box";
    return;
  }
  if (pickables && state.phase === "selecting") {
    const id = pickClusterAt(ndc, camera, pickables);
    if (id !== null) {
      toggleCluster(state, id);
      rebuildCloud();
      renderClusterList();
    }
  }
});

panel.drawDirection.addEventListener("click", () => {
  armedDirection = !armedDirection;
  armedSegment = false;
  panel.drawDirection.textContent = armedDirection ? "drag on cloud…" : "draw direction";
});

panel.drawSegment.addEventListener("click", () => {
  armedSegment = !armedSegment;
  armedDirection = false;
  panel.drawSegment.textContent = armedSegment ? "drag a box…" : "draw segment box";
});

panel.overlay.addEventListener("change", () => {
  state.showPlanOverlay = panel.overlay.checked;
  rebuildPlan();
});

panel.submit.addEventListener("click", async () => {
  if (state.selected.size === 0) {
    setStatus("select at least one cluster", "error");
  }
  state.slice = currentSlice();
  setStatus("planning…");
  panel.submit.disabled = true;
  const ok = await submitSelection(state, api);
  panel.submit.disabled = false;
  if (ok) {
    setStatus(`planned (v${state.planVersion})`);
    rebuildPlan();
  } else {
    // 4xx from the server: keep the selection, show the reason inline
    setStatus(state.error ?? "selection rejected", "error");
  }
});

async function boot(): Promise<void> {
  const base = window.location.origin;
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    const listing = await fetch(`${base}/api/sessions`);
    if (listing.ok) {
      sessionId = ((await listing.json()).sessions ?? [])[0] ?? null;
    }
  }
  if (!sessionId) {
    setStatus("no session found; pass ?session=<id>", "error");
    return;
  }
  state = initialState(sessionId);
  api = new SessionApi(base, sessionId);
  panel.session.textContent = `session ${sessionId}`;
  try {
    await syncSession(state, api);
    payload = await api.getClusters();
  } catch (err) {
    setStatus(err instanceof ApiError ? err.detail : String(err), "error");
    return;
  }
  if (payload.thinned) {
    setStatus(`showing ${payload.points.length} of ${payload.total_points} points (thinned)`);
  } else {
    setStatus(state.phase === "planned" ? "plan ready" : "pick clusters, then submit");
  }
  rebuildCloud();
  renderClusterList();
  rebuildPlan();
  if (pickables) scene.remove(pickables);
  pickables = buildClusterPickables(payload.summaries);
  scene.add(pickables);
  if (cloud) {
    orbit.fit(new THREE.Box3().setFromObject(cloud));
  }
}

function animate(): void {
  resize();
  renderer.render(scene, camera);
  requestAnimationFrame(animate);
}

void boot();
animate();
