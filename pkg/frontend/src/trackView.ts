/**
 * Track view: five consecutive field slices stacked in 3D spacetime with the
 * threshold-filtered tracks drawn as polylines between them. Dragging
 * rotates, the wheel zooms. Rendering is a hand-rolled orthographic
 * projection onto a 2D canvas (painter's order back to front), which keeps
 * the bundle dependency-free.
 */

import {
  NodeKey,
  TrackingDoc,
  ViewState,
  highlightedTracks,
  nodeKey,
  parseNodeKey,
  trackWindow,
} from "./model.js";
import { fieldExtent, valueColor } from "./dataView.js";

type Vec3 = [number, number, number];

function rotate(v: Vec3, rotX: number, rotY: number): Vec3 {
  const [x, y, z] = v;
  // yaw around z, then tilt around x
  const cy = Math.cos(rotY);
  const sy = Math.sin(rotY);
  const x1 = x * cy - y * sy;
  const y1 = x * sy + y * cy;
  const cx = Math.cos(rotX);
  const sx = Math.sin(rotX);
  const y2 = y1 * cx - z * sx;
  const z2 = y1 * sx + z * cx;
  return [x1, y2, z2];
}

export class TrackView {
  private canvas: HTMLCanvasElement;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(
    private root: HTMLElement,
    private onCamera: (rotX: number, rotY: number, zoom: number) => void,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.width = 640;
    this.canvas.height = 520;
    root.appendChild(this.canvas);

    this.canvas.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
    });
    window.addEventListener("mouseup", () => (this.dragging = false));
    window.addEventListener("mousemove", (e) => {
      if (!this.dragging) return;
      const dx = (e.clientX - this.lastX) * 0.01;
      const dy = (e.clientY - this.lastY) * 0.01;
      this.lastX = e.clientX;
      this.lastY = e.clientY;
      this.drag(dx, dy);
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.wheel(e.deltaY);
    });
  }

  private state: ViewState | null = null;

  private drag(dx: number, dy: number): void {
    if (!this.state) return;
    const cam = this.state.camera;
    this.onCamera(
      Math.max(-Math.PI / 2, Math.min(0, cam.rotX + dy)),
      cam.rotY + dx,
      cam.zoom,
    );
  }

  private wheel(delta: number): void {
    if (!this.state) return;
    const cam = this.state.camera;
    const zoom = Math.max(0.3, Math.min(4, cam.zoom * (delta > 0 ? 0.9 : 1.1)));
    this.onCamera(cam.rotX, cam.rotY, zoom);
  }

  render(doc: TrackingDoc, state: ViewState): void {
    this.state = state;
    const ctx = this.canvas.getContext("2d")!;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    const center = state.selectedStep ?? Math.floor(doc.timesteps.length / 2);
    const window5 = trackWindow(doc, center);
    const stepSet = new Set(window5.map((k) => doc.timesteps[k].t));
    const cam = state.camera;
    const scale = Math.min(width, height) * 0.42 * cam.zoom;

    const project = (p: Vec3): [number, number, number] => {
      const r = rotate(p, cam.rotX, cam.rotY);
      return [width / 2 + r[0] * scale, height / 2 - r[2] * scale, r[1]];
    };

    // normalized field coordinates in [-0.5, 0.5]^2, slices stacked in z
    const zOf = new Map<number, number>();
    window5.forEach((k, pos) => zOf.set(k, (pos / Math.max(window5.length - 1, 1)) - 0.5));

    // slices back to front for the painter's order
    const byDepth = [...window5].sort((a, b) => {
      const za = rotate([0, 0, zOf.get(a)!], cam.rotX, cam.rotY)[1];
      const zb = rotate([0, 0, zOf.get(b)!], cam.rotX, cam.rotY)[1];
      return za - zb;
    });

    for (const k of byDepth) {
      this.drawSlice(ctx, doc, k, zOf.get(k)!, project, k === center);
    }

    const tracks = highlightedTracks(doc, state.threshold, state.selectedFeature);
    const selected = state.selectedFeature !== null;
    for (const track of tracks) {
      const pts: [number, number][] = [];
      for (const key of track.nodes) {
        const { t, index } = parseNodeKey(key);
        const stepIdx = doc.timesteps.findIndex((ts) => ts.t === t);
        if (!stepSet.has(t)) continue;
        const node = doc.timesteps[stepIdx].nodes[index];
        const [nx, ny] = this.normalized(doc, stepIdx, node.coords);
        const [px, py] = project([nx, ny, zOf.get(stepIdx)!]);
        pts.push([px, py]);
      }
      if (pts.length < 2) continue;
      ctx.beginPath();
      ctx.moveTo(pts[0][0], pts[0][1]);
      for (const [x, y] of pts.slice(1)) ctx.lineTo(x, y);
      ctx.strokeStyle = selected ? "rgba(214,39,40,0.95)" : "rgba(31,119,180,0.8)";
      ctx.lineWidth = selected ? 2.5 : 1.5;
      ctx.stroke();
    }
  }

  private normalized(doc: TrackingDoc, stepIdx: number, coords: number[]): [number, number] {
    const field = doc.timesteps[stepIdx].field;
    // exported spacing already folds in the downsample stride
    const spacing = field.spacing ?? field.dims.map(() => 1);
    const origin = field.origin ?? field.dims.map(() => 0);
    const extent = field.dims.map((d, ax) => (d - 1) * spacing[ax]);
    const x = (coords[0] - origin[0]) / Math.max(extent[0], 1e-12) - 0.5;
    const y = (coords[1] - origin[1]) / Math.max(extent[1], 1e-12) - 0.5;
    return [x, y];
  }

  private drawSlice(
    ctx: CanvasRenderingContext2D,
    doc: TrackingDoc,
    stepIdx: number,
    z: number,
    project: (p: Vec3) => [number, number, number],
    focused: boolean,
  ): void {
    const field = doc.timesteps[stepIdx].field;
    const [lo, hi] = fieldExtent(field.values);
    const [nx, ny] = field.dims;
    const cell = 1 / Math.max(nx - 1, ny - 1);
    // coarse quads keep the canvas fill fast for big slices
    const stride = Math.max(1, Math.floor(Math.max(nx, ny) / 48));
    for (let i = 0; i < nx - stride; i += stride) {
      for (let j = 0; j < ny - stride; j += stride) {
        const v = field.values[i * ny + j];
        const x0 = i / (nx - 1) - 0.5;
        const y0 = j / (ny - 1) - 0.5;
        const quad: Vec3[] = [
          [x0, y0, z],
          [x0 + cell * stride, y0, z],
          [x0 + cell * stride, y0 + cell * stride, z],
          [x0, y0 + cell * stride, z],
        ];
        ctx.beginPath();
        quad.forEach((p, k) => {
          const [px, py] = project(p);
          if (k === 0) ctx.moveTo(px, py);
          else ctx.lineTo(px, py);
        });
        ctx.closePath();
        ctx.fillStyle = valueColor(v, lo, hi, focused ? 0.95 : 0.6);
        ctx.fill();
      }
    }
  }
}
