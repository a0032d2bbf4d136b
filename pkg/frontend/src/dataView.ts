/**
 * Data view: the five field slices around the focused timestep drawn side by
 * side as heatmaps, with tracked features dotted on top; features on the
 * selected tracks are highlighted in magenta.
 */

import {
  NodeKey,
  TrackingDoc,
  ViewState,
  nodeKey,
  reachableFrom,
  trackWindow,
} from "./model.js";

export function fieldExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi > lo)) hi = lo + 1;
  return [lo, hi];
}

/** Blue-white-red diverging map over [lo, hi]. */
export function valueColor(v: number, lo: number, hi: number, alpha = 1): string {
  const x = Math.max(0, Math.min(1, (v - lo) / (hi - lo)));
  const r = Math.round(255 * Math.min(1, 2 * x));
  const b = Math.round(255 * Math.min(1, 2 * (1 - x)));
  const g = Math.round(235 * (1 - Math.abs(2 * x - 1)));
  return `rgba(${r},${g},${b},${alpha})`;
}

export class DataView {
  constructor(private root: HTMLElement) {}

  render(doc: TrackingDoc, state: ViewState): void {
    this.root.replaceChildren();
    const center = state.selectedStep ?? Math.floor(doc.timesteps.length / 2);
    const window5 = trackWindow(doc, center);
    const reach =
      state.selectedFeature !== null
        ? reachableFrom(doc, state.threshold, state.selectedFeature)
        : null;

    for (const k of window5) {
      const ts = doc.timesteps[k];
      const holder = document.createElement("div");
      holder.className = "data-slice" + (k === center ? " focused" : "");
      const label = document.createElement("div");
      label.className = "slice-label";
      label.textContent = `t = ${ts.t}`;
      const canvas = document.createElement("canvas");
      const [nx, ny] = ts.field.dims;
      canvas.width = ny;
      canvas.height = nx;
      canvas.style.width = "150px";
      canvas.style.imageRendering = "pixelated";
      this.paint(canvas, ts.field.values, nx, ny);
      this.dots(canvas, doc, k, reach);
      holder.appendChild(label);
      holder.appendChild(canvas);
      this.root.appendChild(holder);
    }
  }

  private paint(canvas: HTMLCanvasElement, values: number[], nx: number, ny: number): void {
    const ctx = canvas.getContext("2d")!;
    const img = ctx.createImageData(ny, nx);
    const [lo, hi] = fieldExtent(values);
    for (let i = 0; i < nx; i++) {
      for (let j = 0; j < ny; j++) {
        const x = Math.max(0, Math.min(1, (values[i * ny + j] - lo) / (hi - lo)));
        const o = (i * ny + j) * 4;
        img.data[o] = Math.round(255 * Math.min(1, 2 * x));
        img.data[o + 1] = Math.round(235 * (1 - Math.abs(2 * x - 1)));
        img.data[o + 2] = Math.round(255 * Math.min(1, 2 * (1 - x)));
        img.data[o + 3] = 255;
      }
    }
    ctx.putImageData(img, 0, 0);
  }

  private dots(
    canvas: HTMLCanvasElement,
    doc: TrackingDoc,
    stepIdx: number,
    reach: Set<NodeKey> | null,
  ): void {
    const ctx = canvas.getContext("2d")!;
    const ts = doc.timesteps[stepIdx];
    const field = ts.field;
    // exported spacing already folds in the downsample stride
    const spacing = field.spacing ?? field.dims.map(() => 1);
    const origin = field.origin ?? field.dims.map(() => 0);
    ts.nodes.forEach((node, i) => {
      const gx = (node.coords[0] - origin[0]) / spacing[0];
      const gy = (node.coords[1] - origin[1]) / spacing[1];
      const key = nodeKey(ts.t, i);
      const highlighted = reach?.has(key) ?? false;
      ctx.beginPath();
      ctx.arc(gy, gx, highlighted ? 2.4 : 1.6, 0, 2 * Math.PI);
      ctx.fillStyle = highlighted ? "#ff00ff" : node.kind === "leaf" ? "#111" : "#666";
      ctx.fill();
    });
  }
}
