/**
 * Graph view: vertical time bars along the x-axis, feature tracks as
 * horizontal lanes (barycenter-ordered to reduce crossings), and one edge
 * per coupling entry at or above the threshold, colored and faded by its
 * probability. Clicking a time bar focuses it with a fisheye of the axis;
 * clicking a node selects the feature.
 */

import {
  GraphEdge,
  NodeKey,
  TrackingDoc,
  ViewState,
  barycenterOrder,
  filterEdges,
  fisheyePositions,
  nodeKey,
  probabilityColor,
  reachableFrom,
} from "./model.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphViewCallbacks {
  onSelectStep(step: number): void;
  onSelectFeature(key: NodeKey | null): void;
}

interface LayoutPoint {
  x: number;
  y: number;
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

export class GraphView {
  private svg: SVGSVGElement;
  private animFrom: number[] | null = null;
  private animHandle = 0;

  constructor(
    private root: HTMLElement,
    private callbacks: GraphViewCallbacks,
  ) {
    this.svg = el("svg", { width: "100%", height: "100%" });
    this.svg.setAttribute("viewBox", "0 0 1000 560");
    root.appendChild(this.svg);
  }

  render(doc: TrackingDoc, state: ViewState): void {
    const target = fisheyePositions(doc.timesteps.length, state.selectedStep);
    if (this.animFrom && this.animFrom.length === target.length) {
      this.animate(doc, state, this.animFrom, target);
    } else {
      this.draw(doc, state, target);
    }
    this.animFrom = target;
  }

  /** Smooth fisheye transition between two axis layouts. */
  private animate(doc: TrackingDoc, state: ViewState, from: number[], to: number[]): void {
    cancelAnimationFrame(this.animHandle);
    const t0 = performance.now();
    const span = 250; // ms
    const step = (now: number) => {
      const u = Math.min(1, (now - t0) / span);
      const ease = u * (2 - u);
      const mix = from.map((f, i) => f + (to[i] - f) * ease);
      this.draw(doc, state, mix);
      if (u < 1) this.animHandle = requestAnimationFrame(step);
    };
    this.animHandle = requestAnimationFrame(step);
  }

  private draw(doc: TrackingDoc, state: ViewState, axis: number[]): void {
    this.svg.replaceChildren();
    const width = 1000;
    const height = 560;
    const margin = { left: 50, right: 30, top: 24, bottom: 30 };
    const innerW = width - margin.left - margin.right;
    const innerH = height - margin.top - margin.bottom;

    const orders = barycenterOrder(doc, state.threshold);
    const maxLanes = Math.max(...doc.timesteps.map((ts) => ts.nodes.length), 1);
    const pos = new Map<NodeKey, LayoutPoint>();
    doc.timesteps.forEach((ts, k) => {
      const x = margin.left + axis[k] * innerW;
      orders[k].forEach((i, lane) => {
        const y = margin.top + ((lane + 0.5) / maxLanes) * innerH;
        pos.set(nodeKey(ts.t, i), { x, y });
      });
    });

    const edges = filterEdges(doc, state.threshold);
    const pMax = doc.edges.reduce((acc, e) => Math.max(acc, e.probability), 0);
    const reach =
      state.selectedFeature !== null
        ? reachableFrom(doc, state.threshold, state.selectedFeature)
        : null;

    const stepOf = new Map<number, number>();
    doc.timesteps.forEach((ts, k) => stepOf.set(ts.t, k));

    // time bars behind everything else
    doc.timesteps.forEach((ts, k) => {
      const x = margin.left + axis[k] * innerW;
      const focused = state.selectedStep !== null && k === state.selectedStep;
      const nearFocus =
        state.selectedStep !== null && Math.abs(k - state.selectedStep) <= 2 && !focused;
      const bar = el("line", {
        x1: x,
        x2: x,
        y1: margin.top,
        y2: margin.top + innerH,
        stroke: focused ? "#c0392b" : nearFocus ? (k < (state.selectedStep ?? 0) ? "#e67e22" : "#2980b9") : "#bbb",
        "stroke-width": focused ? 4 : 2,
      });
      bar.addEventListener("click", () => this.callbacks.onSelectStep(k));
      bar.style.cursor = "pointer";
      this.svg.appendChild(bar);
      const label = el("text", {
        x,
        y: height - 8,
        "text-anchor": "middle",
        "font-size": 12,
        fill: "#555",
      });
      label.textContent = `t=${ts.t}`;
      this.svg.appendChild(label);
    });

    for (const e of edges) {
      const k = stepOf.get(e.t)!;
      const a = pos.get(nodeKey(e.t, e.i))!;
      const b = pos.get(nodeKey(doc.timesteps[k + 1].t, e.j))!;
      const inReach =
        reach !== null &&
        reach.has(nodeKey(e.t, e.i)) &&
        reach.has(nodeKey(doc.timesteps[k + 1].t, e.j));
      const line = el("line", {
        x1: a.x,
        y1: a.y,
        x2: b.x,
        y2: b.y,
        stroke: reach !== null && inReach ? "#d62728" : probabilityColor(e.probability, pMax),
        opacity: Math.max(0.25, pMax > 0 ? e.probability / pMax : 0),
        "stroke-width": 2,
      });
      this.svg.appendChild(line);
    }

    doc.timesteps.forEach((ts) => {
      ts.nodes.forEach((node, i) => {
        const key = nodeKey(ts.t, i);
        const p = pos.get(key)!;
        const selected = state.selectedFeature === key;
        const highlighted = reach?.has(key) ?? false;
        const radius = node.kind === "leaf" ? 5 : node.kind === "saddle" ? 3.5 : 4;
        const circle = el("circle", {
          cx: p.x,
          cy: p.y,
          r: selected ? radius + 2 : radius,
          fill: selected
            ? "#d62728"
            : highlighted
              ? "#ff7f0e"
              : node.kind === "leaf"
                ? "#1f77b4"
                : node.kind === "saddle"
                  ? "#7f7f7f"
                  : "#2ca02c",
          stroke: "#fff",
          "stroke-width": 1,
        });
        circle.style.cursor = "pointer";
        circle.addEventListener("click", (ev) => {
          ev.stopPropagation();
          this.callbacks.onSelectFeature(selected ? null : key);
        });
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent = `t=${ts.t} #${i} ${node.kind} f=${node.f.toFixed(4)}`;
        circle.appendChild(title);
        this.svg.appendChild(circle);
      });
    });
  }
}
