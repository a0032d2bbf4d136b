/**
 * Document model for the probabilistic tracking-graph viewer.
 *
 * Everything here is pure and rendering-free: the views call these helpers
 * with a parsed document and a view state, and never mutate either. Edge
 * filtering, reachability, track segmentation, lane ordering, and the
 * fisheye axis are all plain functions so they can be unit-tested headless.
 */

export type NodeKind = "leaf" | "saddle" | "root";

export interface FieldSummary {
  dims: number[];
  origin?: number[];
  spacing?: number[];
  values: number[];
  downsample?: number;
}

export interface GraphNode {
  id: number;
  coords: number[];
  f: number;
  kind: NodeKind;
}

export interface Timestep {
  t: number;
  field: FieldSummary;
  nodes: GraphNode[];
}

export interface GraphEdge {
  t: number;
  i: number;
  j: number;
  probability: number;
}

export interface TrajectoryStep {
  t: number;
  node: number;
}

export interface TrackingDoc {
  timesteps: Timestep[];
  edges: GraphEdge[];
  trajectories: TrajectoryStep[][];
  metadata: {
    alpha: number;
    epsilon: number;
    per_pair_m: number[];
    strategies: { edge: string; node: string; attribute: string };
    direction?: string;
    domain_diag?: number;
  };
}

/** Stable key for a feature: timestep value + node index at that step. */
export type NodeKey = string;

export function nodeKey(t: number, index: number): NodeKey {
  return `${t}:${index}`;
}

export function parseNodeKey(key: NodeKey): { t: number; index: number } {
  const [t, index] = key.split(":").map(Number);
  return { t, index };
}

export class DocumentError extends Error {}

/** Structural validation; throws DocumentError with a readable message. */
export function parseDocument(raw: unknown): TrackingDoc {
  if (typeof raw !== "object" || raw === null) {
    throw new DocumentError("document is not an object");
  }
  const doc = raw as Partial<TrackingDoc>;
  if (!Array.isArray(doc.timesteps) || doc.timesteps.length === 0) {
    throw new DocumentError("document has no timesteps");
  }
  if (!Array.isArray(doc.edges)) {
    throw new DocumentError("document has no edges array");
  }
  if (!Array.isArray(doc.trajectories)) {
    throw new DocumentError("document has no trajectories array");
  }
  const order = new Map<number, number>();
  doc.timesteps.forEach((ts, k) => {
    if (typeof ts.t !== "number" || !Array.isArray(ts.nodes)) {
      throw new DocumentError(`timestep ${k} is malformed`);
    }
    if (!ts.field || !Array.isArray(ts.field.dims) || !Array.isArray(ts.field.values)) {
      throw new DocumentError(`timestep ${k} has no field summary`);
    }
    order.set(ts.t, k);
  });
  for (const e of doc.edges) {
    if (
      typeof e.t !== "number" ||
      typeof e.i !== "number" ||
      typeof e.j !== "number" ||
      typeof e.probability !== "number"
    ) {
      throw new DocumentError("edge is malformed");
    }
    if (!(e.probability > 0 && e.probability <= 1)) {
      throw new DocumentError(`edge probability ${e.probability} outside (0, 1]`);
    }
    const pos = order.get(e.t);
    if (pos === undefined || pos + 1 >= doc.timesteps.length) {
      throw new DocumentError(`edge at t=${e.t} has no successor timestep`);
    }
    const src = doc.timesteps[pos];
    const dst = doc.timesteps[pos + 1];
    if (e.i < 0 || e.i >= src.nodes.length || e.j < 0 || e.j >= dst.nodes.length) {
      throw new DocumentError(`edge (${e.t}, ${e.i} -> ${e.j}) points outside the node lists`);
    }
  }
  return doc as TrackingDoc;
}

export interface ViewState {
  /** index into doc.timesteps, or null when nothing is focused */
  selectedStep: number | null;
  selectedFeature: NodeKey | null;
  threshold: number;
  camera: { rotX: number; rotY: number; zoom: number };
}

export function initialViewState(): ViewState {
  return {
    selectedStep: null,
    selectedFeature: null,
    threshold: 0,
    camera: { rotX: -0.9, rotY: 0.0, zoom: 1.0 },
  };
}

export function setThreshold(state: ViewState, threshold: number): ViewState {
  return { ...state, threshold: Math.max(0, Math.min(1, threshold)) };
}

export function selectFeature(state: ViewState, feature: NodeKey | null): ViewState {
  return { ...state, selectedFeature: feature };
}

export function selectTimestep(state: ViewState, step: number | null): ViewState {
  return { ...state, selectedStep: step };
}

/** Edges at or above the probability threshold. Monotone: raising the
 * threshold never adds edges. */
export function filterEdges(doc: TrackingDoc, threshold: number): GraphEdge[] {
  return doc.edges.filter((e) => e.probability >= threshold);
}

function stepIndexMap(doc: TrackingDoc): Map<number, number> {
  const m = new Map<number, number>();
  doc.timesteps.forEach((ts, k) => m.set(ts.t, k));
  return m;
}

interface Adjacency {
  forward: Map<NodeKey, { key: NodeKey; probability: number }[]>;
  backward: Map<NodeKey, { key: NodeKey; probability: number }[]>;
}

export function adjacency(doc: TrackingDoc, threshold: number): Adjacency {
  const order = stepIndexMap(doc);
  const forward = new Map<NodeKey, { key: NodeKey; probability: number }[]>();
  const backward = new Map<NodeKey, { key: NodeKey; probability: number }[]>();
  for (const e of filterEdges(doc, threshold)) {
    const k = order.get(e.t)!;
    const src = nodeKey(doc.timesteps[k].t, e.i);
    const dst = nodeKey(doc.timesteps[k + 1].t, e.j);
    if (!forward.has(src)) forward.set(src, []);
    forward.get(src)!.push({ key: dst, probability: e.probability });
    if (!backward.has(dst)) backward.set(dst, []);
    backward.get(dst)!.push({ key: src, probability: e.probability });
  }
  return { forward, backward };
}

/** Connected set of nodes reachable from the selection through edges at or
 * above the threshold (undirected reachability). */
export function reachableFrom(
  doc: TrackingDoc,
  threshold: number,
  start: NodeKey,
): Set<NodeKey> {
  const adj = adjacency(doc, threshold);
  const seen = new Set<NodeKey>([start]);
  const queue: NodeKey[] = [start];
  while (queue.length) {
    const cur = queue.shift()!;
    const next = [
      ...(adj.forward.get(cur) ?? []),
      ...(adj.backward.get(cur) ?? []),
    ];
    for (const { key } of next) {
      if (!seen.has(key)) {
        seen.add(key);
        queue.push(key);
      }
    }
  }
  return seen;
}

export interface Track {
  /** node keys in time order */
  nodes: NodeKey[];
}

/**
 * Maximal chains of the threshold-filtered graph.
 *
 * A node with more than one incoming or outgoing filtered edge is a
 * junction: chains terminate there, and the junction belongs to every
 * incident chain (a merge-then-split feature sits at the intersection of
 * its four tracks). Unconnected nodes form singleton tracks.
 */
export function computeTracks(doc: TrackingDoc, threshold: number): Track[] {
  const adj = adjacency(doc, threshold);
  const outDeg = (k: NodeKey) => adj.forward.get(k)?.length ?? 0;
  const inDeg = (k: NodeKey) => adj.backward.get(k)?.length ?? 0;
  const isJunction = (k: NodeKey) => outDeg(k) > 1 || inDeg(k) > 1;

  const allKeys: NodeKey[] = [];
  for (const ts of doc.timesteps) {
    ts.nodes.forEach((_, i) => allKeys.push(nodeKey(ts.t, i)));
  }

  const tracks: Track[] = [];
  for (const key of allKeys) {
    const starts = inDeg(key) === 0 || isJunction(key);
    if (!starts) continue;
    const outs = adj.forward.get(key) ?? [];
    if (outs.length === 0) {
      if (inDeg(key) === 0) tracks.push({ nodes: [key] });
      continue;
    }
    for (const { key: first } of outs) {
      const chain: NodeKey[] = [key, first];
      let cur = first;
      while (!isJunction(cur) && outDeg(cur) === 1) {
        const nxt = adj.forward.get(cur)![0].key;
        chain.push(nxt);
        cur = nxt;
      }
      tracks.push({ nodes: chain });
    }
  }
  return tracks;
}

/** Tracks passing through the node (junctions belong to every incident chain). */
export function incidentTracks(tracks: Track[], key: NodeKey): Track[] {
  return tracks.filter((tr) => tr.nodes.includes(key));
}

/** Tracks highlighted for a selection: those intersecting the reachable set. */
export function highlightedTracks(
  doc: TrackingDoc,
  threshold: number,
  selection: NodeKey | null,
): Track[] {
  const tracks = computeTracks(doc, threshold);
  if (selection === null) return tracks;
  const reach = reachableFrom(doc, threshold, selection);
  return tracks.filter((tr) => tr.nodes.some((k) => reach.has(k)));
}

/**
 * Horizontal lane order per timestep: single-pass barycenter sweep.
 *
 * The first timestep keeps node order; each later step sorts nodes by the
 * mean lane of their filtered predecessors (nodes without predecessors keep
 * a stable position at the end, ordered by index).
 */
export function barycenterOrder(doc: TrackingDoc, threshold: number): number[][] {
  const adj = adjacency(doc, threshold);
  const orders: number[][] = [];
  const lane = new Map<NodeKey, number>();
  doc.timesteps.forEach((ts, k) => {
    let order: number[];
    if (k === 0) {
      order = ts.nodes.map((_, i) => i);
    } else {
      const scored = ts.nodes.map((_, i) => {
        const key = nodeKey(ts.t, i);
        const preds = adj.backward.get(key) ?? [];
        const score =
          preds.length === 0
            ? Number.POSITIVE_INFINITY
            : preds.reduce((acc, p) => acc + (lane.get(p.key) ?? 0), 0) / preds.length;
        return { i, score };
      });
      scored.sort((a, b) => a.score - b.score || a.i - b.i);
      order = scored.map((s) => s.i);
    }
    order.forEach((i, pos) => lane.set(nodeKey(ts.t, i), pos));
    orders.push(order);
  });
  return orders;
}

/** Crossing count of consecutive-step edges under the given lane orders. */
export function countCrossings(
  doc: TrackingDoc,
  threshold: number,
  orders: number[][],
): number {
  const order = stepIndexMap(doc);
  const lanes = orders.map((o) => {
    const m = new Map<number, number>();
    o.forEach((i, pos) => m.set(i, pos));
    return m;
  });
  let crossings = 0;
  const edges = filterEdges(doc, threshold);
  for (let a = 0; a < edges.length; a++) {
    for (let b = a + 1; b < edges.length; b++) {
      const ea = edges[a];
      const eb = edges[b];
      if (ea.t !== eb.t) continue;
      const k = order.get(ea.t)!;
      const ya0 = lanes[k].get(ea.i)!;
      const yb0 = lanes[k].get(eb.i)!;
      const ya1 = lanes[k + 1].get(ea.j)!;
      const yb1 = lanes[k + 1].get(eb.j)!;
      if ((ya0 - yb0) * (ya1 - yb1) < 0) crossings += 1;
    }
  }
  return crossings;
}

/**
 * Time-bar x positions in [0, 1] with a fisheye focus: bars within
 * `windowSize` of the focus take `magnification` times the width of the
 * others. No focus gives uniform spacing.
 */
export function fisheyePositions(
  count: number,
  focus: number | null,
  magnification = 3,
  windowSize = 2,
): number[] {
  if (count <= 0) return [];
  if (count === 1) return [0.5];
  const weights: number[] = [];
  for (let i = 0; i < count - 1; i++) {
    // weight of the gap between bar i and i+1
    const near =
      focus !== null &&
      (Math.abs(i - focus) <= windowSize || Math.abs(i + 1 - focus) <= windowSize);
    weights.push(near ? magnification : 1);
  }
  const total = weights.reduce((a, b) => a + b, 0);
  const positions = [0];
  let acc = 0;
  for (const w of weights) {
    acc += w / total;
    positions.push(acc);
  }
  return positions;
}

/** Up to five consecutive step indices centered on the selection, clamped. */
export function trackWindow(doc: TrackingDoc, center: number): number[] {
  const n = doc.timesteps.length;
  const size = Math.min(5, n);
  let lo = center - 2;
  lo = Math.max(0, Math.min(lo, n - size));
  return Array.from({ length: size }, (_, k) => lo + k);
}

/** Probability color scale shared by the views (light blue to dark red). */
export function probabilityColor(p: number, pMax: number): string {
  const x = pMax > 0 ? Math.max(0, Math.min(1, p / pMax)) : 0;
  const r = Math.round(40 + 215 * x);
  const g = Math.round(90 * (1 - x));
  const b = Math.round(200 * (1 - x) + 30);
  return `rgb(${r},${g},${b})`;
}
