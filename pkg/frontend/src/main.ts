/**
 * App shell: loads graph.json (same-origin fetch, falling back to a file
 * picker), holds the immutable document plus a small view state, and fans
 * renders out to the three linked views.
 */

import { DataView } from "./dataView.js";
import { GraphView } from "./graphView.js";
import {
  DocumentError,
  TrackingDoc,
  ViewState,
  initialViewState,
  parseDocument,
  selectFeature,
  selectTimestep,
  setThreshold,
} from "./model.js";
import { TrackView } from "./trackView.js";

let doc: TrackingDoc | null = null;
let state: ViewState = initialViewState();

const banner = document.getElementById("banner") as HTMLDivElement;
const graphRoot = document.getElementById("graph-view") as HTMLDivElement;
const trackRoot = document.getElementById("track-view") as HTMLDivElement;
const dataRoot = document.getElementById("data-view") as HTMLDivElement;
const slider = document.getElementById("threshold") as HTMLInputElement;
const sliderLabel = document.getElementById("threshold-label") as HTMLSpanElement;
const filePicker = document.getElementById("file-picker") as HTMLInputElement;

function showError(message: string): void {
  banner.textContent = message;
  banner.style.display = "block";
}

function clearError(): void {
  banner.style.display = "none";
}

const graphView = new GraphView(graphRoot, {
  onSelectStep(step) {
    state = selectTimestep(state, state.selectedStep === step ? null : step);
    renderAll();
  },
  onSelectFeature(key) {
    state = selectFeature(state, key);
    renderAll();
  },
});

const trackView = new TrackView(trackRoot, (rotX, rotY, zoom) => {
  state = { ...state, camera: { rotX, rotY, zoom } };
  renderAll();
});

const dataView = new DataView(dataRoot);

function renderAll(): void {
  if (!doc) return;
  graphView.render(doc, state);
  trackView.render(doc, state);
  dataView.render(doc, state);
}

function setDocument(raw: unknown): void {
  try {
    doc = parseDocument(raw);
    clearError();
    const pMax = doc.edges.reduce((acc, e) => Math.max(acc, e.probability), 0);
    slider.max = String(pMax || 1);
    slider.step = String((pMax || 1) / 200);
    state = initialViewState();
    renderAll();
  } catch (err) {
    if (err instanceof DocumentError) {
      showError(`Could not load document: ${err.message}`);
    } else {
      showError("Could not load document");
      throw err;
    }
  }
}

slider.addEventListener("input", () => {
  state = setThreshold(state, Number(slider.value));
  sliderLabel.textContent = Number(slider.value).toFixed(4);
  renderAll();
});

filePicker.addEventListener("change", async () => {
  const file = filePicker.files?.[0];
  if (!file) return;
  try {
    setDocument(JSON.parse(await file.text()));
  } catch {
    showError("Selected file is not valid JSON");
  }
});

fetch("graph.json")
  .then(async (resp) => {
    if (!resp.ok) throw new Error(String(resp.status));
    setDocument(await resp.json());
  })
  .catch(() => {
    showError("No graph.json served here; pick a document file instead.");
  });
