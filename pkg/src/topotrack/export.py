"""Tracking-graph document export and a static viewer server.

The document carries, per timestep, a downsampled field image plus the
feature nodes, and one edge for every strictly positive coupling entry (not
only the bijective matches), with the raw coupling mass as the edge
probability. The UI consumes this precomputed document; nothing is computed
server-side.
"""

from __future__ import annotations

import http.server
import json
import signal
import socketserver
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .tracking import PipelineResult

__all__ = ["export_tracking_graph", "load_schema", "validate_document", "serve"]


class ExportError(ValueError):
    pass


def load_schema() -> dict:
    ref = resources.files("topotrack") / "schemas" / "tracking_graph.schema.json"
    return json.loads(ref.read_text())


def validate_document(doc: dict) -> None:
    jsonschema.validate(doc, load_schema())
    steps = {ts["t"]: len(ts["nodes"]) for ts in doc["timesteps"]}
    order = [ts["t"] for ts in doc["timesteps"]]
    for e in doc["edges"]:
        t = e["t"]
        pos = order.index(t)
        if pos + 1 >= len(order):
            raise ExportError(f"edge at t={t} has no successor timestep")
        t1 = order[pos + 1]
        if not 0 <= e["i"] < steps[t]:
            raise ExportError(f"edge source index {e['i']} out of range at t={t}")
        if not 0 <= e["j"] < steps[t1]:
            raise ExportError(f"edge target index {e['j']} out of range at t={t1}")


def _downsample(values: np.ndarray, dims: tuple[int, ...], limit: int = 128):
    """Stride-subsample the field so every axis has at most ``limit`` samples."""
    grid = values.reshape(dims)
    stride = max(int(np.ceil(max(dims) / limit)), 1)
    if stride > 1:
        grid = grid[tuple(slice(None, None, stride) for _ in dims)]
    return grid, stride


def export_tracking_graph(result: PipelineResult, path: str | Path | None = None) -> dict:
    """Build (and optionally write) the tracking-graph JSON document."""
    timesteps = []
    for k, fld in enumerate(result.fields):
        grid, stride = _downsample(fld.values, fld.dims)
        timesteps.append(
            {
                "t": int(result.times[k]),
                "field": {
                    "dims": list(grid.shape),
                    "origin": list(fld.origin),
                    "spacing": [s * stride for s in fld.spacing],
                    "values": [float(v) for v in grid.ravel()],
                    "downsample": int(stride),
                },
                "nodes": [
                    {
                        "id": int(row["id"]),
                        "coords": [float(c) for c in row["coords"]],
                        "f": float(row["f"]),
                        "kind": str(row["kind"]),
                    }
                    for row in result.nodes_by_t[k]
                ],
            }
        )

    edges = []
    for k, ms in enumerate(result.match_sets):
        C = ms.coupling
        p_row = result.networks[k].p
        row_mass = C.sum(axis=1)
        if np.any(row_mass > p_row + 1e-9):
            raise ExportError("coupling row mass exceeds the node measure")
        for i, j in zip(*np.nonzero(C > 0)):
            edges.append(
                {
                    "t": int(result.times[k]),
                    "i": int(i),
                    "j": int(j),
                    "probability": float(C[i, j]),
                }
            )

    trajectories = [
        [{"t": int(t), "node": int(idx)} for t, idx in tr.steps]
        for tr in result.trajectories
    ]
    cfg = result.config
    doc = {
        "timesteps": timesteps,
        "edges": edges,
        "trajectories": trajectories,
        "metadata": {
            "alpha": float(cfg.alpha),
            "epsilon": float(cfg.epsilon),
            "per_pair_m": [float(m) for m in result.per_pair_m],
            "strategies": {
                "edge": cfg.strategy.edge,
                "node": cfg.strategy.node,
                "attribute": cfg.strategy.attribute,
            },
            "direction": cfg.direction,
            "domain_diag": float(result.domain_diag),
        },
    }
    validate_document(doc)
    if path is not None:
        Path(path).write_text(json.dumps(doc))
    return doc


class _Handler(http.server.SimpleHTTPRequestHandler):
    doc_path: Path | None = None

    def do_GET(self):  # noqa: N802 (stdlib naming)
        if self.path.split("?", 1)[0] == "/graph.json" and self.doc_path is not None:
            data = self.doc_path.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(data)
            return
        super().do_GET()

    def log_message(self, *args):
        pass


def make_server(doc: str | Path, ui_dir: str | Path | None = None, port: int = 8080):
    """Threaded read-only HTTP server: /graph.json plus optional UI bundle."""
    doc = Path(doc)
    if not doc.exists():
        raise ExportError(f"missing document {doc}")
    directory = str(ui_dir) if ui_dir else str(doc.parent)

    class Handler(_Handler):
        pass

    Handler.doc_path = doc
    handler = lambda *a, **kw: Handler(*a, directory=directory, **kw)  # noqa: E731
    socketserver.TCPServer.allow_reuse_address = True
    return socketserver.ThreadingTCPServer(("", port), handler)


def serve(doc: str | Path, ui_dir: str | Path | None = None, port: int = 8080) -> None:
    """Serve the document (and UI bundle) until SIGINT/SIGTERM."""
    httpd = make_server(doc, ui_dir, port)

    def shutdown(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, shutdown)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
