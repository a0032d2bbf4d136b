#!/usr/bin/env python3
"""Regenerate ring_graph.json from the topotrack pipeline.

Usage: python regenerate.py   (requires the topotrack package installed)
"""

from pathlib import Path

from topotrack.export import export_tracking_graph
from topotrack.synthetic import ring_sequence
from topotrack.tracking import TrackingConfig, run_pipeline

cfg = TrackingConfig(
    epsilon=0.02, alpha=0.1, direction="split", m_policy="fixed", m=1.0
)
result = run_pipeline(ring_sequence(4), cfg)
out = Path(__file__).parent / "ring_graph.json"
export_tracking_graph(result, out)
print(f"wrote {out}")
