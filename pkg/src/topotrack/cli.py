"""Command-line interface.

Subcommands cover the whole pipeline: synthetic field generation, noise,
merge trees, network encoding, distances, tracking runs, subsampling
evaluation, perturbation-bound experiments, tracking-graph export, and a
static viewer server.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from . import evaluation, export as export_mod, stability as stability_mod
from .field import (
    GaussianSpec,
    ScalarField,
    add_noise as add_noise_op,
    gaussian_mixture,
    load_field,
    save_field,
)
from .mergetree import MergeTree, build_merge_tree, persistence_graph, simplify
from .network import MeasureNetwork, StrategyConfig, encode
from .tracking import TrackingConfig, run_pipeline, tune_curves
from .transport import SolverParams, solve_pfgw


def _parse_dims(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace("x", ",").split(","))


def _load_fields(directory: Path) -> list[ScalarField]:
    paths = sorted(directory.glob("*.raw"))
    if not paths:
        raise click.ClickException(f"no .raw fields in {directory}")
    fields = [load_field(p) for p in paths]
    fields.sort(key=lambda f: f.time_index)
    return fields


@click.group()
def main():
    """Topological feature tracking with partial optimal transport."""


@main.command()
@click.option("--specs", "specs_path", type=click.Path(exists=True), required=True,
              help="JSON list of {center, amplitude, sigma}.")
@click.option("--dims", required=True, help="Grid extents, e.g. 64,64 or 32x32x32.")
@click.option("--origin", default=None, help="Comma-separated origin (default zeros).")
@click.option("--spacing", default=None, help="Comma-separated spacing (default ones).")
@click.option("--time-index", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
def gen(specs_path, dims, origin, spacing, time_index, out):
    """Sample a Gaussian mixture onto a grid and write raw + sidecar."""
    raw = json.loads(Path(specs_path).read_text())
    specs = [
        GaussianSpec(tuple(s["center"]), float(s["amplitude"]), tuple(np.atleast_1d(s["sigma"])))
        for s in raw
    ]
    dims = _parse_dims(dims)
    origin_t = tuple(float(x) for x in origin.split(",")) if origin else None
    spacing_t = tuple(float(x) for x in spacing.split(",")) if spacing else None
    field = gaussian_mixture(specs, dims, origin_t, spacing_t, time_index)
    save_field(field, out)
    click.echo(f"wrote {out} (dims={dims}, range={field.value_range:.6g})")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--iota", type=float, required=True, help="Noise amplitude as a range fraction.")
@click.option("--seed", type=int, default=0)
@click.option("--out", required=True, type=click.Path())
def noise(in_path, iota, seed, out):
    """Add uniform noise scaled by the field range."""
    field = load_field(in_path)
    save_field(add_noise_op(field, iota, seed), out)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--direction", type=click.Choice(["join", "split"]), default="join")
@click.option("--connectivity", default=None)
@click.option("--eps", type=float, default=0.0, help="Persistence simplification fraction.")
@click.option("--persistence-curve", "curve_path", type=click.Path(), default=None,
              help="Also write an (epsilon, node count) CSV over a 0..1 grid.")
@click.option("--out", required=True, type=click.Path())
def tree(in_path, direction, connectivity, eps, curve_path, out):
    """Build (and optionally simplify) a merge tree; write JSON."""
    field = load_field(in_path)
    t = build_merge_tree(field, direction, connectivity)
    if curve_path:
        rows = persistence_graph(t, np.linspace(0.0, 1.0, 101))
        with open(curve_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "count"])
            w.writerows(rows)
    if eps > 0:
        t = simplify(t, eps)
    t.save(out)
    click.echo(f"wrote {out} ({t.n_nodes} nodes)")


@main.command(name="encode")
@click.option("--tree", "tree_path", type=click.Path(exists=True), required=True)
@click.option("--edge", type=click.Choice(["sp", "lca"]), default="sp")
@click.option("--node", type=click.Choice(["uniform", "parent"]), default="uniform")
@click.option("--attr", type=click.Choice(["coords", "none"]), default="coords")
@click.option("--out", required=True, type=click.Path())
def encode_cmd(tree_path, edge, node, attr, out):
    """Encode a merge tree as an attributed measure network."""
    t = MergeTree.load(tree_path)
    cfg = StrategyConfig(edge=edge, node=node,
                         attribute="coordinates" if attr == "coords" else "none")
    encode(t, cfg).save(out)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--a", "a_path", type=click.Path(exists=True), required=True)
@click.option("--b", "b_path", type=click.Path(exists=True), required=True)
@click.option("--alpha", type=float, default=0.1)
@click.option("--m", type=float, default=1.0)
@click.option("--q", type=float, default=2.0)
@click.option("--out", type=click.Path(), default=None, help="Write the coupling JSON here.")
def dist(a_path, b_path, alpha, m, q, out):
    """Partial fused distance between two networks."""
    net_a = MeasureNetwork.load(a_path)
    net_b = MeasureNetwork.load(b_path)
    rep = solve_pfgw(net_a, net_b, SolverParams(alpha=alpha, m=m, q=q))
    click.echo(
        f"objective={rep.objective:.10g} iterations={rep.iterations} converged={rep.converged}"
    )
    if out:
        doc = {
            "C": rep.coupling.C.tolist(),
            "m": rep.coupling.m,
            "objective": rep.objective,
            "iterations": rep.iterations,
            "converged": rep.converged,
        }
        Path(out).write_text(json.dumps(doc))
        click.echo(f"wrote {out}")


def _tracking_config(eps, alpha, direction, edge, node, m_policy, m, lstar) -> TrackingConfig:
    strategy = StrategyConfig(edge=edge, node=node, attribute="coordinates")
    return TrackingConfig(
        epsilon=eps,
        strategy=strategy,
        alpha=alpha,
        direction=direction,
        m_policy=m_policy,
        m=m,
        l_star=lstar,
    )


@main.command()
@click.option("--fields", "fields_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--eps", type=float, default=0.0)
@click.option("--alpha", type=float, default=0.1)
@click.option("--direction", type=click.Choice(["join", "split"]), default="split")
@click.option("--edge", type=click.Choice(["sp", "lca"]), default="sp")
@click.option("--node", type=click.Choice(["uniform", "parent"]), default="uniform")
@click.option("--m-policy", type=click.Choice(["fixed", "adaptive"]), default="fixed")
@click.option("--m", type=float, default=1.0)
@click.option("--lstar", type=float, default=None)
@click.option("--tune/--no-tune", default=False, help="Also write tuning curves.csv.")
@click.option("--alpha-grid", default=None,
              help="Comma list for --tune (default 0.0..1.0 step 0.1).")
@click.option("--m-grid", default=None,
              help="Comma list for --tune (default 0.50..1.00 step 0.01).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def track(fields_dir, eps, alpha, direction, edge, node, m_policy, m, lstar, tune,
          alpha_grid, m_grid, out_dir):
    """Run the tracking pipeline over a directory of fields."""
    fields = _load_fields(Path(fields_dir))
    cfg = _tracking_config(eps, alpha, direction, edge, node, m_policy, m, lstar)
    result = run_pipeline(fields, cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "trajectories.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        ndim = len(result.fields[0].dims)
        w.writerow(["traj_id", "t", "x", "y", "z"][: 2 + ndim] + ["f"])
        for tid, tr in enumerate(result.trajectories):
            for (t, _), coords, f in zip(tr.steps, tr.coords, tr.f_values):
                w.writerow([tid, t, *[f"{c:.9g}" for c in coords], f"{f:.9g}"])

    n, l = result.metrics()
    (out / "metrics.json").write_text(
        json.dumps({"N": n, "L": l, "per_pair_m": result.per_pair_m})
    )
    export_mod.export_tracking_graph(result, out / "graph.json")

    if tune:
        ag = [float(x) for x in alpha_grid.split(",")] if alpha_grid else None
        mg = [float(x) for x in m_grid.split(",")] if m_grid else None
        curves = tune_curves(fields, cfg, alpha_grid=ag, m_grid=mg)
        with open(out / "curves.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "m", "N", "L"])
            w.writerows(curves["rows"])
        elbow_rows = [
            {"alpha": a, "m": mm, "L_star": ls, "ok": ok}
            for a, (mm, ls, ok) in sorted(curves["elbows"].items())
        ]
        (out / "elbows.json").write_text(json.dumps(elbow_rows, indent=2))
    click.echo(f"tracked {len(fields)} steps: N={n}, L={l:.6g}; results in {out}")


@main.command(name="eval")
@click.option("--original", "orig_dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="Directory with the full-resolution fields.")
@click.option("--stride", type=int, required=True)
@click.option("--eps", type=float, default=0.0)
@click.option("--alpha", type=float, default=0.1)
@click.option("--direction", type=click.Choice(["join", "split"]), default="split")
@click.option("--m", type=float, default=1.0)
@click.option("--out", "out_path", type=click.Path(), required=True)
def eval_cmd(orig_dir, stride, eps, alpha, direction, m, out_path):
    """Subsampling robustness: S and S_W between full and strided runs."""
    fields = _load_fields(Path(orig_dir))
    cfg = _tracking_config(eps, alpha, direction, "sp", "uniform", "fixed", m, None)
    full = run_pipeline(fields, cfg)
    A, strided = evaluation.restrict_and_subsample(full.trajectories, fields, stride)
    sub = run_pipeline(strided, cfg)
    B = evaluation.TrajectorySet(sub.trajectories, label="subsampled")
    s_ab, sw_ab = evaluation.similarity(A, B)
    s_ba, sw_ba = evaluation.similarity(B, A)
    doc = {"S_AB": s_ab, "S_BA": s_ba, "SW_AB": sw_ab, "SW_BA": sw_ba}
    Path(out_path).write_text(json.dumps(doc, indent=2))
    click.echo(json.dumps(doc))


@main.command()
@click.option("--grid", default="16x16")
@click.option("--iotas", default="0.01..0.10", help="Range start..stop (step 0.01).")
@click.option("--instances", type=int, default=20)
@click.option("--seed", type=int, default=42)
@click.option("--gw/--no-gw", default=False, help="Also compute the FW upper bound (slow).")
@click.option("--base", "base_path", type=click.Path(exists=True), default=None,
              help="Optional raw field to perturb (default: built-in mixture).")
@click.option("--out", "out_path", type=click.Path(), required=True)
def stability(grid, iotas, instances, seed, gw, base_path, out_path):
    """Perturbation-bound experiment; writes per-record CSV."""
    dims = _parse_dims(grid)
    if base_path:
        base = load_field(base_path)
    else:
        from .synthetic import five_peak_field

        base = five_peak_field(dims)
    lo, hi = (float(x) for x in iotas.split(".."))
    steps = int(round((hi - lo) / 0.01)) + 1
    iota_set = [round(lo + 0.01 * k, 4) for k in range(steps)]
    report = stability_mod.run_stability_experiment(
        base, iota_set, instances, seed, compute_gw=gw
    )
    report.to_csv(out_path)
    ok = all(
        r.lca_identity_half_loss <= r.loose_bound + 1e-9
        and (r.tight_bound is None or r.lca_identity_half_loss <= r.tight_bound + 1e-9)
        and r.sp_identity_half_loss <= r.sp_bound + 1e-9
        for r in report.records
    )
    click.echo(f"wrote {out_path} ({len(report.records)} records, bounds hold: {ok})")


@main.command(name="export")
@click.option("--run", "run_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def export_cmd(run_dir, out_path):
    """Copy/validate a run's tracking graph document."""
    src = Path(run_dir) / "graph.json"
    if not src.exists():
        raise click.ClickException(f"{src} not found (run `topotrack track` first)")
    doc = json.loads(src.read_text())
    export_mod.validate_document(doc)
    Path(out_path).write_text(json.dumps(doc))
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--doc", "doc_path", type=click.Path(exists=True), required=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None)
@click.option("--port", type=int, default=8080)
def serve(doc_path, ui_dir, port):
    """Serve the viewer bundle and graph.json (read-only)."""
    click.echo(f"serving {doc_path} on http://localhost:{port} (Ctrl-C to stop)")
    export_mod.serve(doc_path, ui_dir, port)


if __name__ == "__main__":
    main()
