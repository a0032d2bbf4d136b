"""Acceptance gate: each test implements one release criterion at its stated
tolerance and prints a PASS/FAIL line (run with ``pytest -s`` to stream them).
"""

import time

import numpy as np
import pytest

from conftest import make_network
from test_mergetree import minimax_values_oracle
from topotrack.evaluation import TrajectorySet, similarity
from topotrack.field import ScalarField
from topotrack.mergetree import build_merge_tree, simplify, vertex_merge_values
from topotrack.network import StrategyConfig, encode, is_balanced
from topotrack.stability import run_stability_experiment, tightness_example
from topotrack.synthetic import (
    appearance_sequence,
    disappearance_sequence,
    five_peak_field,
    peak_pair,
    ring_sequence,
)
from topotrack.tracking import (
    TrackingConfig,
    Trajectory,
    adaptive_m,
    match_features,
    run_pipeline,
)
from topotrack.transport import (
    SolverParams,
    gw_loss,
    gw_loss_fast,
    interpolation_check,
    solve_gw,
    solve_pfgw,
)
from topotrack.transport.lp import backend_name


def report(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" | {detail}"
    print(line)
    assert ok, line


def test_c1_coupling_feasibility_500_solves(rng):
    t0 = time.perf_counter()
    n_checked = 0
    worst_slack = 0.0
    for k in range(500):
        n1 = int(rng.integers(2, 21))
        n2 = int(rng.integers(2, 21))
        a = make_network(rng, n1)
        b = make_network(rng, n2)
        m = float(rng.choice([0.5, 0.6, 0.7, 0.8, 0.9, 1.0]))
        alpha = float(rng.choice([0.0, 0.1, 0.5, 0.9, 1.0]))
        rep = solve_pfgw(a, b, SolverParams(alpha=alpha, m=m))
        C = rep.coupling.C
        assert np.all(C >= 0.0)
        rs = rep.coupling.row_slack
        cs = rep.coupling.col_slack
        worst_slack = min(worst_slack, float(rs.min()), float(cs.min()))
        assert rs.min() >= -1e-9 and cs.min() >= -1e-9
        assert abs(C.sum() - m) <= 1e-9
        trace = np.asarray(rep.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)
        n_checked += 1
    elapsed = time.perf_counter() - t0
    report(
        "coupling feasibility: 500 random solves",
        n_checked == 500 and elapsed < 60.0,
        f"backend={backend_name()} elapsed={elapsed:.1f}s worst_slack={worst_slack:.2e}",
    )


def test_c2_oracle_equivalence(rng):
    from test_objectives import random_partial_coupling

    worst = 0.0
    for _ in range(100):
        n1 = int(rng.integers(1, 7))
        n2 = int(rng.integers(1, 7))
        W1 = rng.random((n1, n1))
        W1 = (W1 + W1.T) / 2
        W2 = rng.random((n2, n2))
        W2 = (W2 + W2.T) / 2
        C = random_partial_coupling(rng, n1, n2)
        gap = abs(gw_loss_fast(C, W1, W2) - gw_loss(C, W1, W2, 2.0))
        worst = max(worst, gap)
    ok_fast = worst <= 1e-10

    from topotrack.network import MeasureNetwork

    worst_fw = 0.0
    for _ in range(20):
        nets = []
        for _ in range(2):
            off = float(rng.uniform(0.1, 2.0))
            nets.append(
                MeasureNetwork(
                    p=np.array([0.5, 0.5]), W=np.array([[0.0, off], [off, 0.0]])
                )
            )
        rep = solve_gw(nets[0], nets[1], q=2, m=1.0)
        best = min(
            gw_loss_fast(np.array([[x, 0.5 - x], [0.5 - x, x]]), nets[0].W, nets[1].W)
            for x in np.linspace(0.0, 0.5, 10_000)
        )
        worst_fw = max(worst_fw, abs(rep.objective - best))
    ok_fw = worst_fw <= 1e-6
    report(
        "oracle equivalence: fast GW loss and 2x2 grid search",
        ok_fast and ok_fw,
        f"quartic gap={worst:.2e} grid gap={worst_fw:.2e}",
    )


def test_c3_interpolation_endpoints(rng):
    worst0 = worst1 = 0.0
    for _ in range(50):
        a = make_network(rng, 5)
        b = make_network(rng, 5)
        rep = interpolation_check(a, b, q=2, m=1.0, tol=1e-6)
        worst0 = max(worst0, rep.alpha0_gap)
        worst1 = max(worst1, rep.alpha1_gap)
    report(
        "fused objective endpoints on 50 random 5-node pairs",
        worst0 <= 1e-6 and worst1 <= 1e-6,
        f"alpha0 gap={worst0:.2e} alpha1 gap={worst1:.2e}",
    )


def test_c4_peak_pair_reproduction():
    from topotrack.mergetree import persistence_pairs

    fa, fb = peak_pair()
    cfg = StrategyConfig(edge="sp", node="uniform", attribute="coordinates")
    ta = build_merge_tree(fa, "split")
    tb = build_merge_tree(fb, "split")
    na, nb = encode(ta, cfg), encode(tb, cfg)
    rep = solve_pfgw(na, nb, SolverParams(alpha=0.1, m=0.8))
    C = rep.coupling.C
    row_mass = C.sum(axis=1)
    zero_rows = [i for i in range(10) if row_mass[i] <= 1e-9]
    # the dropped blob's extremum and the saddle it is persistence-paired with
    removed_leaf = max(
        (n for n in ta.nodes if n.kind == "leaf"),
        key=lambda n: min(
            sum((a - b) ** 2 for a, b in zip(n.coords, m.coords))
            for m in tb.nodes if m.kind == "leaf"
        ),
    )
    pair_saddle = next(
        p.saddle for p in persistence_pairs(ta) if p.extremum == removed_leaf.node_id
    )
    zero_ids = {na.node_meta[i]["id"] for i in zero_rows}
    ms = match_features(na, nb, alpha=0.1, m=0.8)
    ok = (
        len(zero_rows) == 2
        and zero_ids == {removed_leaf.node_id, pair_saddle}
        and len(ms.pairs) == 8
    )
    report(
        "ten-vs-eight peak fixture: m=0.8 zeroes the removed pair",
        ok,
        f"zero ids={sorted(zero_ids)} expected={sorted([removed_leaf.node_id, pair_saddle])} "
        f"pairs={len(ms.pairs)}",
    )


def test_c5_stability_suite():
    t0 = time.perf_counter()
    base = five_peak_field((16, 16))
    iotas = [i / 100 for i in range(1, 11)]
    rpt = run_stability_experiment(base, iotas=iotas, instances=20, seed=42, q=2.0)
    n = len(rpt.records)
    violations = 0
    for r in rpt.records:
        if not (r.lca_identity_half_loss <= r.tight_bound + 1e-9):
            violations += 1
        if not (r.tight_bound <= r.loose_bound + 1e-9):
            violations += 1
        if not (r.sp_identity_half_loss <= r.sp_bound + 1e-9):
            violations += 1
    elapsed = time.perf_counter() - t0
    report(
        "stability suite: 10 noise levels x 20 instances on 16x16",
        n == 200 and violations == 0 and elapsed < 300.0,
        f"records={n} violations={violations} elapsed={elapsed:.1f}s",
    )


def test_c6_tightness_proposition():
    out100 = tightness_example(100)
    out1000 = tightness_example(1000)
    ok = (
        abs(out100["constraint"] - 1.0) <= 1e-12
        and abs(out1000["constraint"] - 1.0) <= 1e-12
        and out100["balanced"]
        and out1000["balanced"]
        and abs(out100["ratio_over_size_sq"] - 0.25) <= 0.02 * 0.25
        and abs(out1000["ratio_over_size_sq"] - 0.25) <= 0.002 * 0.25
    )
    report(
        "tightness construction at n=100 and n=1000",
        ok,
        f"ratio/V^2: {out100['ratio_over_size_sq']:.5f}, {out1000['ratio_over_size_sq']:.6f}",
    )


def test_c7_minimax_oracle(rng):
    mismatches = 0
    for _ in range(20):
        values = rng.random(12 * 12)
        f = ScalarField((12, 12), (0.0, 0.0), (1.0, 1.0), values)
        W = vertex_merge_values(f, "join")
        O = minimax_values_oracle(f, "freudenthal2d")
        if not np.array_equal(W, O):
            mismatches += 1
    report(
        "merge values equal bottleneck-path oracle on 20 random 12x12 fields",
        mismatches == 0,
        f"mismatching fields={mismatches}",
    )


def test_c8_tracking_fixtures():
    cfg = TrackingConfig(
        epsilon=0.02, alpha=0.1, direction="split", m_policy="adaptive", l_star=0.05
    )
    dis = run_pipeline(disappearance_sequence(), cfg)
    app = run_pipeline(appearance_sequence(), cfg)
    lengths_ok = (
        sorted(len(t) for t in dis.trajectories) == [2, 2, 3, 3, 3, 3]
        and sorted(len(t) for t in app.trajectories) == [2, 2, 3, 3, 3, 3]
        and sorted(len(t) for t in dis.trajectories if t.extremum_kind == "leaf")
        == [2, 3, 3]
    )

    ring = run_pipeline(
        ring_sequence(4),
        TrackingConfig(epsilon=0.02, alpha=0.1, direction="split", m_policy="fixed", m=1.0),
    )
    C01 = ring.match_sets[0].coupling
    merge_gaps = []
    for j in range(C01.shape[1]):
        if ring.nodes_by_t[1][j]["kind"] != "leaf":
            continue
        entries = np.sort(C01[:, j][C01[:, j] > 1e-9])
        if entries.size == 2:
            merge_gaps.append(abs(entries[0] - entries[1]))
    merge_ok = bool(merge_gaps) and max(merge_gaps) <= 1e-6

    def traj(elements):
        return Trajectory(
            steps=[(t, 0) for t, _ in elements],
            extremum_kind="leaf",
            coords=[(0.0, 0.0)] * len(elements),
            f_values=[0.0] * len(elements),
            node_ids=[v for _, v in elements],
        )

    A = TrajectorySet([traj([(0, 1), (1, 1), (2, 1), (3, 1)]), traj([(0, 2), (1, 2)])])
    B = TrajectorySet([traj([(0, 1), (1, 1), (2, 1), (3, 1)]), traj([(1, 2), (2, 2)])])
    s, s_w = similarity(A, B)
    jaccard_ok = s == (1 + 1 / 3) / 2 and s_w == (1 * 4 + (1 / 3) * 2) / 6

    report(
        "tracking fixtures: event lengths, merge symmetry, overlap scores",
        lengths_ok and merge_ok and jaccard_ok,
        f"merge gap={max(merge_gaps) if merge_gaps else None} S={s:.6f} S_W={s_w:.6f}",
    )


def _sixty_node_networks(rng):
    cfg = StrategyConfig(edge="sp", node="uniform", attribute="coordinates")
    nets = []
    for seed in (1, 2):
        values = np.random.default_rng(seed).random(24 * 24)
        f = ScalarField((24, 24), (0.0, 0.0), (1.0, 1.0), values)
        tree = build_merge_tree(f, "split")
        eps = 0.0
        while tree.n_nodes > 60:
            eps += 0.02
            tree = simplify(tree, eps)
        nets.append(encode(tree, cfg))
    return nets


def test_c9_desk_scale_runtime(rng):
    na, nb = _sixty_node_networks(rng)
    params = SolverParams(alpha=0.1, m=0.9)
    solve_pfgw(na, nb, params)  # warm the caches
    times = []
    for _ in range(3):
        t0 = time.perf_counter()
        solve_pfgw(na, nb, params)
        times.append(time.perf_counter() - t0)
    match_ms = min(times) * 1e3

    grid = [round(0.5 + 0.01 * k, 2) for k in range(51)]
    t0 = time.perf_counter()
    # an unreachable budget forces the full 51-solve scan (worst case)
    with pytest.warns(RuntimeWarning):
        adaptive_m(na, nb, alpha=0.1, l_star=0.0, m_grid=grid)
    adaptive_s = time.perf_counter() - t0
    report(
        "desk-scale runtime: 60-node match and 51-point adaptive grid",
        match_ms <= 50.0 and adaptive_s <= 3.0,
        f"sizes=({na.n},{nb.n}) match={match_ms:.1f}ms adaptive={adaptive_s:.2f}s "
        f"backend={backend_name()}",
    )
