"""Feature tracking across time: detection, partial matching, trajectories.

Each timestep's field becomes a simplified merge tree and then a measure
network; adjacent networks are coupled by the partial fused transport solve;
a coupled pair is kept only when the two nodes are mutually most probable
partners; trajectories chain kept pairs through time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import ScalarField, domain_diagonal
from .mergetree import MergeTree, build_merge_tree, default_connectivity, simplify
from .network import MeasureNetwork, StrategyConfig, encode
from .transport import SolverParams, solve_pfgw

__all__ = [
    "MatchSet",
    "Trajectory",
    "TrackingConfig",
    "PipelineResult",
    "match_features",
    "extract_trajectories",
    "quality_metrics",
    "adaptive_m",
    "tune_curves",
    "elbow_index",
    "run_pipeline",
]

# coupling entries at or below this are treated as numerically zero
ZERO_MASS = 1e-12


class TrackingError(ValueError):
    pass


@dataclass
class MatchSet:
    t: int
    pairs: list[tuple[int, int, float]]  # (index in net_t, index in net_t1, probability)
    unmatched_t: list[int]
    unmatched_t1: list[int]
    coupling: np.ndarray
    m: float
    converged: bool = True

    def __post_init__(self):
        left = [i for i, _, _ in self.pairs]
        right = [j for _, j, _ in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise TrackingError("matched pairs must form a partial bijection")
        if any(prob <= 0 for _, _, prob in self.pairs):
            raise TrackingError("matched pairs must have positive probability")


@dataclass
class Trajectory:
    steps: list[tuple[int, int]]  # (time_index, node_index at that time)
    extremum_kind: str
    coords: list[tuple[float, ...]] = dc_field(default_factory=list)
    f_values: list[float] = dc_field(default_factory=list)
    node_ids: list[int] = dc_field(default_factory=list)

    def __post_init__(self):
        if not self.steps:
            raise TrackingError("trajectory must have length >= 1")
        times = [t for t, _ in self.steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TrackingError("trajectory time indices must be increasing")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def times(self) -> list[int]:
        return [t for t, _ in self.steps]


@dataclass
class TrackingConfig:
    epsilon: float = 0.0
    strategy: StrategyConfig = dc_field(default_factory=StrategyConfig)
    alpha: float = 0.1
    q: float = 2.0
    direction: str = "split"
    connectivity: str | None = None
    m_policy: str = "fixed"  # fixed | adaptive
    m: float = 1.0
    l_star: float | None = None
    m_grid: tuple[float, ...] = tuple(np.round(np.arange(0.50, 1.0 + 1e-9, 0.01), 2))
    alpha_grid: tuple[float, ...] = tuple(np.round(np.arange(0.0, 1.0 + 1e-9, 0.1), 1))
    max_iters: int = 1000
    rel_tol: float = 1e-9

    def __post_init__(self):
        if self.m_policy not in ("fixed", "adaptive"):
            raise TrackingError(f"m_policy must be 'fixed' or 'adaptive', got {self.m_policy!r}")
        if self.m_policy == "adaptive" and self.l_star is None:
            raise TrackingError("adaptive m policy requires l_star")
        if any(not 0.0 < g <= 1.0 for g in self.m_grid):
            raise TrackingError("m_grid values must lie in (0, 1]")
        if any(not 0.0 <= g <= 1.0 for g in self.alpha_grid):
            raise TrackingError("alpha_grid values must lie in [0, 1]")


def match_features(
    net_t: MeasureNetwork,
    net_t1: MeasureNetwork,
    alpha: float,
    m: float,
    q: float = 2.0,
    t: int = 0,
    solver_kwargs: dict | None = None,
    C0: np.ndarray | None = None,
) -> MatchSet:
    """Couple two adjacent networks and keep mutually most probable pairs.

    Rows/columns whose coupling mass is numerically zero were absorbed by
    the dummy node and are reported unmatched. Argmax ties break toward the
    smaller index.
    """
    params = SolverParams(alpha=alpha, m=m, q=q, **(solver_kwargs or {}))
    report = solve_pfgw(net_t, net_t1, params, C0=C0)
    C = report.coupling.C.copy()
    C[C <= ZERO_MASS] = 0.0
    n1, n2 = C.shape

    row_best = C.argmax(axis=1)  # ties -> smaller column index
    col_best = C.argmax(axis=0)  # ties -> smaller row index
    pairs = []
    matched_rows = set()
    matched_cols = set()
    for i in range(n1):
        j = int(row_best[i])
        if C[i, j] <= 0.0:
            continue
        if int(col_best[j]) == i:
            pairs.append((i, j, float(C[i, j])))
            matched_rows.add(i)
            matched_cols.add(j)
    unmatched_t = [i for i in range(n1) if i not in matched_rows]
    unmatched_t1 = [j for j in range(n2) if j not in matched_cols]
    return MatchSet(
        t=t,
        pairs=pairs,
        unmatched_t=unmatched_t,
        unmatched_t1=unmatched_t1,
        coupling=report.coupling.C,
        m=m,
        converged=report.converged,
    )


def extract_trajectories(
    match_sets: list[MatchSet],
    nodes_by_t: list[list[dict]],
    times: list[int] | None = None,
) -> list[Trajectory]:
    """Chain matched nodes into trajectories.

    ``nodes_by_t[k]`` describes the nodes of the k-th processed step (dicts
    with id/coords/f/kind); ``times`` gives the time index recorded for each
    step (defaults to 0..len-1). A node unmatched on the left terminates its
    trajectory; one unmatched on the right starts a new one.
    """
    n_steps = len(nodes_by_t)
    if times is None:
        times = list(range(n_steps))
    if len(match_sets) != max(n_steps - 1, 0):
        raise TrackingError(
            f"need {n_steps - 1} match sets for {n_steps} steps, got {len(match_sets)}"
        )

    successor: list[dict[int, int]] = [{i: j for i, j, _ in ms.pairs} for ms in match_sets]

    consumed = [set() for _ in range(n_steps)]
    trajectories: list[Trajectory] = []
    for k in range(n_steps):
        for idx in range(len(nodes_by_t[k])):
            if idx in consumed[k]:
                continue
            # walk forward while matched
            chain = [(k, idx)]
            consumed[k].add(idx)
            cur_k, cur_idx = k, idx
            while cur_k < n_steps - 1 and cur_idx in successor[cur_k]:
                nxt = successor[cur_k][cur_idx]
                cur_k += 1
                cur_idx = nxt
                chain.append((cur_k, cur_idx))
                consumed[cur_k].add(cur_idx)
            first = nodes_by_t[k][idx]
            trajectories.append(
                Trajectory(
                    steps=[(times[kk], ii) for kk, ii in chain],
                    extremum_kind=first.get("kind", "leaf"),
                    coords=[tuple(nodes_by_t[kk][ii]["coords"]) for kk, ii in chain],
                    f_values=[float(nodes_by_t[kk][ii]["f"]) for kk, ii in chain],
                    node_ids=[int(nodes_by_t[kk][ii]["id"]) for kk, ii in chain],
                )
            )
    return trajectories


def quality_metrics(
    trajectories: list[Trajectory],
    extremum_kind: str | None = "leaf",
    domain_diag: float = 1.0,
) -> tuple[int, float]:
    """(N, L): trajectory count and max matched displacement.

    Both are computed over trajectories of the requested kind only; L is the
    largest Euclidean step between consecutive matched coordinates divided
    by ``domain_diag``.
    """
    kept = [
        tr for tr in trajectories if extremum_kind is None or tr.extremum_kind == extremum_kind
    ]
    n = len(kept)
    l_max = 0.0
    for tr in kept:
        for a, b in zip(tr.coords, tr.coords[1:]):
            d = float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / domain_diag
            l_max = max(l_max, d)
    return n, l_max


def _pair_max_distance(ms: MatchSet, net_t: MeasureNetwork, net_t1: MeasureNetwork) -> float:
    """Max normalized displacement over matched pairs (attrs are normalized)."""
    if net_t.attrs is None or net_t1.attrs is None:
        raise TrackingError("adaptive m needs coordinate attributes")
    worst = 0.0
    for i, j, _ in ms.pairs:
        worst = max(worst, float(np.linalg.norm(net_t.attrs[i] - net_t1.attrs[j])))
    return worst


def adaptive_m(
    net_t: MeasureNetwork,
    net_t1: MeasureNetwork,
    alpha: float,
    l_star: float,
    m_grid,
    q: float = 2.0,
    solver_kwargs: dict | None = None,
) -> float:
    """Largest m in the grid whose matching stays within the distance budget.

    Scans the grid in descending order and returns the first m whose maximum
    matched displacement is <= l_star; if none qualifies, warns and returns
    the smallest grid value.
    """
    grid = sorted(
        {1.0 if 1.0 < float(g) <= 1.0 + 1e-9 else float(g) for g in m_grid}, reverse=True
    )
    if not grid:
        raise TrackingError("empty m grid")
    for m in grid:
        ms = match_features(net_t, net_t1, alpha, m, q, solver_kwargs=solver_kwargs)
        if _pair_max_distance(ms, net_t, net_t1) <= l_star:
            return m
    warnings.warn(
        f"no m in the grid keeps the matched distance within {l_star}; using {grid[-1]}",
        RuntimeWarning,
        stacklevel=2,
    )
    return grid[-1]


def elbow_index(xs, ys) -> tuple[int, bool]:
    """Index of the elbow of a curve: max perpendicular distance to the chord.

    Returns (index, ok). A degenerate chord (flat curve) gives ok=False and
    the index of the last point.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size or xs.size < 2:
        raise TrackingError("elbow needs at least two points")
    x0, y0 = xs[0], ys[0]
    x1, y1 = xs[-1], ys[-1]
    chord = np.hypot(x1 - x0, y1 - y0)
    if chord < 1e-15 or np.ptp(ys) <= 1e-15:
        # flat curve: no corner exists, fall back to the last grid point
        return int(xs.size - 1), False
    d = np.abs((y1 - y0) * xs - (x1 - x0) * ys + x1 * y0 - y1 * x0) / chord
    return int(np.argmax(d)), True


@dataclass
class PipelineResult:
    trees: list[MergeTree]
    networks: list[MeasureNetwork]
    match_sets: list[MatchSet]
    trajectories: list[Trajectory]
    per_pair_m: list[float]
    times: list[int]
    nodes_by_t: list[list[dict]]
    fields: list[ScalarField]
    config: TrackingConfig
    domain_diag: float

    def metrics(self, extremum_kind: str | None = "leaf") -> tuple[int, float]:
        return quality_metrics(self.trajectories, extremum_kind, self.domain_diag)


def _detect(field: ScalarField, cfg: TrackingConfig) -> tuple[MergeTree, MeasureNetwork]:
    connectivity = cfg.connectivity or default_connectivity(field.ndim)
    tree = build_merge_tree(field, cfg.direction, connectivity)
    if cfg.epsilon > 0:
        tree = simplify(tree, cfg.epsilon)
    return tree, encode(tree, cfg.strategy)


def run_pipeline(fields: list[ScalarField], cfg: TrackingConfig) -> PipelineResult:
    """Detection -> matching -> extraction over an ordered field sequence."""
    if not fields:
        raise TrackingError("need at least one field")
    trees = []
    networks = []
    for f in fields:
        tree, net = _detect(f, cfg)
        trees.append(tree)
        networks.append(net)

    nodes_by_t = [
        [dict(meta) for meta in (net.node_meta or [])] for net in networks
    ]
    for k, tree in enumerate(trees):
        for row in nodes_by_t[k]:
            row["coords"] = tree.node(row["id"]).coords

    solver_kwargs = {"max_iters": cfg.max_iters, "rel_tol": cfg.rel_tol}
    match_sets = []
    per_pair_m = []
    for k in range(len(fields) - 1):
        if cfg.m_policy == "adaptive":
            m = adaptive_m(
                networks[k], networks[k + 1], cfg.alpha, cfg.l_star, cfg.m_grid,
                cfg.q, solver_kwargs,
            )
        else:
            m = cfg.m
        ms = match_features(
            networks[k], networks[k + 1], cfg.alpha, m, cfg.q, t=k,
            solver_kwargs=solver_kwargs,
        )
        match_sets.append(ms)
        per_pair_m.append(m)

    times = [f.time_index for f in fields]
    if len(set(times)) != len(times):
        times = list(range(len(fields)))
    trajectories = extract_trajectories(match_sets, nodes_by_t, times)
    return PipelineResult(
        trees=trees,
        networks=networks,
        match_sets=match_sets,
        trajectories=trajectories,
        per_pair_m=per_pair_m,
        times=times,
        nodes_by_t=nodes_by_t,
        fields=fields,
        config=cfg,
        domain_diag=domain_diagonal(fields[0]),
    )


def tune_curves(
    fields: list[ScalarField],
    cfg: TrackingConfig,
    alpha_grid=None,
    m_grid=None,
) -> dict:
    """Grid search over (alpha, m): N/L tables plus a per-alpha elbow budget.

    Returns {"rows": [(alpha, m, N, L)], "elbows": {alpha: (m*, L*, ok)}}.
    """
    alpha_grid = list(alpha_grid if alpha_grid is not None else cfg.alpha_grid)
    m_grid = list(m_grid if m_grid is not None else cfg.m_grid)
    rows = []
    elbows = {}
    for alpha in alpha_grid:
        ls = []
        for m in m_grid:
            sub = TrackingConfig(
                epsilon=cfg.epsilon,
                strategy=cfg.strategy,
                alpha=alpha,
                q=cfg.q,
                direction=cfg.direction,
                connectivity=cfg.connectivity,
                m_policy="fixed",
                m=m,
                max_iters=cfg.max_iters,
                rel_tol=cfg.rel_tol,
            )
            result = run_pipeline(fields, sub)
            n, l = result.metrics()
            rows.append((float(alpha), float(m), int(n), float(l)))
            ls.append(l)
        idx, ok = elbow_index(m_grid, ls)
        elbows[float(alpha)] = (float(m_grid[idx]), float(ls[idx]), ok)
    return {"rows": rows, "elbows": elbows}
