"""Subsampling-robustness scoring: trajectory Jaccard overlap, S and S_W.

A trajectory is treated as the set of (time index, critical-point vertex id)
pairs; vertex ids are stable across runs that see the same simplified field
at shared timesteps, which makes them the natural element identity.
Length-1 (sub)trajectories are dropped before scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import ScalarField
from .tracking import Trajectory

__all__ = [
    "TrajectorySet",
    "trajectory_elements",
    "jaccard",
    "similarity",
    "restrict_and_subsample",
]


@dataclass
class TrajectorySet:
    trajectories: list[Trajectory]
    label: str = ""

    def __post_init__(self):
        self.trajectories = [t for t in self.trajectories if len(t) > 1]

    def __len__(self) -> int:
        return len(self.trajectories)


def trajectory_elements(traj: Trajectory) -> frozenset[tuple[int, int]]:
    """(time, vertex id) element set of a trajectory."""
    return frozenset((t, vid) for (t, _), vid in zip(traj.steps, traj.node_ids))


def jaccard(a: Trajectory, b: Trajectory) -> float:
    ea, eb = trajectory_elements(a), trajectory_elements(b)
    union = len(ea | eb)
    if union == 0:
        return 0.0
    return len(ea & eb) / union


def similarity(A: TrajectorySet, B: TrajectorySet) -> tuple[float, float]:
    """(S, S_W): mean and length-weighted mean of best-match Jaccard overlaps.

    Each trajectory in A is scored against its best match in B (ties break
    toward the smaller index in B); neither measure is symmetric in (A, B).
    """
    if len(A) == 0:
        return 0.0, 0.0
    total = 0.0
    weighted = 0.0
    length_sum = 0
    for a in A.trajectories:
        best = 0.0
        for b in B.trajectories:
            j = jaccard(a, b)
            if j > best:
                best = j
        total += best
        weighted += best * len(a)
        length_sum += len(a)
    s = total / len(A)
    s_w = weighted / length_sum if length_sum else 0.0
    return s, s_w


def restrict_and_subsample(
    trajectories: list[Trajectory],
    fields: list[ScalarField],
    stride: int,
) -> tuple[TrajectorySet, list[ScalarField]]:
    """Restrict full-run trajectories to every stride-th timestep.

    Returns the restricted set A (contiguous kept runs split into pieces,
    length-1 pieces dropped) and the strided field list used to recompute
    the comparison run B. Times in A stay in the original indexing.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    strided_fields = list(fields[::stride])
    kept_rank = {f.time_index: k for k, f in enumerate(strided_fields)}
    pieces: list[Trajectory] = []
    for tr in trajectories:
        kept = [
            (kept_rank[t], k) for k, (t, _) in enumerate(tr.steps) if t in kept_rank
        ]
        # adjacent kept timesteps stay in one piece; a missing kept step splits
        runs: list[list[int]] = []
        for rank, k in kept:
            if runs and rank == runs[-1][-1][0] + 1:
                runs[-1].append((rank, k))
            else:
                runs.append([(rank, k)])
        for run in runs:
            ks = [k for _, k in run]
            pieces.append(
                Trajectory(
                    steps=[tr.steps[k] for k in ks],
                    extremum_kind=tr.extremum_kind,
                    coords=[tr.coords[k] for k in ks],
                    f_values=[tr.f_values[k] for k in ks],
                    node_ids=[tr.node_ids[k] for k in ks],
                )
            )
    return TrajectorySet(pieces, label="original-restricted"), strided_fields
