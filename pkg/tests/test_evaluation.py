import numpy as np
import pytest

from topotrack.evaluation import (
    TrajectorySet,
    jaccard,
    restrict_and_subsample,
    similarity,
    trajectory_elements,
)
from topotrack.field import ScalarField
from topotrack.tracking import Trajectory


def traj(elements, kind="leaf"):
    """elements: list of (t, vertex_id)."""
    return Trajectory(
        steps=[(t, 0) for t, _ in elements],
        extremum_kind=kind,
        coords=[(0.0, 0.0)] * len(elements),
        f_values=[0.0] * len(elements),
        node_ids=[vid for _, vid in elements],
    )


def test_jaccard_identical_and_disjoint():
    a = traj([(0, 5), (1, 6)])
    b = traj([(0, 5), (1, 6)])
    assert jaccard(a, b) == 1.0
    c = traj([(2, 7), (3, 8)])
    assert jaccard(a, c) == 0.0


def test_jaccard_partial_overlap():
    a = traj([(0, 10), (1, 11)])
    b = traj([(1, 11), (2, 12)])
    assert jaccard(a, b) == pytest.approx(1 / 3)


def test_similarity_identical_sets():
    A = TrajectorySet([traj([(0, 1), (1, 2)]), traj([(0, 3), (1, 4), (2, 5)])])
    assert similarity(A, A) == (1.0, 1.0)


def test_similarity_disjoint_sets():
    A = TrajectorySet([traj([(0, 1), (1, 2)])])
    B = TrajectorySet([traj([(5, 9), (6, 9)])])
    assert similarity(A, B) == (0.0, 0.0)


def test_similarity_hand_fixture():
    # J values {1, 1/3} with lengths {4, 2}: S = 2/3 and S_W = 7/9
    a1 = traj([(0, 1), (1, 1), (2, 1), (3, 1)])
    a2 = traj([(0, 2), (1, 2)])
    b1 = traj([(0, 1), (1, 1), (2, 1), (3, 1)])
    b2 = traj([(1, 2), (2, 2)])  # shares only (1, 2) with a2: J = 1/3
    s, s_w = similarity(TrajectorySet([a1, a2]), TrajectorySet([b1, b2]))
    assert s == (1 + 1 / 3) / 2
    assert s_w == (1 * 4 + (1 / 3) * 2) / 6
    assert s == pytest.approx(2 / 3, abs=1e-12)
    assert s_w == pytest.approx(7 / 9, abs=1e-12)


def test_similarity_not_symmetric():
    # B's long trajectory covers both of A's short ones
    a1 = traj([(0, 1), (1, 1)])
    a2 = traj([(2, 1), (3, 1)])
    b = traj([(0, 1), (1, 1), (2, 1), (3, 1)])
    A = TrajectorySet([a1, a2])
    B = TrajectorySet([b])
    s_ab, _ = similarity(A, B)
    s_ba, _ = similarity(B, A)
    assert s_ab == pytest.approx(0.5)
    assert s_ba == pytest.approx(0.5)
    a3 = traj([(0, 1), (1, 1), (2, 9)])
    A2 = TrajectorySet([a3])
    B2 = TrajectorySet([b, traj([(2, 9), (3, 9)])])
    assert similarity(A2, B2) != similarity(B2, A2)


def test_sw_equals_s_for_equal_lengths():
    a1 = traj([(0, 1), (1, 1)])
    a2 = traj([(0, 2), (1, 2)])
    b1 = traj([(0, 1), (1, 1)])
    b2 = traj([(1, 2), (2, 2)])
    s, s_w = similarity(TrajectorySet([a1, a2]), TrajectorySet([b1, b2]))
    assert s == pytest.approx(s_w)


def test_length_one_dropped():
    A = TrajectorySet([traj([(0, 1)]), traj([(0, 2), (1, 2)])])
    assert len(A) == 1


def fields_with_times(times):
    out = []
    for t in times:
        out.append(
            ScalarField((2, 2), (0.0, 0.0), (1.0, 1.0), np.arange(4.0), time_index=t)
        )
    return out


def test_restrict_stride_one():
    fields = fields_with_times(range(4))
    trajs = [traj([(0, 1), (1, 1), (2, 1)]), traj([(3, 2)])]
    A, strided = restrict_and_subsample(trajs, fields, 1)
    assert len(strided) == 4
    assert len(A) == 1  # the length-1 trajectory is dropped
    assert trajectory_elements(A.trajectories[0]) == {(0, 1), (1, 1), (2, 1)}


def test_restrict_large_stride_empty():
    fields = fields_with_times(range(4))
    trajs = [traj([(1, 1), (2, 1)])]
    A, strided = restrict_and_subsample(trajs, fields, 4)
    assert len(A) == 0
    assert [f.time_index for f in strided] == [0]


def test_restrict_length_six_stride_two():
    fields = fields_with_times(range(6))
    tr = traj([(t, 7) for t in range(6)])
    A, strided = restrict_and_subsample([tr], fields, 2)
    assert [f.time_index for f in strided] == [0, 2, 4]
    assert len(A) == 1
    assert trajectory_elements(A.trajectories[0]) == {(0, 7), (2, 7), (4, 7)}


def test_restrict_splits_on_missing_kept_step():
    fields = fields_with_times(range(7))
    # kept steps are {0, 2, 4, 6}; the trajectory misses step 4 entirely, so
    # its restriction splits there and the length-1 tail is dropped
    tr = traj([(0, 1), (1, 1), (2, 1), (3, 1), (5, 1), (6, 1)])
    A, _ = restrict_and_subsample([tr], fields, 2)
    assert len(A) == 1
    assert trajectory_elements(A.trajectories[0]) == {(0, 1), (2, 1)}


def test_restrict_keeps_piece_across_skipped_steps():
    fields = fields_with_times(range(7))
    tr = traj([(t, 3) for t in range(7)])
    A, _ = restrict_and_subsample([tr], fields, 3)
    assert len(A) == 1
    assert trajectory_elements(A.trajectories[0]) == {(0, 3), (3, 3), (6, 3)}


def test_stride_validation():
    with pytest.raises(ValueError):
        restrict_and_subsample([], [], 0)
