"""Property tests for the structural invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from topotrack.evaluation import jaccard
from topotrack.field import ScalarField, add_noise
from topotrack.mergetree import build_merge_tree, persistence_graph
from topotrack.network import MeasureNetwork, is_balanced
from topotrack.tracking import Trajectory
from topotrack.transport import SolverParams, solve_pfgw


@st.composite
def small_fields(draw):
    nx = draw(st.integers(3, 6))
    ny = draw(st.integers(3, 6))
    values = draw(
        st.lists(
            st.floats(-5, 5, allow_nan=False, width=32),
            min_size=nx * ny,
            max_size=nx * ny,
        )
    )
    return ScalarField((nx, ny), (0.0, 0.0), (1.0, 1.0), np.array(values, dtype=np.float64))


@st.composite
def probability_vectors(draw):
    n = draw(st.integers(1, 8))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    p = np.array(raw)
    return p / p.sum()


@given(small_fields(), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_noise_is_pure_and_bounded(field, iota, seed):
    a = add_noise(field, iota, seed)
    b = add_noise(field, iota, seed)
    assert np.array_equal(a.values, b.values)
    assert np.max(np.abs(a.values - field.values)) <= iota * field.value_range + 1e-12


@given(small_fields())
@settings(max_examples=30, deadline=None)
def test_persistence_graph_monotone(field):
    tree = build_merge_tree(field, "join")
    counts = [c for _, c in persistence_graph(tree, [0.0, 0.25, 0.5, 0.75, 1.0])]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[-1] == 2 or tree.n_nodes <= 2


@given(probability_vectors())
@settings(max_examples=60, deadline=None)
def test_is_balanced_matches_triple_definition(p):
    brute = all(
        p[u] * p[v] <= p[w] + 1e-15 for u in range(p.size) for v in range(p.size)
        for w in range(p.size)
    )
    fast = is_balanced(p)
    if fast:
        assert brute
    else:
        assert not all(
            p[u] * p[v] <= p[w] for u in range(p.size) for v in range(p.size)
            for w in range(p.size)
        )


@given(
    st.lists(st.tuples(st.integers(0, 5), st.integers(0, 9)), min_size=1, max_size=6,
             unique_by=lambda e: e[0]),
    st.lists(st.tuples(st.integers(0, 5), st.integers(0, 9)), min_size=1, max_size=6,
             unique_by=lambda e: e[0]),
)
@settings(max_examples=60, deadline=None)
def test_jaccard_range_and_identity(ea, eb):
    def mk(elements):
        elements = sorted(elements)
        return Trajectory(
            steps=[(t, 0) for t, _ in elements],
            extremum_kind="leaf",
            coords=[(0.0, 0.0)] * len(elements),
            f_values=[0.0] * len(elements),
            node_ids=[v for _, v in elements],
        )

    a, b = mk(ea), mk(eb)
    assert jaccard(a, a) == 1.0
    assert 0.0 <= jaccard(a, b) <= 1.0
    assert jaccard(a, b) == jaccard(b, a)


@given(
    st.integers(2, 6),
    st.integers(2, 6),
    st.sampled_from([0.5, 0.75, 1.0]),
    st.integers(0, 10_000),
)
@settings(max_examples=25, deadline=None)
def test_pfgw_coupling_always_feasible(n1, n2, m, seed):
    rng = np.random.default_rng(seed)
    nets = []
    for n in (n1, n2):
        p = rng.random(n) + 0.1
        p /= p.sum()
        W = rng.random((n, n))
        nets.append(MeasureNetwork(p=p, W=(W + W.T) / 2))
    rep = solve_pfgw(nets[0], nets[1], SolverParams(alpha=1.0, m=m))
    rep.coupling.validate(m=m)
    trace = np.asarray(rep.objective_trace)
    assert np.all(np.diff(trace) <= 1e-12)
