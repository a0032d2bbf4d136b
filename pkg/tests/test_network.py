import math

import numpy as np
import pytest

from conftest import make_tree, random_field
from topotrack.mergetree import build_merge_tree
from topotrack.network import (
    MeasureNetwork,
    NetworkError,
    StrategyConfig,
    encode,
    is_balanced,
    pairwise_weighted_norm,
    weighted_norm,
)


def three_node_tree():
    # leaves at f=1 and f=2 joined directly at the root f=5
    return make_tree(
        [(0, 1.0, "leaf"), (1, 2.0, "leaf"), (2, 5.0, "root")],
        {0: 2, 1: 2},
        field_range=4.0,
    )


def test_sp_path_sum():
    net = encode(three_node_tree(), StrategyConfig(edge="sp", attribute="none"))
    assert net.W[0, 1] == pytest.approx(7.0)  # |1-5| + |2-5|
    assert net.W[0, 0] == 0.0


def test_lca_matrix_and_diagonal():
    net = encode(three_node_tree(), StrategyConfig(edge="lca", attribute="none"))
    assert net.W[0, 1] == pytest.approx(5.0)
    assert np.allclose(np.diag(net.W), [1.0, 2.0, 5.0])


def test_parent_strategy_root_mass():
    net = encode(three_node_tree(), StrategyConfig(node="parent", attribute="none"))
    assert np.allclose(net.p, [4 / 11, 3 / 11, 4 / 11])


def test_parent_strategy_degenerate():
    t = make_tree(
        [(0, 1.0, "leaf"), (1, 1.0, "root")], {0: 1}, field_range=0.0
    )
    with pytest.raises(NetworkError, match="degenerate|positive"):
        encode(t, StrategyConfig(node="parent", attribute="none"))


def test_uniform_p():
    net = encode(three_node_tree(), StrategyConfig(attribute="none"))
    assert np.allclose(net.p, 1.0 / 3.0)


def test_attrs_normalized_by_diagonal():
    t = make_tree(
        [(0, 1.0, "leaf", (3.0, 4.0)), (1, 5.0, "root", (0.0, 0.0))],
        {0: 1},
        domain_diag=5.0,
    )
    net = encode(t, StrategyConfig(attribute="coordinates"))
    assert np.allclose(net.attrs[0], [0.6, 0.8])


def test_is_balanced():
    assert is_balanced(np.full(7, 1 / 7))
    assert not is_balanced(np.array([0.9, 0.1]))
    n = 10
    p0 = -n + math.sqrt(n * n + 2)
    p1 = 2 * p0 * p0
    p = np.full(2 * n + 1, p0)
    p[n] = p1
    assert is_balanced(p)
    assert p1 * p1 <= p0


def test_weighted_norm():
    assert weighted_norm([1.0, 2.0], [1.0, 2.0], [0.5, 0.5]) == 0.0
    p = np.array([0.2, 0.3, 0.5])
    assert weighted_norm([1, 1, 1], [0, 0, 0], p, q=2) == pytest.approx(1.0)
    assert weighted_norm([3.0, 0.0], [0.0, 0.0], [0.5, 0.5], q=2) == pytest.approx(
        3 / math.sqrt(2)
    )
    with pytest.raises(NetworkError):
        weighted_norm([1.0], [1.0, 2.0], [1.0])
    with pytest.raises(NetworkError):
        weighted_norm([1.0], [1.0], [1.0], q=0.5)


def test_sp_is_tree_metric(rng):
    f = random_field(rng, (8, 8))
    tree = build_merge_tree(f, "join")
    net = encode(tree, StrategyConfig(edge="sp", attribute="none"))
    D = net.W
    n = net.n
    assert np.allclose(D, D.T, atol=0)
    assert np.allclose(np.diag(D), 0.0, atol=0)
    assert np.all(D[~np.eye(n, dtype=bool)] >= 0)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert D[i, k] <= D[i, j] + D[j, k] + 1e-12


def test_lca_is_ultra_matrix(rng):
    for _ in range(3):
        f = random_field(rng, (7, 7))
        tree = build_merge_tree(f, "join")
        net = encode(tree, StrategyConfig(edge="lca", attribute="none"))
        W = net.W
        n = net.n
        for i in range(n):
            for j in range(n):
                assert W[i, j] >= max(W[i, i], W[j, j]) - 1e-15
                for k in range(n):
                    assert W[i, k] <= max(W[i, j], W[j, k]) + 1e-15


def test_sp_lca_relation(rng):
    # path-length matrix == 2 * ancestor-value matrix - f(x) - f(y); the two
    # sides are accumulated in different orders, so only rounding may differ
    for _ in range(3):
        f = random_field(rng, (7, 6))
        tree = build_merge_tree(f, "join")
        sp = encode(tree, StrategyConfig(edge="sp", attribute="none")).W
        lca_w = encode(tree, StrategyConfig(edge="lca", attribute="none")).W
        fs = np.array([tree.f(n.node_id) for n in tree.nodes])
        assert np.allclose(sp, 2 * lca_w - fs[:, None] - fs[None, :], atol=1e-12, rtol=0)


def test_encode_permutation_invariant():
    t1 = three_node_tree()
    # same tree, nodes listed in a different order
    t2 = make_tree(
        [(2, 5.0, "root"), (1, 2.0, "leaf"), (0, 1.0, "leaf")],
        {0: 2, 1: 2},
        field_range=4.0,
    )
    n1 = encode(t1, StrategyConfig(attribute="none"))
    n2 = encode(t2, StrategyConfig(attribute="none"))
    order1 = [m["id"] for m in n1.node_meta]
    order2 = [m["id"] for m in n2.node_meta]
    perm = [order2.index(i) for i in order1]
    assert np.allclose(n1.W, n2.W[np.ix_(perm, perm)])
    assert np.allclose(n1.p, n2.p[perm])


def test_network_invariants():
    with pytest.raises(NetworkError, match="sum to 1"):
        MeasureNetwork(p=np.array([0.5, 0.6]), W=np.zeros((2, 2)))
    with pytest.raises(NetworkError, match="supported"):
        MeasureNetwork(p=np.array([1.0, 0.0]), W=np.zeros((2, 2)))
    with pytest.raises(NetworkError, match="symmetric"):
        MeasureNetwork(p=np.array([0.5, 0.5]), W=np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_network_json_roundtrip(tmp_path, rng):
    f = random_field(rng, (6, 6))
    tree = build_merge_tree(f, "join")
    net = encode(tree, StrategyConfig())
    path = tmp_path / "net.json"
    net.save(path)
    back = MeasureNetwork.load(path)
    assert np.array_equal(back.p, net.p)
    assert np.array_equal(back.W, net.W)
    assert np.array_equal(back.attrs, net.attrs)


def test_pairwise_weighted_norm_matches_flat():
    p = np.array([0.25, 0.75])
    F = np.array([[1.0, 2.0], [2.0, 0.0]])
    manual = (sum(abs(F[i, j]) ** 2 * p[i] * p[j] for i in range(2) for j in range(2))) ** 0.5
    assert pairwise_weighted_norm(F, np.zeros((2, 2)), p, 2) == pytest.approx(manual)
