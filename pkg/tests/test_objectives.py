import numpy as np
import pytest

from conftest import make_network
from topotrack.transport import (
    fgw_objective,
    gw_gradient,
    gw_loss,
    gw_loss_fast,
    wasserstein_cost_matrix,
)


def random_partial_coupling(rng, n1, n2):
    p1 = rng.random(n1) + 0.1
    p1 /= p1.sum()
    p2 = rng.random(n2) + 0.1
    p2 /= p2.sum()
    m = float(rng.uniform(0.3, 1.0))
    C = rng.random((n1, n2))
    C *= m / C.sum()
    # shrink rows/cols that exceed their marginal
    for _ in range(50):
        r = C.sum(axis=1)
        over = r > p1
        if np.any(over):
            C[over] *= (p1[over] / r[over])[:, None]
        c = C.sum(axis=0)
        over = c > p2
        if np.any(over):
            C[:, over] *= p2[over] / c[over]
    return C


def test_cost_matrix_trivials(rng):
    a = make_network(rng, 4)
    b = make_network(rng, 4)
    b.attrs = a.attrs.copy()
    M = wasserstein_cost_matrix(a, b, q=2)
    assert np.allclose(np.diag(M), 0.0)

    a.attrs = np.array([[0.0, 0.0]])
    b.attrs = np.array([[3.0, 4.0]])
    a.p = np.array([1.0])
    b.p = np.array([1.0])
    a.W = np.zeros((1, 1))
    b.W = np.zeros((1, 1))
    assert wasserstein_cost_matrix(a, b, q=1)[0, 0] == pytest.approx(5.0)
    assert wasserstein_cost_matrix(a, b, q=2)[0, 0] == pytest.approx(25.0)


def test_gw_loss_same_network_identity_coupling(rng):
    net = make_network(rng, 5)
    C = np.diag(net.p)
    assert gw_loss(C, net.W, net.W, 2) == pytest.approx(0.0, abs=1e-15)


def test_gw_loss_single_cell():
    W1 = np.array([[2.0]])
    W2 = np.array([[5.0]])
    for q in (1.0, 2.0, 3.0):
        for m in (0.25, 1.0):
            C = np.array([[m]])
            assert gw_loss(C, W1, W2, q) == pytest.approx(abs(2 - 5) ** q * m * m)


def test_gw_loss_fast_zero_and_full(rng):
    net = make_network(rng, 2)
    assert gw_loss_fast(np.zeros((2, 2)), net.W, net.W) == 0.0
    C = np.outer(net.p, net.p)
    other = make_network(rng, 2)
    other.W = net.W.copy()
    assert gw_loss_fast(np.diag(net.p), net.W, other.W) == pytest.approx(0.0, abs=1e-15)


def test_gw_loss_fast_matches_quartic(rng):
    for _ in range(100):
        n1 = int(rng.integers(1, 7))
        n2 = int(rng.integers(1, 7))
        W1 = rng.random((n1, n1))
        W1 = (W1 + W1.T) / 2
        W2 = rng.random((n2, n2))
        W2 = (W2 + W2.T) / 2
        C = random_partial_coupling(rng, n1, n2)
        assert gw_loss_fast(C, W1, W2) == pytest.approx(gw_loss(C, W1, W2, 2), abs=1e-10)


def test_gw_gradient_finite_differences(rng):
    n1, n2 = 4, 3
    W1 = rng.random((n1, n1))
    W1 = (W1 + W1.T) / 2
    W2 = rng.random((n2, n2))
    W2 = (W2 + W2.T) / 2
    C = rng.random((n1, n2)) * 0.2
    G = gw_gradient(C, W1, W2)
    h = 1e-6
    for i in range(n1):
        for j in range(n2):
            Cp = C.copy()
            Cp[i, j] += h
            Cm = C.copy()
            Cm[i, j] -= h
            fd = (gw_loss_fast(Cp, W1, W2) - gw_loss_fast(Cm, W1, W2)) / (2 * h)
            assert G[i, j] == pytest.approx(fd, abs=1e-5)


def test_fgw_alpha_endpoints(rng):
    a = make_network(rng, 4)
    b = make_network(rng, 5)
    C = random_partial_coupling(rng, 4, 5)
    assert fgw_objective(C, a, b, alpha=1.0) == pytest.approx(gw_loss(C, a.W, b.W, 2))
    M = wasserstein_cost_matrix(a, b, 2)
    # alpha=0 with full mass: the literal form reduces to sum(M * C)
    Cfull = np.outer(a.p, b.p)
    assert fgw_objective(Cfull, a, b, alpha=0.0) == pytest.approx(float(np.sum(M * Cfull)))
    # partial mass: the literal form scales the attribute part by the mass
    mass = C.sum()
    assert fgw_objective(C, a, b, alpha=0.0) == pytest.approx(float(np.sum(M * C)) * mass)
    assert fgw_objective(C, a, b, alpha=0.0, scale_attr_by_mass=False) == pytest.approx(
        float(np.sum(M * C))
    )


def test_fgw_linear_in_alpha(rng):
    a = make_network(rng, 4)
    b = make_network(rng, 4)
    C = random_partial_coupling(rng, 4, 4)
    half = fgw_objective(C, a, b, alpha=0.5)
    lo = fgw_objective(C, a, b, alpha=0.0)
    hi = fgw_objective(C, a, b, alpha=1.0)
    assert half == pytest.approx(0.5 * lo + 0.5 * hi, rel=1e-12)


def test_transpose_symmetry(rng):
    a = make_network(rng, 4)
    b = make_network(rng, 6)
    C = random_partial_coupling(rng, 4, 6)
    assert fgw_objective(C, a, b, 0.3) == pytest.approx(
        fgw_objective(C.T, b, a, 0.3), rel=1e-12
    )


def test_scale_covariance_q2(rng):
    W1 = rng.random((4, 4))
    W1 = (W1 + W1.T) / 2
    W2 = rng.random((5, 5))
    W2 = (W2 + W2.T) / 2
    C = random_partial_coupling(rng, 4, 5)
    s = 3.7
    assert gw_loss_fast(C, s * W1, s * W2) == pytest.approx(
        s * s * gw_loss_fast(C, W1, W2), rel=1e-12
    )


def test_attribute_dim_mismatch(rng):
    a = make_network(rng, 3, d=2)
    b = make_network(rng, 3, d=3)
    with pytest.raises(ValueError):
        wasserstein_cost_matrix(a, b)
