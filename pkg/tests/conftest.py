import numpy as np
import pytest

from topotrack.field import GaussianSpec, ScalarField, gaussian_mixture
from topotrack.mergetree import MergeTree, TreeNode
from topotrack.network import MeasureNetwork


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_network(rng, n, d=2, uniform_p=False):
    p = np.full(n, 1.0 / n) if uniform_p else None
    if p is None:
        p = rng.random(n) + 0.2
        p /= p.sum()
    W = rng.random((n, n))
    W = (W + W.T) / 2.0
    attrs = rng.random((n, d))
    return MeasureNetwork(p=p, W=W, attrs=attrs)


def make_tree(node_specs, parent, direction="join", field_range=None, domain_diag=1.0):
    """node_specs: list of (node_id, f, kind) or (node_id, f, kind, coords)."""
    nodes = []
    for spec in node_specs:
        nid, f, kind = spec[0], spec[1], spec[2]
        coords = spec[3] if len(spec) > 3 else (float(nid), 0.0)
        nodes.append(TreeNode(nid, nid, float(f), tuple(coords), kind))
    fs = [n.f_value for n in nodes]
    if field_range is None:
        field_range = max(fs) - min(fs)
    return MergeTree(nodes, dict(parent), direction, field_range, domain_diag)


def random_field(rng, dims=(8, 8), spacing=None):
    values = rng.random(int(np.prod(dims)))
    spacing = spacing or (1.0,) * len(dims)
    return ScalarField(dims, (0.0,) * len(dims), spacing, values)


def two_bump_field(dims=(24, 24)):
    spacing = tuple(1.0 / (n - 1) for n in dims)
    specs = [
        GaussianSpec((0.30, 0.50), 1.0, (0.10, 0.10)),
        GaussianSpec((0.72, 0.50), 0.8, (0.10, 0.10)),
    ]
    return gaussian_mixture(specs, dims, (0.0, 0.0), spacing)
