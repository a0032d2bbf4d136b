"""Attributed measure networks (V, p, W) built from merge trees.

Edge strategies: ``sp`` sums absolute function differences along the unique
tree path, ``lca`` takes the function value at the lowest common ancestor.
Node strategies: ``uniform`` mass, or ``parent`` mass proportional to the
function gap to the parent. Attributes: critical-point coordinates scaled
by the domain diagonal, or none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mergetree import MergeTree, lca as tree_lca

__all__ = [
    "MeasureNetwork",
    "StrategyConfig",
    "encode",
    "is_balanced",
    "weighted_norm",
    "pairwise_weighted_norm",
]


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyConfig:
    edge: str = "sp"  # sp | lca
    node: str = "uniform"  # uniform | parent
    attribute: str = "coordinates"  # coordinates | none

    def __post_init__(self):
        if self.edge not in ("sp", "lca"):
            raise NetworkError(f"edge strategy must be 'sp' or 'lca', got {self.edge!r}")
        if self.node not in ("uniform", "parent"):
            raise NetworkError(f"node strategy must be 'uniform' or 'parent', got {self.node!r}")
        if self.attribute not in ("coordinates", "none"):
            raise NetworkError(
                f"attribute strategy must be 'coordinates' or 'none', got {self.attribute!r}"
            )


@dataclass
class MeasureNetwork:
    p: np.ndarray  # (n,) probability vector, fully supported
    W: np.ndarray  # (n, n) symmetric relational matrix
    attrs: np.ndarray | None = None  # (n, d) node attributes
    node_meta: list[dict] | None = None  # back-references into the source tree

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64).ravel()
        self.W = np.asarray(self.W, dtype=np.float64)
        n = self.p.size
        if self.W.shape != (n, n):
            raise NetworkError(f"W shape {self.W.shape} does not match p length {n}")
        if abs(self.p.sum() - 1.0) > 1e-12:
            raise NetworkError(f"p must sum to 1 (got {self.p.sum()!r})")
        if np.any(self.p <= 0):
            raise NetworkError("p must be fully supported (all entries > 0)")
        if not np.allclose(self.W, self.W.T, atol=1e-12):
            raise NetworkError("W must be symmetric")
        if self.attrs is not None:
            self.attrs = np.asarray(self.attrs, dtype=np.float64)
            if self.attrs.ndim != 2 or self.attrs.shape[0] != n:
                raise NetworkError(f"attrs shape {self.attrs.shape} does not match n={n}")

    @property
    def n(self) -> int:
        return self.p.size

    def to_json(self) -> dict:
        doc = {"p": self.p.tolist(), "W": self.W.tolist()}
        if self.attrs is not None:
            doc["attrs"] = self.attrs.tolist()
        if self.node_meta is not None:
            doc["meta"] = self.node_meta
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "MeasureNetwork":
        return cls(
            p=np.array(doc["p"], dtype=np.float64),
            W=np.array(doc["W"], dtype=np.float64),
            attrs=np.array(doc["attrs"], dtype=np.float64) if "attrs" in doc else None,
            node_meta=doc.get("meta"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> "MeasureNetwork":
        return cls.from_json(json.loads(Path(path).read_text()))


def _path_to_root(tree: MergeTree, nid: int) -> list[int]:
    path = [nid]
    while path[-1] != tree.root_id:
        path.append(tree.parent[path[-1]])
    return path


def _sp_matrix(tree: MergeTree, order: list[int]) -> np.ndarray:
    # cumulative |f difference| from each node up to the root; the unique tree
    # path between x and y passes through their common ancestor, so
    # d(x, y) = up(x) + up(y) - 2 up(ancestor).
    up: dict[int, float] = {}
    for nid in order:
        path = _path_to_root(tree, nid)
        acc = 0.0
        for child, par in zip(path, path[1:]):
            acc += abs(tree.f(par) - tree.f(child))
        up[nid] = acc
    n = len(order)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, _ = tree_lca(tree, order[i], order[j])
            d = up[order[i]] + up[order[j]] - 2.0 * up[a]
            D[i, j] = D[j, i] = d
    return D


def _lca_matrix(tree: MergeTree, order: list[int]) -> np.ndarray:
    n = len(order)
    W = np.zeros((n, n))
    for i in range(n):
        W[i, i] = tree.f(order[i])
        for j in range(i + 1, n):
            _, fv = tree_lca(tree, order[i], order[j])
            W[i, j] = W[j, i] = fv
    return W


def encode(tree: MergeTree, cfg: StrategyConfig | None = None) -> MeasureNetwork:
    """Encode a merge tree as an attributed measure network."""
    cfg = cfg or StrategyConfig()
    order = [n.node_id for n in tree.nodes]
    n = len(order)
    if n == 0:
        raise NetworkError("cannot encode an empty tree")

    if cfg.edge == "sp":
        W = _sp_matrix(tree, order)
    else:
        W = _lca_matrix(tree, order)

    if cfg.node == "uniform":
        p = np.full(n, 1.0 / n)
    else:
        weights = np.empty(n)
        root_mass = tree.field_range
        if root_mass <= 0:
            fs = [tree.f(nid) for nid in order]
            root_mass = max(fs) - min(fs)
        for i, nid in enumerate(order):
            if nid == tree.root_id:
                weights[i] = root_mass
            else:
                weights[i] = abs(tree.f(tree.parent[nid]) - tree.f(nid))
        total = weights.sum()
        if total <= 0:
            raise NetworkError("parent strategy degenerate: all edge lengths are zero")
        if np.any(weights <= 0):
            raise NetworkError("parent strategy needs strictly positive edge lengths")
        p = weights / total

    attrs = None
    if cfg.attribute == "coordinates":
        diag = tree.domain_diag if tree.domain_diag > 0 else 1.0
        attrs = np.array([tree.node(nid).coords for nid in order], dtype=np.float64) / diag

    meta = [
        {
            "id": nid,
            "vertex": tree.node(nid).vertex_id,
            "f": tree.f(nid),
            "kind": tree.node(nid).kind,
        }
        for nid in order
    ]
    return MeasureNetwork(p=p, W=W, attrs=attrs, node_meta=meta)


def is_balanced(p: np.ndarray) -> bool:
    """True iff p(u) * p(v) <= p(w) for all node triples, i.e. (max p)^2 <= min p."""
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size == 0 or np.any(p <= 0):
        return False
    return float(p.max()) ** 2 <= float(p.min())


def weighted_norm(f1, f2, p, q: float = 2.0) -> float:
    """L^q(p)-norm of f1 - f2: (sum |f1-f2|^q p)^(1/q)."""
    f1 = np.asarray(f1, dtype=np.float64).ravel()
    f2 = np.asarray(f2, dtype=np.float64).ravel()
    p = np.asarray(p, dtype=np.float64).ravel()
    if not (f1.size == f2.size == p.size):
        raise NetworkError("weighted_norm: length mismatch")
    if q < 1:
        raise NetworkError(f"q must be >= 1, got {q}")
    return float(np.sum(np.abs(f1 - f2) ** q * p) ** (1.0 / q))


def pairwise_weighted_norm(F1: np.ndarray, F2: np.ndarray, p: np.ndarray, q: float = 2.0) -> float:
    """L^q(p x p)-norm of F1 - F2 for matrices indexed over V x V."""
    F1 = np.asarray(F1, dtype=np.float64)
    F2 = np.asarray(F2, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64).ravel()
    pp = np.outer(p, p)
    return float(np.sum(np.abs(F1 - F2) ** q * pp) ** (1.0 / q))
