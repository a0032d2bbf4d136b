"""Merge trees of scalar fields via a sorted union-find sweep.

Join trees record how sublevel-set components appear (at local minima) and
merge (at saddles); the split tree is the join tree of ``-f`` relabeled.
Ties in function value are broken by vertex index throughout, so every
field has a unique sweep order and a unique root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .field import ScalarField, domain_diagonal

__all__ = [
    "TreeNode",
    "MergeTree",
    "PersistencePair",
    "build_merge_tree",
    "persistence_pairs",
    "simplify",
    "persistence_graph",
    "lca",
    "vertex_merge_values",
    "vertex_dendrogram",
    "CONNECTIVITY_OFFSETS",
]


class MergeTreeError(ValueError):
    pass


# Neighborhood stencils. The Freudenthal variants triangulate the grid so the
# domain is a simplicial complex; offsets come in +/- pairs.
CONNECTIVITY_OFFSETS: dict[str, tuple[tuple[int, ...], ...]] = {
    "grid4": ((1, 0), (-1, 0), (0, 1), (0, -1)),
    "freudenthal2d": ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)),
    "grid6": ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)),
    "freudenthal3d": (
        (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
        (1, 1, 0), (-1, -1, 0), (1, 0, 1), (-1, 0, -1), (0, 1, 1), (0, -1, -1),
        (1, 1, 1), (-1, -1, -1),
    ),
}


def default_connectivity(ndim: int) -> str:
    return "freudenthal2d" if ndim == 2 else "freudenthal3d"


@dataclass(frozen=True)
class TreeNode:
    node_id: int
    vertex_id: int
    f_value: float
    coords: tuple[float, ...]
    kind: str  # leaf | saddle | root


@dataclass
class MergeTree:
    nodes: list[TreeNode]
    parent: dict[int, int]  # node_id -> node_id, absent for the root
    direction: str  # join | split
    field_range: float = 0.0
    domain_diag: float = 1.0

    def __post_init__(self):
        self._by_id = {n.node_id: n for n in self.nodes}
        if len(self._by_id) != len(self.nodes):
            raise MergeTreeError("duplicate node ids")
        self._children: dict[int, list[int]] = {n.node_id: [] for n in self.nodes}
        roots = []
        for n in self.nodes:
            pid = self.parent.get(n.node_id)
            if pid is None:
                roots.append(n.node_id)
            else:
                if pid not in self._by_id:
                    raise MergeTreeError(f"parent {pid} of node {n.node_id} not in tree")
                self._children[pid].append(n.node_id)
        if len(roots) != 1:
            raise MergeTreeError(f"expected exactly one root, found {len(roots)}")
        self._root_id = roots[0]
        # parent links must be acyclic and reach the root
        for n in self.nodes:
            seen = set()
            cur = n.node_id
            while cur != self._root_id:
                if cur in seen:
                    raise MergeTreeError("cycle in parent links")
                seen.add(cur)
                cur = self.parent[cur]

    @property
    def root_id(self) -> int:
        return self._root_id

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> TreeNode:
        return self._by_id[node_id]

    def children(self, node_id: int) -> list[int]:
        return self._children[node_id]

    def leaves(self) -> list[int]:
        return [nid for nid, ch in self._children.items() if not ch and nid != self._root_id]

    def f(self, node_id: int) -> float:
        return self._by_id[node_id].f_value

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "id": n.node_id,
                    "vertex": n.vertex_id,
                    "f": n.f_value,
                    "coords": list(n.coords),
                    "kind": n.kind,
                }
                for n in self.nodes
            ],
            "parent": {str(k): v for k, v in self.parent.items()},
            "direction": self.direction,
            "field_range": self.field_range,
            "domain_diag": self.domain_diag,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MergeTree":
        nodes = [
            TreeNode(int(n["id"]), int(n["vertex"]), float(n["f"]),
                     tuple(float(c) for c in n["coords"]), str(n["kind"]))
            for n in doc["nodes"]
        ]
        parent = {int(k): int(v) for k, v in doc["parent"].items()}
        return cls(nodes, parent, doc["direction"],
                   float(doc.get("field_range", 0.0)), float(doc.get("domain_diag", 1.0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "MergeTree":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PersistencePair:
    extremum: int
    saddle: int
    persistence: float


def _neighbor_table(dims: tuple[int, ...], connectivity: str) -> list[np.ndarray]:
    """Neighbor vertex ids per vertex, built once per build call."""
    if connectivity not in CONNECTIVITY_OFFSETS:
        raise MergeTreeError(f"unknown connectivity {connectivity!r}")
    offsets = CONNECTIVITY_OFFSETS[connectivity]
    if len(offsets[0]) != len(dims):
        raise MergeTreeError(f"connectivity {connectivity!r} does not match a {len(dims)}D grid")
    shape = np.array(dims)
    idx = np.indices(dims).reshape(len(dims), -1).T  # (n, d)
    neighbors: list[np.ndarray] = []
    strides = np.cumprod((1,) + dims[::-1][:-1])[::-1]  # row-major strides in vertices
    flat: list[np.ndarray] = []
    for off in offsets:
        shifted = idx + np.array(off)
        ok = np.all((shifted >= 0) & (shifted < shape), axis=1)
        ids = shifted @ strides
        ids[~ok] = -1
        flat.append(ids)
    stack = np.stack(flat, axis=1)  # (n, n_offsets)
    for v in range(stack.shape[0]):
        row = stack[v]
        neighbors.append(row[row >= 0])
    return neighbors


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
        return ra


def _sweep_order(values: np.ndarray) -> np.ndarray:
    # Lexicographic (value, vertex index): simulation of simplicity.
    return np.lexsort((np.arange(values.size), values))


def _sweep_join(values: np.ndarray, neighbors: list[np.ndarray]):
    """Single union-find sweep in increasing (value, index) order.

    Returns (node_vertices, parent_vertex, dendro_parent) where node_vertices
    are the contracted tree nodes (minima, merge saddles, root vertex),
    parent_vertex maps node vertex -> parent node vertex, and dendro_parent
    is the per-vertex augmented-tree parent (every vertex a node).
    """
    n = values.size
    order = _sweep_order(values)
    uf = _UnionFind(n)
    processed = np.zeros(n, dtype=bool)
    comp_top = np.full(n, -1, dtype=np.int64)  # uf root -> latest tree-node vertex
    comp_last = np.full(n, -1, dtype=np.int64)  # uf root -> latest swept vertex
    dendro_parent = np.full(n, -1, dtype=np.int64)
    node_vertices: list[int] = []
    is_node = np.zeros(n, dtype=bool)
    parent_vertex: dict[int, int] = {}

    for v in order:
        roots = []
        for w in neighbors[v]:
            if processed[w]:
                r = uf.find(int(w))
                if r not in roots:
                    roots.append(r)
        if not roots:
            # local minimum: new component, new leaf
            node_vertices.append(int(v))
            is_node[v] = True
            comp_top[v] = v
            comp_last[v] = v
        elif len(roots) == 1:
            r = roots[0]
            dendro_parent[comp_last[r]] = v
            top = comp_top[r]
            nr = uf.union(r, int(v))
            comp_top[nr] = top
            comp_last[nr] = v
        else:
            # merge saddle: joins >= 2 components
            node_vertices.append(int(v))
            is_node[v] = True
            for r in roots:
                parent_vertex[int(comp_top[r])] = int(v)
                dendro_parent[comp_last[r]] = v
            nr = roots[0]
            for r in roots[1:]:
                nr = uf.union(nr, r)
            nr = uf.union(nr, int(v))
            comp_top[nr] = v
            comp_last[nr] = v
        processed[v] = True

    top_roots = {uf.find(int(v)) for v in range(n)}
    if len(top_roots) != 1:
        raise MergeTreeError(
            f"domain is disconnected under the chosen connectivity ({len(top_roots)} components)"
        )
    # Root: the globally last swept vertex (global max after tie-breaking).
    last = int(order[-1])
    final_root = top_roots.pop()
    top = int(comp_top[final_root])
    if top != last:
        node_vertices.append(last)
        is_node[last] = True
        parent_vertex[top] = last
    return node_vertices, parent_vertex, dendro_parent, order


def build_merge_tree(
    field: ScalarField,
    direction: str = "join",
    connectivity: str | None = None,
) -> MergeTree:
    """Construct the join or split merge tree of a field.

    Join: leaves are local minima, root the global maximum. Split: built as
    the join tree of ``-f`` and relabeled with the original values. Regular
    (degree-2) vertices never become nodes.
    """
    if direction not in ("join", "split"):
        raise MergeTreeError(f"direction must be 'join' or 'split', got {direction!r}")
    connectivity = connectivity or default_connectivity(field.ndim)
    neighbors = _neighbor_table(field.dims, connectivity)
    values = field.values if direction == "join" else -field.values
    node_vertices, parent_vertex, _, _ = _sweep_join(values, neighbors)

    children_count = {v: 0 for v in node_vertices}
    for child, par in parent_vertex.items():
        children_count[par] += 1
    root_vertex = next(v for v in node_vertices if v not in parent_vertex)

    nodes = []
    for v in node_vertices:
        if v == root_vertex:
            kind = "root"
        elif children_count[v] == 0:
            kind = "leaf"
        else:
            kind = "saddle"
        nodes.append(
            TreeNode(
                node_id=v,
                vertex_id=v,
                f_value=float(field.values[v]),
                coords=tuple(field.vertex_coords(v)),
                kind=kind,
            )
        )
    return MergeTree(
        nodes=nodes,
        parent=dict(parent_vertex),
        direction=direction,
        field_range=field.value_range,
        domain_diag=domain_diagonal(field),
    )


def _deeper(tree: MergeTree, a: int, b: int) -> int:
    """The 'elder' of two leaves: extremal f first, vertex index to break ties."""
    sign = 1.0 if tree.direction == "join" else -1.0
    ka = (sign * tree.f(a), a)
    kb = (sign * tree.f(b), b)
    return a if ka <= kb else b


def persistence_pairs(tree: MergeTree) -> list[PersistencePair]:
    """Elder-rule branch decomposition.

    Every non-root leaf is paired with the saddle where its branch merges
    into an elder branch; the globally deepest leaf pairs with the root.
    Returned sorted by (persistence, extremum id).
    """
    pairs: list[PersistencePair] = []
    # bottom-up: representative (deepest unpaired leaf) per subtree
    rep: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(tree.root_id, False)]
    while stack:
        nid, expanded = stack.pop()
        ch = tree.children(nid)
        if not ch:
            rep[nid] = nid
        elif not expanded:
            stack.append((nid, True))
            stack.extend((c, False) for c in ch)
        else:
            reps = [rep[c] for c in ch]
            best = reps[0]
            for r in reps[1:]:
                best = _deeper(tree, best, r)
            for r in reps:
                if r != best:
                    pairs.append(PersistencePair(r, nid, abs(tree.f(nid) - tree.f(r))))
            rep[nid] = best
    survivor = rep[tree.root_id]
    root = tree.root_id
    if survivor != root:
        pairs.append(
            PersistencePair(survivor, root, abs(tree.f(root) - tree.f(survivor)))
        )
    pairs.sort(key=lambda p: (p.persistence, p.extremum))
    return pairs


def _global_pair_extremum(tree: MergeTree) -> int:
    leaves = tree.leaves()
    if not leaves:
        return tree.root_id
    best = leaves[0]
    for l in leaves[1:]:
        best = _deeper(tree, best, l)
    return best


def _remove_leaf_and_contract(tree: MergeTree, leaf: int) -> MergeTree:
    keep = {n.node_id for n in tree.nodes} - {leaf}
    parent = {k: v for k, v in tree.parent.items() if k != leaf}
    saddle = tree.parent[leaf]
    remaining_children = [c for c in tree.children(saddle) if c != leaf]
    if len(remaining_children) == 1 and saddle != tree.root_id:
        # contract the now degree-2 saddle
        child = remaining_children[0]
        parent[child] = parent.pop(saddle)
        keep.discard(saddle)
    nodes = []
    for n in tree.nodes:
        if n.node_id not in keep:
            continue
        if n.node_id == tree.root_id:
            kind = "root"
        else:
            has_children = any(parent.get(c) == n.node_id for c in keep)
            kind = "saddle" if has_children else "leaf"
        nodes.append(TreeNode(n.node_id, n.vertex_id, n.f_value, n.coords, kind))
    return MergeTree(nodes, parent, tree.direction, tree.field_range, tree.domain_diag)


def simplify(tree: MergeTree, epsilon: float) -> MergeTree:
    """Cancel persistence pairs below ``epsilon * R`` (R = originating field range).

    Pairs are cancelled one at a time in increasing (persistence, extremum id)
    order, contracting degree-2 saddles as they arise; the global pair and the
    root are never removed.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise MergeTreeError(f"epsilon must be in [0, 1], got {epsilon}")
    threshold = epsilon * tree.field_range
    current = tree
    while True:
        global_leaf = _global_pair_extremum(current)
        candidates = [
            p
            for p in persistence_pairs(current)
            if p.extremum != global_leaf and p.persistence < threshold
        ]
        if not candidates:
            return current
        current = _remove_leaf_and_contract(current, candidates[0].extremum)


def persistence_graph(tree: MergeTree, epsilons) -> list[tuple[float, int]]:
    """(epsilon, surviving critical point count) rows over an epsilon grid."""
    return [(float(e), simplify(tree, float(e)).n_nodes) for e in epsilons]


def lca(tree: MergeTree, u: int, v: int) -> tuple[int, float]:
    """Lowest (join) / highest (split) valued common ancestor of two nodes."""
    ancestors = set()
    cur = u
    while True:
        ancestors.add(cur)
        if cur == tree.root_id:
            break
        cur = tree.parent[cur]
    cur = v
    while cur not in ancestors:
        cur = tree.parent[cur]
    return cur, tree.f(cur)


def vertex_dendrogram(
    field: ScalarField, direction: str = "join", connectivity: str | None = None
) -> np.ndarray:
    """Augmented merge tree over *all* grid vertices.

    Returns the parent vertex of every vertex (-1 for the root). Walking
    parent links visits vertices in sweep order, so the lowest common
    ancestor of two vertices is the vertex at which their sublevel (join) /
    superlevel (split) components merged.
    """
    connectivity = connectivity or default_connectivity(field.ndim)
    neighbors = _neighbor_table(field.dims, connectivity)
    values = field.values if direction == "join" else -field.values
    _, _, dendro_parent, _ = _sweep_join(values, neighbors)
    return dendro_parent


def vertex_merge_values(
    field: ScalarField, direction: str = "join", connectivity: str | None = None
) -> np.ndarray:
    """Dense matrix W with W[v, w] = f at the merge vertex of v and w.

    This is the least-common-ancestor value matrix of the vertex labeling:
    the minimax (join) / maximin (split) path value between grid vertices.
    Diagonal entries are f(v). O(n^2) memory; intended for small grids.
    """
    connectivity = connectivity or default_connectivity(field.ndim)
    neighbors = _neighbor_table(field.dims, connectivity)
    sign = 1.0 if direction == "join" else -1.0
    values = sign * field.values
    n = values.size
    order = _sweep_order(values)
    uf = _UnionFind(n)
    processed = np.zeros(n, dtype=bool)
    members: dict[int, list[int]] = {}
    W = np.zeros((n, n), dtype=np.float64)
    W[np.diag_indices(n)] = values

    for v in order:
        v = int(v)
        roots = []
        for w in neighbors[v]:
            if processed[w]:
                r = uf.find(int(w))
                if r not in roots:
                    roots.append(r)
        groups = [members[r] for r in roots]
        fv = values[v]
        merged = [v]
        for g in groups:
            arr = np.fromiter(merged, dtype=np.int64)
            garr = np.fromiter(g, dtype=np.int64)
            W[np.ix_(arr, garr)] = fv
            W[np.ix_(garr, arr)] = fv
            merged.extend(g)
        nr = uf.find(v)
        for r in roots:
            nr = uf.union(nr, r)
            members.pop(r, None)
        nr = uf.find(v)
        members[nr] = merged
        processed[v] = True

    if len(members) != 1:
        raise MergeTreeError("domain is disconnected under the chosen connectivity")
    return sign * W
