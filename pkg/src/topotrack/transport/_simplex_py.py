"""Dense transportation simplex, NumPy edition.

Solves min <cost, X> s.t. X 1 = a, X^T 1 = b, X >= 0 with sum(a) == sum(b),
returning an exact basic optimal solution. This is the pure-Python fallback
for the compiled kernel in ``_simplex.pyx``; both implement the same
algorithm (northwest-corner start, Dantzig pricing with a Bland safeguard
against degenerate stalling) and must produce identical objectives.
"""

from __future__ import annotations

import numpy as np


class TransportError(RuntimeError):
    pass


def _flows_from_basis(a, b, basis):
    """Recover the basic solution by peeling leaves of the basis tree.

    Returns None if the basis is not a spanning tree or yields an infeasible
    (negative) flow for these marginals.
    """
    n1, n2 = basis.shape
    if int(basis.sum()) != n1 + n2 - 1:
        return None
    X = np.zeros((n1, n2))
    row_cells = [list(np.flatnonzero(basis[i])) for i in range(n1)]
    col_cells = [list(np.flatnonzero(basis[:, j])) for j in range(n2)]
    deg = np.concatenate([[len(c) for c in row_cells], [len(c) for c in col_cells]])
    rem_a = a.copy()
    rem_b = b.copy()
    alive = basis.copy()
    queue = [k for k in range(n1 + n2) if deg[k] == 1]
    resolved = 0
    while queue:
        node = queue.pop()
        if deg[node] != 1:
            continue
        if node < n1:
            i = node
            js = [j for j in row_cells[i] if alive[i, j]]
            if not js:
                continue
            j = js[0]
            X[i, j] = rem_a[i]
        else:
            j = node - n1
            is_ = [i for i in col_cells[j] if alive[i, j]]
            if not is_:
                continue
            i = is_[0]
            X[i, j] = rem_b[j]
        if X[i, j] < -1e-12:
            return None
        rem_a[i] -= X[i, j]
        rem_b[j] -= X[i, j]
        alive[i, j] = False
        deg[i] -= 1
        deg[n1 + j] -= 1
        resolved += 1
        if deg[i] == 1:
            queue.append(i)
        if deg[n1 + j] == 1:
            queue.append(n1 + j)
    if resolved != n1 + n2 - 1:
        return None
    np.clip(X, 0.0, None, out=X)
    return X


def solve_transport(a: np.ndarray, b: np.ndarray, cost: np.ndarray,
                    basis: np.ndarray | None = None):
    """Return (plan, objective) for the balanced transportation problem.

    ``basis`` is an optional in/out boolean array: when it already holds a
    spanning-tree basis (from a previous solve with the same marginals) the
    simplex warm-starts from it; on return it holds the optimal basis.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    cost = np.asarray(cost, dtype=np.float64)
    n1, n2 = a.size, b.size
    if cost.shape != (n1, n2):
        raise TransportError(f"cost shape {cost.shape} != ({n1}, {n2})")
    if np.any(a < 0) or np.any(b < 0):
        raise TransportError("marginals must be nonnegative")
    if abs(a.sum() - b.sum()) > 1e-9 * max(1.0, a.sum()):
        raise TransportError(f"unbalanced marginals: {a.sum()} vs {b.sum()}")

    caller_basis = basis
    X = None
    shared_basis = basis is not None and basis.shape == (n1, n2)
    if shared_basis and basis.any():
        X = _flows_from_basis(a, b, basis)
    if X is not None:
        basis_work = basis
    else:
        basis_work = np.zeros((n1, n2), dtype=bool)
        X = np.zeros((n1, n2))
        # Northwest-corner initial basic feasible solution: exactly n1+n2-1
        # basic cells (some possibly degenerate at zero).
        ra = a.copy()
        rb = b.copy()
        i = j = 0
        while True:
            basis_work[i, j] = True
            t = min(ra[i], rb[j])
            X[i, j] = t
            ra[i] -= t
            rb[j] -= t
            if i == n1 - 1 and j == n2 - 1:
                break
            if i < n1 - 1 and (ra[i] <= rb[j] or j == n2 - 1):
                i += 1
            else:
                j += 1
    basis = basis_work

    tol = 1e-12 * (1.0 + float(np.max(np.abs(cost))))
    max_pivots = 200 * (n1 + n2) * (n1 + n2) + 10000
    degenerate_streak = 0
    use_bland = False

    row_adj = [set(np.flatnonzero(basis[i])) for i in range(n1)]
    col_adj = [set(np.flatnonzero(basis[:, j])) for j in range(n2)]

    u = np.zeros(n1)
    v = np.zeros(n2)

    for _pivot in range(max_pivots):
        # duals from the basis tree (u[0] = 0), BFS over basic cells
        u.fill(np.nan)
        v.fill(np.nan)
        u[0] = 0.0
        stack = [("r", 0)]
        while stack:
            side, k = stack.pop()
            if side == "r":
                for jj in row_adj[k]:
                    if np.isnan(v[jj]):
                        v[jj] = cost[k, jj] - u[k]
                        stack.append(("c", jj))
            else:
                for ii in col_adj[k]:
                    if np.isnan(u[ii]):
                        u[ii] = cost[ii, k] - v[k]
                        stack.append(("r", ii))
        if np.isnan(u).any() or np.isnan(v).any():
            raise TransportError("basis tree is disconnected")

        reduced = cost - u[:, None] - v[None, :]
        if use_bland:
            cand = np.argwhere(reduced < -tol)
            if cand.size == 0:
                break
            ei, ej = map(int, cand[0])
        else:
            flat = int(np.argmin(reduced))
            ei, ej = divmod(flat, n2)
            if reduced[ei, ej] >= -tol:
                break

        # unique cycle: tree path from row-node ei to col-node ej, plus (ei, ej)
        parent: dict[tuple[str, int], tuple[str, int]] = {}
        start = ("r", ei)
        goal = ("c", ej)
        stack = [start]
        seen = {start}
        while stack:
            node = stack.pop()
            if node == goal:
                break
            side, k = node
            nbrs = (
                (("c", jj) for jj in row_adj[k])
                if side == "r"
                else (("r", ii) for ii in col_adj[k])
            )
            for nb in nbrs:
                if nb not in seen:
                    seen.add(nb)
                    parent[nb] = node
                    stack.append(nb)
        if goal not in seen:
            raise TransportError("entering cell not connected to basis tree")

        # path nodes goal -> start; consecutive nodes define the cycle cells
        path = [goal]
        while path[-1] != start:
            path.append(parent[path[-1]])
        cells = [(ei, ej)]
        for nxt, cur in zip(path, path[1:]):
            if cur[0] == "r":
                cells.append((cur[1], nxt[1]))
            else:
                cells.append((nxt[1], cur[1]))
        # cells alternate +, -, +, - starting with the entering cell
        minus = cells[1::2]
        theta = np.inf
        leave = None
        for (mi, mj) in minus:
            if X[mi, mj] < theta - 1e-15 or (
                leave is not None
                and abs(X[mi, mj] - theta) <= 1e-15
                and (mi, mj) < leave
            ):
                theta = X[mi, mj]
                leave = (mi, mj)
        if leave is None:
            raise TransportError("unbounded pivot (should not happen)")

        if theta <= 1e-15:
            degenerate_streak += 1
            if degenerate_streak > n1 + n2 + 10:
                use_bland = True
        else:
            degenerate_streak = 0
            use_bland = False

        for k, (ci, cj) in enumerate(cells):
            X[ci, cj] += theta if k % 2 == 0 else -theta
        li, lj = leave
        X[li, lj] = 0.0
        basis[li, lj] = False
        row_adj[li].discard(lj)
        col_adj[lj].discard(li)
        basis[ei, ej] = True
        row_adj[ei].add(ej)
        col_adj[ej].add(ei)
    else:
        raise TransportError("pivot limit exceeded")

    np.clip(X, 0.0, None, out=X)
    if caller_basis is not None and caller_basis is not basis:
        caller_basis[...] = basis
    return X, float(np.sum(X * cost))
