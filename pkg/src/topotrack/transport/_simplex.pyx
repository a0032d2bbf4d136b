# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3str
"""Dense transportation simplex, compiled kernel.

Same algorithm as ``_simplex_py``: northwest-corner start, Dantzig pricing
with a Bland safeguard under degenerate stalling, lexicographic leaving-cell
tie-break. Kept structurally identical so the two backends can be
cross-checked cell for cell.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


class TransportError(RuntimeError):
    pass


cdef bint _flows_from_basis(cnp.float64_t[::1] a, cnp.float64_t[::1] b,
                            cnp.npy_bool[:, ::1] basis,
                            cnp.float64_t[:, ::1] X) noexcept:
    """Recover the basic solution by peeling leaves; False if infeasible."""
    cdef Py_ssize_t n1 = a.shape[0]
    cdef Py_ssize_t n2 = b.shape[0]
    cdef Py_ssize_t i, j, k, node, nb, top, resolved, count
    count = 0
    for i in range(n1):
        for j in range(n2):
            X[i, j] = 0.0
            if basis[i, j]:
                count += 1
    if count != n1 + n2 - 1:
        return False
    deg_arr = np.zeros(n1 + n2, dtype=np.int64)
    cdef cnp.int64_t[::1] deg = deg_arr
    alive_arr = np.array(basis, dtype=np.bool_)
    cdef cnp.npy_bool[:, ::1] alive = alive_arr
    rem_a_arr = np.array(a, dtype=np.float64)
    rem_b_arr = np.array(b, dtype=np.float64)
    cdef cnp.float64_t[::1] rem_a = rem_a_arr
    cdef cnp.float64_t[::1] rem_b = rem_b_arr
    for i in range(n1):
        for j in range(n2):
            if basis[i, j]:
                deg[i] += 1
                deg[n1 + j] += 1
    stack_arr = np.empty(2 * (n1 + n2), dtype=np.int64)
    cdef cnp.int64_t[::1] stack = stack_arr
    top = 0
    for k in range(n1 + n2):
        if deg[k] == 1:
            stack[top] = k
            top += 1
    resolved = 0
    while top > 0:
        top -= 1
        node = stack[top]
        if deg[node] != 1:
            continue
        if node < n1:
            i = node
            j = -1
            for k in range(n2):
                if alive[i, k]:
                    j = k
                    break
            if j < 0:
                continue
            X[i, j] = rem_a[i]
        else:
            j = node - n1
            i = -1
            for k in range(n1):
                if alive[k, j]:
                    i = k
                    break
            if i < 0:
                continue
            X[i, j] = rem_b[j]
        if X[i, j] < -1e-12:
            return False
        rem_a[i] -= X[i, j]
        rem_b[j] -= X[i, j]
        if X[i, j] < 0.0:
            X[i, j] = 0.0
        alive[i, j] = False
        deg[i] -= 1
        deg[n1 + j] -= 1
        resolved += 1
        if deg[i] == 1 and top < stack.shape[0]:
            stack[top] = i
            top += 1
        if deg[n1 + j] == 1 and top < stack.shape[0]:
            stack[top] = n1 + j
            top += 1
    return resolved == n1 + n2 - 1


def solve_transport(cnp.float64_t[::1] a, cnp.float64_t[::1] b,
                    cnp.float64_t[:, ::1] cost, basis_io=None):
    cdef Py_ssize_t n1 = a.shape[0]
    cdef Py_ssize_t n2 = b.shape[0]
    if cost.shape[0] != n1 or cost.shape[1] != n2:
        raise TransportError("cost shape does not match marginals")

    cdef cnp.ndarray[cnp.float64_t, ndim=2] X_arr = np.zeros((n1, n2))
    cdef cnp.float64_t[:, ::1] X = X_arr
    basis_arr = np.zeros((n1, n2), dtype=np.bool_)
    cdef cnp.npy_bool[:, ::1] basis = basis_arr

    cdef double suma = 0.0, sumb = 0.0, maxc = 0.0, v_
    cdef Py_ssize_t i, j, k
    for i in range(n1):
        if a[i] < 0:
            raise TransportError("marginals must be nonnegative")
        suma += a[i]
    for j in range(n2):
        if b[j] < 0:
            raise TransportError("marginals must be nonnegative")
        sumb += b[j]
    for i in range(n1):
        for j in range(n2):
            v_ = cost[i, j]
            if v_ < 0:
                v_ = -v_
            if v_ > maxc:
                maxc = v_
    if abs(suma - sumb) > 1e-9 * max(1.0, suma):
        raise TransportError("unbalanced marginals")

    cdef bint warm = False
    if basis_io is not None and basis_io.shape == (n1, n2) and basis_io.any():
        basis_arr[...] = basis_io
        warm = _flows_from_basis(a, b, basis, X)
        if not warm:
            basis_arr[...] = False
            for i in range(n1):
                for j in range(n2):
                    X[i, j] = 0.0

    # northwest-corner initial basic feasible solution
    cdef cnp.float64_t[::1] ra = np.array(a, dtype=np.float64)
    cdef cnp.float64_t[::1] rb = np.array(b, dtype=np.float64)
    cdef double t
    if not warm:
        i = 0
        j = 0
        while True:
            basis[i, j] = True
            t = ra[i] if ra[i] < rb[j] else rb[j]
            X[i, j] = t
            ra[i] -= t
            rb[j] -= t
            if i == n1 - 1 and j == n2 - 1:
                break
            if i < n1 - 1 and (ra[i] <= rb[j] or j == n2 - 1):
                i += 1
            else:
                j += 1

    cdef double tol = 1e-12 * (1.0 + maxc)
    cdef long max_pivots = 200 * (n1 + n2) * (n1 + n2) + 10000
    cdef long degenerate_streak = 0
    cdef bint use_bland = False

    cdef cnp.float64_t[::1] u = np.empty(n1)
    cdef cnp.float64_t[::1] v = np.empty(n2)
    cdef cnp.npy_bool[::1] useen = np.zeros(n1, dtype=np.bool_)
    cdef cnp.npy_bool[::1] vseen = np.zeros(n2, dtype=np.bool_)
    # traversal stack over bipartite nodes: rows are 0..n1-1, cols n1..n1+n2-1
    cdef cnp.int64_t[::1] stack = np.empty(n1 + n2, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = np.empty(n1 + n2, dtype=np.int64)
    # cycle cells, alternating sign starting at the entering cell
    cdef cnp.int64_t[::1] cyc_i = np.empty(n1 + n2 + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cyc_j = np.empty(n1 + n2 + 1, dtype=np.int64)

    cdef long pivot
    cdef Py_ssize_t top, node, ei, ej, li, lj, ci, cj, ncyc, best_i, best_j
    cdef double red, best_red, theta
    cdef bint found, improved

    for pivot in range(max_pivots):
        # duals from the basis tree: u[0] = 0, DFS over basic cells
        for i in range(n1):
            useen[i] = False
        for j in range(n2):
            vseen[j] = False
        u[0] = 0.0
        useen[0] = True
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node < n1:
                for j in range(n2):
                    if basis[node, j] and not vseen[j]:
                        v[j] = cost[node, j] - u[node]
                        vseen[j] = True
                        stack[top] = n1 + j
                        top += 1
            else:
                k = node - n1
                for i in range(n1):
                    if basis[i, k] and not useen[i]:
                        u[i] = cost[i, k] - v[k]
                        useen[i] = True
                        stack[top] = i
                        top += 1
        for i in range(n1):
            if not useen[i]:
                raise TransportError("basis tree is disconnected")
        for j in range(n2):
            if not vseen[j]:
                raise TransportError("basis tree is disconnected")

        # entering cell
        found = False
        best_red = -tol
        best_i = 0
        best_j = 0
        if use_bland:
            for i in range(n1):
                for j in range(n2):
                    red = cost[i, j] - u[i] - v[j]
                    if red < -tol:
                        best_i = i
                        best_j = j
                        found = True
                        break
                if found:
                    break
        else:
            for i in range(n1):
                for j in range(n2):
                    red = cost[i, j] - u[i] - v[j]
                    if red < best_red:
                        best_red = red
                        best_i = i
                        best_j = j
                        found = True
        if not found:
            break
        ei = best_i
        ej = best_j

        # unique tree path from row-node ei to col-node ej
        for i in range(n1):
            useen[i] = False
        for j in range(n2):
            vseen[j] = False
        useen[ei] = True
        parent[ei] = -1
        stack[0] = ei
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node == n1 + ej:
                break
            if node < n1:
                for j in range(n2):
                    if basis[node, j] and not vseen[j]:
                        vseen[j] = True
                        parent[n1 + j] = node
                        stack[top] = n1 + j
                        top += 1
            else:
                k = node - n1
                for i in range(n1):
                    if basis[i, k] and not useen[i]:
                        useen[i] = True
                        parent[i] = node
                        stack[top] = i
                        top += 1
        if not vseen[ej]:
            raise TransportError("entering cell not connected to basis tree")

        # cells along entering + path, alternating +/- from the entering cell
        cyc_i[0] = ei
        cyc_j[0] = ej
        ncyc = 1
        node = n1 + ej
        while parent[node] != -1:
            if node >= n1:
                cyc_i[ncyc] = parent[node]
                cyc_j[ncyc] = node - n1
            else:
                cyc_i[ncyc] = node
                cyc_j[ncyc] = parent[node] - n1
            ncyc += 1
            node = parent[node]

        # theta = min X over minus cells (odd positions); lexicographic ties
        theta = -1.0
        li = -1
        lj = -1
        for k in range(1, ncyc, 2):
            ci = cyc_i[k]
            cj = cyc_j[k]
            if li < 0 or X[ci, cj] < theta - 1e-15:
                theta = X[ci, cj]
                li = ci
                lj = cj
            elif X[ci, cj] <= theta + 1e-15 and (ci < li or (ci == li and cj < lj)):
                theta = X[ci, cj]
                li = ci
                lj = cj
        if li < 0:
            raise TransportError("no leaving cell (should not happen)")

        if theta <= 1e-15:
            degenerate_streak += 1
            if degenerate_streak > n1 + n2 + 10:
                use_bland = True
        else:
            degenerate_streak = 0
            use_bland = False

        for k in range(ncyc):
            ci = cyc_i[k]
            cj = cyc_j[k]
            if k % 2 == 0:
                X[ci, cj] += theta
            else:
                X[ci, cj] -= theta
        X[li, lj] = 0.0
        basis[li, lj] = False
        basis[ei, ej] = True
    else:
        raise TransportError("pivot limit exceeded")

    cdef double obj = 0.0
    for i in range(n1):
        for j in range(n2):
            if X[i, j] < 0.0:
                X[i, j] = 0.0
            obj += X[i, j] * cost[i, j]
    if basis_io is not None and basis_io.shape == (n1, n2):
        basis_io[...] = basis_arr
    return X_arr, obj
