# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled solver kernels: geometric Jonker-Volgenant assignment and an
uncapacitated primal network simplex.  Mirrors ``_py_kernels`` function for
function; selected at import by ``matchlab.transport._backend``.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

from ..errors import InternalError

cnp.import_array()

BACKEND_NAME = "compiled"


def solve_assignment_points(object xs_in, object ys_in):
    """Optimal assignment under squared Euclidean cost; costs on the fly."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] xs = \
        np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] ys = \
        np.ascontiguousarray(ys_in, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] col4row_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] row4col_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] spc_arr = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path_arr = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rem_arr = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sr_arr = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] sc_arr = np.zeros(n, dtype=np.uint8)

    cdef cnp.int64_t[::1] col4row = col4row_arr
    cdef cnp.int64_t[::1] row4col = row4col_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] spc = spc_arr
    cdef cnp.int64_t[::1] path = path_arr
    cdef cnp.int64_t[::1] remaining = rem_arr
    cdef cnp.int64_t[::1] sr = sr_arr
    cdef cnp.uint8_t[::1] sc = sc_arr
    cdef double[:, ::1] X = xs
    cdef double[:, ::1] Y = ys

    cdef Py_ssize_t cur_row, i, it, jp, index, num_remaining, sink, t, n_sr, j
    cdef double min_val, lowest, r, dx, dy, xi0, xi1, total
    cdef bint failed = False

    with nogil:
        for cur_row in range(n):
            for t in range(n):
                spc[t] = INFINITY
                remaining[t] = t
                sc[t] = 0
            num_remaining = n
            n_sr = 0
            min_val = 0.0
            i = cur_row
            sink = -1
            while sink == -1:
                sr[n_sr] = i
                n_sr += 1
                xi0 = X[i, 0]
                xi1 = X[i, 1]
                index = -1
                lowest = INFINITY
                for it in range(num_remaining):
                    jp = remaining[it]
                    dx = xi0 - Y[jp, 0]
                    dy = xi1 - Y[jp, 1]
                    r = min_val + dx * dx + dy * dy - u[i] - v[jp]
                    if r < spc[jp]:
                        path[jp] = i
                        spc[jp] = r
                    if spc[jp] < lowest or (spc[jp] == lowest and row4col[jp] == -1):
                        lowest = spc[jp]
                        index = it
                if index == -1 or lowest == INFINITY:
                    failed = True
                    break
                min_val = lowest
                jp = remaining[index]
                if row4col[jp] == -1:
                    sink = jp
                else:
                    i = row4col[jp]
                sc[jp] = 1
                num_remaining -= 1
                remaining[index] = remaining[num_remaining]
            if failed:
                break
            u[cur_row] += min_val
            for t in range(n_sr):
                i = sr[t]
                if i != cur_row:
                    u[i] += min_val - spc[col4row[i]]
            for t in range(n):
                if sc[t]:
                    v[t] -= min_val - spc[t]
            j = sink
            while True:
                i = path[j]
                row4col[j] = i
                t = col4row[i]
                col4row[i] = j
                j = t
                if i == cur_row:
                    break
        total = 0.0
        if not failed:
            for t in range(n):
                dx = X[t, 0] - Y[col4row[t], 0]
                dy = X[t, 1] - Y[col4row[t], 1]
                total += dx * dx + dy * dy
    if failed:
        raise InternalError("assignment search exhausted (unreachable)")
    return col4row_arr, total


def solve_min_cost_flow(Py_ssize_t n_nodes, object tails_in, object heads_in,
                        object costs_in, object supplies_in):
    """Primal network simplex, uncapacitated arcs, int64 costs, float supplies.
    Returns (flow per user arc, node potentials)."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tails = \
        np.ascontiguousarray(tails_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] heads = \
        np.ascontiguousarray(heads_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] costs = \
        np.ascontiguousarray(costs_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] supplies = \
        np.array(supplies_in, dtype=np.float64)

    cdef Py_ssize_t m = tails.shape[0]
    cdef Py_ssize_t root = n_nodes
    cdef Py_ssize_t n_all = n_nodes + 1
    cdef Py_ssize_t m_all = m + n_nodes

    cdef double imbalance = 0.0
    cdef Py_ssize_t i_max = 0
    cdef Py_ssize_t i
    for i in range(n_nodes):
        imbalance += supplies[i]
        if abs(supplies[i]) > abs(supplies[i_max]):
            i_max = i
    if n_nodes:
        supplies[i_max] -= imbalance

    cdef cnp.int64_t max_c = 0
    for i in range(m):
        if costs[i] > max_c:
            max_c = costs[i]
        elif -costs[i] > max_c:
            max_c = -costs[i]
    cdef cnp.int64_t art_cost = (max_c + 1) * (<cnp.int64_t> n_nodes + 1)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] tail_arr = np.empty(m_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] head_arr = np.empty(m_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cost_arr = np.empty(m_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flow_arr = np.zeros(m_all)
    cdef cnp.int64_t[::1] tail = tail_arr
    cdef cnp.int64_t[::1] head = head_arr
    cdef cnp.int64_t[::1] cost = cost_arr
    cdef double[::1] flow = flow_arr

    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent_arr = np.full(n_all, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pred_arr = np.full(n_all, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] thread_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rev_thread_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] succ_arr = np.ones(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] last_arr = np.arange(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pi_arr = np.zeros(n_all, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef cnp.int64_t[::1] pred_arc = pred_arr
    cdef cnp.int64_t[::1] thread = thread_arr
    cdef cnp.int64_t[::1] rev_thread = rev_thread_arr
    cdef cnp.int64_t[::1] succ_num = succ_arr
    cdef cnp.int64_t[::1] last_succ = last_arr
    cdef cnp.int64_t[::1] pi = pi_arr

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] in_tree_arr = np.zeros(m_all, dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_tree = in_tree_arr

    # scratch for subtree surgery
    cdef cnp.ndarray[cnp.int64_t, ndim=1] nodes_s_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] in_s_arr = np.zeros(n_all, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_head_arr = np.full(n_all, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_next_arr = np.empty(2 * n_all + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_node_arr = np.empty(2 * n_all + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_arc_arr = np.empty(2 * n_all + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_node_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_par_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_arc_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] new_order_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pos_in_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sz_arr = np.empty(n_all, dtype=np.int64)
    cdef cnp.int64_t[::1] nodes_s = nodes_s_arr
    cdef cnp.uint8_t[::1] in_s = in_s_arr
    cdef cnp.int64_t[::1] adj_head = adj_head_arr
    cdef cnp.int64_t[::1] adj_next = adj_next_arr
    cdef cnp.int64_t[::1] adj_node = adj_node_arr
    cdef cnp.int64_t[::1] adj_arc = adj_arc_arr
    cdef cnp.int64_t[::1] stack_node = stack_node_arr
    cdef cnp.int64_t[::1] stack_par = stack_par_arr
    cdef cnp.int64_t[::1] stack_arc = stack_arc_arr
    cdef cnp.int64_t[::1] new_order = new_order_arr
    cdef cnp.int64_t[::1] pos_in = pos_in_arr
    cdef cnp.int64_t[::1] sz = sz_arr

    cdef Py_ssize_t a
    for i in range(m):
        tail[i] = tails[i]
        head[i] = heads[i]
        cost[i] = costs[i]
    for i in range(n_nodes):
        a = m + i
        if supplies[i] >= 0.0:
            tail[a] = i
            head[a] = root
            pi[i] = -art_cost
        else:
            tail[a] = root
            head[a] = i
            pi[i] = art_cost
        cost[a] = art_cost
        flow[a] = supplies[i] if supplies[i] >= 0.0 else -supplies[i]
        parent[i] = root
        pred_arc[i] = a
        in_tree[a] = 1

    # cyclic preorder thread root -> 0 -> ... -> n-1 -> root
    if n_nodes:
        thread[root] = 0
        rev_thread[0] = root
        for i in range(n_nodes - 1):
            thread[i] = i + 1
            rev_thread[i + 1] = i
        thread[n_nodes - 1] = root
        rev_thread[root] = n_nodes - 1
        last_succ[root] = n_nodes - 1
    else:
        thread[root] = root
        rev_thread[root] = root
    succ_num[root] = n_all

    cdef Py_ssize_t block = 64
    while block * block < m_all:
        block += block
    cdef Py_ssize_t pos = 0, scanned, hi, enter, leave_node, leave_arc
    cdef cnp.int64_t best, rc
    cdef Py_ssize_t u_node, v_node, apex, an, bn, x, y
    cdef double delta
    cdef Py_ssize_t pivots = 0
    cdef Py_ssize_t max_pivots = 200 * m_all + 2000000
    cdef Py_ssize_t size_s, t, w, nd, par, arc, nb, e_ptr, q, r_out, tail_s, nxt, before, after, anc
    cdef cnp.int64_t shift
    cdef Py_ssize_t stack_top
    cdef double art_max, supply_scale
    cdef bint overrun = False, unbounded = False, lost = False

    with nogil:
        while True:
            # entering arc: most negative reduced cost in the first block
            # (rolling cursor) that contains any negative arc
            enter = -1
            best = 0
            scanned = 0
            while scanned < m_all:
                hi = pos + block
                if hi > m_all:
                    hi = m_all
                for i in range(pos, hi):
                    if not in_tree[i]:
                        rc = cost[i] + pi[tail[i]] - pi[head[i]]
                        if rc < best:
                            best = rc
                            enter = i
                scanned += hi - pos
                pos = hi if hi < m_all else 0
                if enter != -1:
                    break
            if enter == -1:
                break
            pivots += 1
            if pivots > max_pivots:
                overrun = True
                break

            u_node = tail[enter]
            v_node = head[enter]
            an = u_node
            bn = v_node
            while an != bn:
                if succ_num[an] < succ_num[bn]:
                    an = parent[an]
                else:
                    bn = parent[bn]
            apex = an

            delta = INFINITY
            leave_node = -1
            x = u_node
            while x != apex:
                arc = pred_arc[x]
                if tail[arc] == x:
                    if flow[arc] < delta:
                        delta = flow[arc]
                        leave_node = x
                x = parent[x]
            y = v_node
            while y != apex:
                arc = pred_arc[y]
                if tail[arc] != y:
                    if flow[arc] <= delta:
                        delta = flow[arc]
                        leave_node = y
                y = parent[y]
            if leave_node == -1:
                unbounded = True
                break

            if delta != 0.0:
                flow[enter] += delta
                x = u_node
                while x != apex:
                    arc = pred_arc[x]
                    if tail[arc] == x:
                        flow[arc] -= delta
                    else:
                        flow[arc] += delta
                    x = parent[x]
                y = v_node
                while y != apex:
                    arc = pred_arc[y]
                    if tail[arc] == y:
                        flow[arc] += delta
                    else:
                        flow[arc] -= delta
                    y = parent[y]

            leave_arc = pred_arc[leave_node]
            flow[leave_arc] = 0.0

            # ---- tree surgery ----
            size_s = succ_num[leave_node]
            nd = leave_node
            for t in range(size_s):
                nodes_s[t] = nd
                in_s[nd] = 1
                nd = thread[nd]
            tail_s = nodes_s[size_s - 1]

            if in_s[u_node]:
                q = u_node
                r_out = v_node
                shift = -(cost[enter] + pi[u_node] - pi[v_node])
            else:
                q = v_node
                r_out = u_node
                shift = cost[enter] + pi[u_node] - pi[v_node]

            before = rev_thread[leave_node]
            after = thread[tail_s]
            thread[before] = after
            rev_thread[after] = before
            anc = parent[leave_node]
            while anc != -1:
                succ_num[anc] -= size_s
                if last_succ[anc] == tail_s:
                    last_succ[anc] = before
                anc = parent[anc]

            # adjacency of S's tree arcs (linked lists over scratch buffers)
            for t in range(size_s):
                adj_head[nodes_s[t]] = -1
            e_ptr = 0
            for t in range(size_s):
                nd = nodes_s[t]
                if nd != leave_node:
                    par = parent[nd]
                    arc = pred_arc[nd]
                    adj_node[e_ptr] = nd
                    adj_arc[e_ptr] = arc
                    adj_next[e_ptr] = adj_head[par]
                    adj_head[par] = e_ptr
                    e_ptr += 1
                    adj_node[e_ptr] = par
                    adj_arc[e_ptr] = arc
                    adj_next[e_ptr] = adj_head[nd]
                    adj_head[nd] = e_ptr
                    e_ptr += 1

            # DFS re-root at q
            stack_node[0] = q
            stack_par[0] = r_out
            stack_arc[0] = enter
            stack_top = 1
            w = 0
            in_s[q] = 2  # visited marker
            while stack_top:
                stack_top -= 1
                nd = stack_node[stack_top]
                par = stack_par[stack_top]
                arc = stack_arc[stack_top]
                parent[nd] = par
                pred_arc[nd] = arc
                new_order[w] = nd
                pos_in[nd] = w
                w += 1
                e_ptr = adj_head[nd]
                while e_ptr != -1:
                    nb = adj_node[e_ptr]
                    if in_s[nb] == 1:
                        in_s[nb] = 2
                        stack_node[stack_top] = nb
                        stack_par[stack_top] = nd
                        stack_arc[stack_top] = adj_arc[e_ptr]
                        stack_top += 1
                    e_ptr = adj_next[e_ptr]
            if w != size_s:
                lost = True
                break

            for t in range(size_s):
                sz[t] = 1
            for t in range(size_s - 1, 0, -1):
                nd = new_order[t]
                sz[pos_in[parent[nd]]] += sz[t]
            for t in range(size_s):
                nd = new_order[t]
                succ_num[nd] = sz[t]
                last_succ[nd] = new_order[t + sz[t] - 1]

            for t in range(size_s - 1):
                thread[new_order[t]] = new_order[t + 1]
                rev_thread[new_order[t + 1]] = new_order[t]
            tail_s = new_order[size_s - 1]
            nxt = thread[r_out]
            thread[r_out] = q
            rev_thread[q] = r_out
            thread[tail_s] = nxt
            rev_thread[nxt] = tail_s

            anc = r_out
            while anc != -1:
                succ_num[anc] += size_s
                if last_succ[anc] == r_out:
                    last_succ[anc] = tail_s
                anc = parent[anc]

            for t in range(size_s):
                nd = nodes_s[t]
                pi[nd] += shift
                in_s[nd] = 0
            in_tree[enter] = 1
            in_tree[leave_arc] = 0

        # feasibility: artificial arcs must be empty
        art_max = 0.0
        supply_scale = 1.0
        for i in range(n_nodes):
            if flow[m + i] > art_max:
                art_max = flow[m + i]
            supply_scale += supplies[i] if supplies[i] >= 0.0 else -supplies[i]

    if overrun:
        raise InternalError("network simplex exceeded pivot budget")
    if unbounded:
        raise InternalError("unbounded augmenting cycle (nonnegative costs?)")
    if lost:
        raise InternalError("subtree rebuild lost nodes")
    if art_max > 1e-9 * supply_scale:
        raise InternalError("infeasible flow: artificial arc carries mass")
    return flow_arr[:m].copy(), pi_arr[:n_nodes].copy()
