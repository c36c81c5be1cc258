"""Pure-Python solver kernels: reference implementations of the assignment
and min-cost-flow cores.  The compiled module ``_kernels`` mirrors these
function-for-function; this module is the fallback selected at import when
the extension is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InternalError

BACKEND_NAME = "python"


# ---------------------------------------------------------------------------
# assignment: shortest augmenting path (Jonker-Volgenant class), squared
# Euclidean costs computed on the fly from the two point arrays.
# ---------------------------------------------------------------------------

def solve_assignment_points(xs: np.ndarray, ys: np.ndarray):
    """Optimal assignment of rows (points xs) to columns (points ys) under
    squared Euclidean cost.  Returns (col4row, total_cost)."""
    n = len(xs)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    yx = ys[:, 0]
    yy = ys[:, 1]

    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(n, -1, dtype=np.int64)

    spc = np.empty(n)
    path = np.empty(n, dtype=np.int64)
    remaining_mask = np.empty(n, dtype=bool)
    sr_rows: list[int] = []

    for cur_row in range(n):
        spc.fill(np.inf)
        remaining_mask.fill(True)
        sr_rows.clear()
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            sr_rows.append(i)
            dx = xs[i, 0] - yx
            dy = xs[i, 1] - yy
            cost_row = dx * dx + dy * dy
            r = min_val + cost_row - u[i] - v
            better = remaining_mask & (r < spc)
            spc[better] = r[better]
            path[better] = i
            masked = np.where(remaining_mask, spc, np.inf)
            lowest = masked.min()
            if not np.isfinite(lowest):
                raise InternalError("assignment search exhausted (unreachable)")
            ties = np.nonzero(masked == lowest)[0]
            free_ties = ties[row4col[ties] == -1]
            jp = int(free_ties[-1]) if len(free_ties) else int(ties[0])
            min_val = lowest
            remaining_mask[jp] = False
            if row4col[jp] == -1:
                sink = jp
            else:
                i = int(row4col[jp])
        # dual updates
        u[cur_row] += min_val
        for ip in sr_rows:
            if ip != cur_row:
                u[ip] += min_val - spc[col4row[ip]]
        scanned = ~remaining_mask
        v[scanned] -= min_val - spc[scanned]
        # augment along the alternating path
        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break

    diff = xs - ys[col4row]
    total = float(np.einsum("ij,ij->", diff, diff))
    return col4row.copy(), total


# ---------------------------------------------------------------------------
# min-cost flow: primal network simplex on uncapacitated arcs, integer costs,
# real-valued supplies, strongly feasible trees (last-blocking-arc rule).
# ---------------------------------------------------------------------------

def solve_min_cost_flow(n_nodes: int, tails, heads, costs, supplies):
    """Exact min-cost flow. ``costs`` are int64, ``supplies`` float64 summing
    to ~0 (positive = source). Returns (flow per arc, node potentials)."""
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    costs = np.asarray(costs, dtype=np.int64)
    supplies = np.asarray(supplies, dtype=np.float64).copy()
    m = len(tails)
    if len(heads) != m or len(costs) != m:
        raise InternalError("arc arrays must have equal length")

    # force exact balance (caller guarantees |imbalance| tiny)
    imbalance = supplies.sum()
    supplies[int(np.argmax(np.abs(supplies)))] -= imbalance

    root = n_nodes
    n_all = n_nodes + 1
    m_all = m + n_nodes
    max_c = int(np.max(np.abs(costs))) if m else 0
    art_cost = (max_c + 1) * (n_nodes + 1)

    tail = np.empty(m_all, dtype=np.int64)
    head = np.empty(m_all, dtype=np.int64)
    cost = np.empty(m_all, dtype=np.int64)
    flow = np.zeros(m_all, dtype=np.float64)
    tail[:m] = tails
    head[:m] = heads
    cost[:m] = costs

    parent = np.full(n_all, -1, dtype=np.int64)
    pred_arc = np.full(n_all, -1, dtype=np.int64)
    thread = np.empty(n_all, dtype=np.int64)
    rev_thread = np.empty(n_all, dtype=np.int64)
    succ_num = np.ones(n_all, dtype=np.int64)
    last_succ = np.arange(n_all, dtype=np.int64)
    pi = np.zeros(n_all, dtype=np.int64)

    for i in range(n_nodes):
        a = m + i
        if supplies[i] >= 0.0:
            tail[a], head[a] = i, root
            pi[i] = -art_cost
        else:
            tail[a], head[a] = root, i
            pi[i] = art_cost
        cost[a] = art_cost
        flow[a] = abs(supplies[i])
        parent[i] = root
        pred_arc[i] = a

    # initial thread: root -> 0 -> 1 -> ... -> n-1 -> root (cyclic preorder)
    order = [root] + list(range(n_nodes))
    for idx, node in enumerate(order):
        nxt = order[(idx + 1) % n_all]
        thread[node] = nxt
        rev_thread[nxt] = node
    succ_num[root] = n_all
    last_succ[root] = n_nodes - 1 if n_nodes else root

    in_tree = np.zeros(m_all, dtype=bool)
    in_tree[m:] = True

    block = max(64, int(math.isqrt(m_all)) + 1)
    pos = 0
    pivots = 0
    max_pivots = 200 * m_all + 2_000_000

    while True:
        # entering arc: most negative reduced cost within a block scan
        enter = -1
        best = 0
        scanned = 0
        while scanned < m_all:
            hi = min(pos + block, m_all)
            idx = np.arange(pos, hi)
            cand = idx[~in_tree[idx]]
            if len(cand):
                rc = cost[cand] + pi[tail[cand]] - pi[head[cand]]
                k = int(np.argmin(rc))
                if rc[k] < best:
                    best = int(rc[k])
                    enter = int(cand[k])
            scanned += hi - pos
            pos = hi if hi < m_all else 0
            if enter != -1:
                break
        if enter == -1:
            break

        pivots += 1
        if pivots > max_pivots:
            raise InternalError("network simplex exceeded pivot budget")

        u_node = int(tail[enter])
        v_node = int(head[enter])
        # apex via subtree-size walk
        a, b = u_node, v_node
        while a != b:
            if succ_num[a] < succ_num[b]:
                a = int(parent[a])
            else:
                b = int(parent[b])
        apex = a

        # leaving arc: min residual along the cycle, last-blocking tie-break
        delta = math.inf
        leave_node = -1
        x = u_node
        while x != apex:
            arc = int(pred_arc[x])
            if tail[arc] == x:  # points up; augmentation (apex->u dir) drains it
                if flow[arc] < delta:
                    delta = flow[arc]
                    leave_node = x
            x = int(parent[x])
        y = v_node
        while y != apex:
            arc = int(pred_arc[y])
            if tail[arc] != y:  # points down; augmentation (v->apex dir) drains it
                if flow[arc] <= delta:
                    delta = flow[arc]
                    leave_node = y
            y = int(parent[y])
        if leave_node == -1:
            raise InternalError("unbounded augmenting cycle (nonnegative costs?)")

        # augment
        if delta != 0.0:
            flow[enter] += delta
            x = u_node
            while x != apex:
                arc = int(pred_arc[x])
                flow[arc] += -delta if tail[arc] == x else delta
                x = int(parent[x])
            y = v_node
            while y != apex:
                arc = int(pred_arc[y])
                flow[arc] += delta if tail[arc] == y else -delta
                y = int(parent[y])

        leave_arc = int(pred_arc[leave_node])
        flow[leave_arc] = 0.0

        # tree update: detach subtree S rooted at leave_node, re-root at the
        # entering endpoint inside S, reattach under the outside endpoint.
        z_child = leave_node
        z_parent = int(parent[z_child])
        size_s = int(succ_num[z_child])

        nodes_s = np.empty(size_s, dtype=np.int64)
        node = z_child
        for t in range(size_s):
            nodes_s[t] = node
            node = int(thread[node])
        last_s_old = int(nodes_s[-1])

        in_s = np.zeros(n_all, dtype=bool)
        in_s[nodes_s] = True
        if in_s[u_node]:
            q, r_out = u_node, v_node
            shift = -(int(cost[enter]) + int(pi[u_node]) - int(pi[v_node]))
        else:
            q, r_out = v_node, u_node
            shift = int(cost[enter]) + int(pi[u_node]) - int(pi[v_node])

        # splice S out of the thread
        before = int(rev_thread[z_child])
        after = int(thread[last_s_old])
        thread[before] = after
        rev_thread[after] = before
        anc = z_parent
        while anc != -1:
            succ_num[anc] -= size_s
            if last_succ[anc] == last_s_old:
                last_succ[anc] = before
            anc = int(parent[anc])

        # rebuild S rooted at q (DFS over its tree arcs)
        adj: dict[int, list[tuple[int, int]]] = {int(nd): [] for nd in nodes_s}
        for nd in nodes_s:
            nd = int(nd)
            if nd != z_child:
                p = int(parent[nd])
                arc = int(pred_arc[nd])
                adj[nd].append((p, arc))
                adj[p].append((nd, arc))
        new_order = np.empty(size_s, dtype=np.int64)
        stack = [(q, r_out, enter)]
        seen = {q}
        w = 0
        # iterative DFS preserving child discovery order
        while stack:
            nd, par, arc = stack.pop()
            parent[nd] = par
            pred_arc[nd] = arc
            new_order[w] = nd
            w += 1
            for nb, nb_arc in reversed(adj[nd]):
                if nb not in seen:
                    seen.add(nb)
                    stack.append((nb, nd, nb_arc))
        if w != size_s:
            raise InternalError("subtree rebuild lost nodes")

        # subtree sizes and last-succ within S from reverse preorder
        pos_in = {int(nd): t for t, nd in enumerate(new_order)}
        sz = np.ones(size_s, dtype=np.int64)
        for t in range(size_s - 1, 0, -1):
            nd = int(new_order[t])
            sz[pos_in[int(parent[nd])]] += sz[t]
        for t in range(size_s):
            nd = int(new_order[t])
            succ_num[nd] = sz[t]
            last_succ[nd] = new_order[t + sz[t] - 1]

        # thread S back in right after r_out, as its first child
        for t in range(size_s - 1):
            thread[int(new_order[t])] = int(new_order[t + 1])
            rev_thread[int(new_order[t + 1])] = int(new_order[t])
        tail_s = int(new_order[-1])
        nxt = int(thread[r_out])
        thread[r_out] = q
        rev_thread[q] = r_out
        thread[tail_s] = nxt
        rev_thread[nxt] = tail_s

        anc = r_out
        while anc != -1:
            succ_num[anc] += size_s
            if last_succ[anc] == r_out:
                last_succ[anc] = tail_s
            anc = int(parent[anc])

        pi[nodes_s] += shift
        in_tree[enter] = True
        in_tree[leave_arc] = False

    # artificial arcs must end up empty on feasible instances
    art_flow = flow[m:]
    scale = max(1.0, float(np.abs(supplies).sum()))
    if art_flow.size and float(art_flow.max(initial=0.0)) > 1e-9 * scale:
        raise InternalError("infeasible flow: artificial arc carries mass")
    return flow[:m].copy(), pi[:n_nodes].copy()
