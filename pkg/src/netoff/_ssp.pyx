# cython: language_level=3
"""Compiled minimum-cost max-flow kernel.

Identical algorithm to netoff._ssp_py (the pure-Python twin): successive
shortest paths with potentials, exhausting each cost level with Dinic
blocking flows over the zero-reduced-cost arcs. Arc ordering, tie-breaking
and integer arithmetic match the twin exactly, so both backends return
identical flows. Keep the two files in sync.
"""

import numpy as np

cimport cython

DEF INF = 0x3FFFFFFFFFFFFFFF


@cython.boundscheck(False)
@cython.wraparound(False)
def solve_min_cost_flow(node_count, tails_in, heads_in, caps_in, costs_in, source, sink):
    """Send the maximum flow from ``source`` to ``sink`` at minimum total cost.

    Returns ``(flows, total_flow, total_cost)`` with per-input-arc flows.
    """
    cdef long long[::1] tails = np.ascontiguousarray(tails_in, dtype=np.int64)
    cdef long long[::1] heads = np.ascontiguousarray(heads_in, dtype=np.int64)
    cdef long long[::1] caps = np.ascontiguousarray(caps_in, dtype=np.int64)
    cdef long long[::1] costs = np.ascontiguousarray(costs_in, dtype=np.int64)
    cdef Py_ssize_t n = node_count
    cdef Py_ssize_t m = tails.shape[0]
    cdef Py_ssize_t s = source
    cdef Py_ssize_t t = sink

    _validate(n, tails, heads, caps, costs, s, t)

    # residual arcs: forward arc k -> id 2k, its reverse -> id 2k+1 (twin = id^1)
    cdef long long[::1] to = np.empty(2 * m, dtype=np.int64)
    cdef long long[::1] rescap = np.empty(2 * m, dtype=np.int64)
    cdef long long[::1] rcost = np.empty(2 * m, dtype=np.int64)
    cdef Py_ssize_t k
    for k in range(m):
        to[2 * k] = heads[k]
        rescap[2 * k] = caps[k]
        rcost[2 * k] = costs[k]
        to[2 * k + 1] = tails[k]
        rescap[2 * k + 1] = 0
        rcost[2 * k + 1] = -costs[k]

    # per-node adjacency: forward arcs (input order), then reverse arcs (input order)
    cdef long long[::1] adj_start = np.zeros(n + 1, dtype=np.int64)
    cdef Py_ssize_t v, u
    for k in range(m):
        adj_start[tails[k] + 1] += 1
        adj_start[heads[k] + 1] += 1
    for v in range(n):
        adj_start[v + 1] += adj_start[v]
    cdef long long[::1] adj = np.empty(2 * m, dtype=np.int64)
    cdef long long[::1] fill = np.empty(n, dtype=np.int64)
    for v in range(n):
        fill[v] = adj_start[v]
    for k in range(m):
        u = tails[k]
        adj[fill[u]] = 2 * k
        fill[u] += 1
    for k in range(m):
        v = heads[k]
        adj[fill[v]] = 2 * k + 1
        fill[v] += 1

    cdef long long[::1] pot = np.zeros(n, dtype=np.int64)
    cdef long long[::1] dist = np.empty(n, dtype=np.int64)
    cdef long long[::1] heap = np.empty(2 * m + 4, dtype=np.int64)
    cdef long long[::1] level = np.empty(n, dtype=np.int64)
    cdef long long[::1] queue = np.empty(n, dtype=np.int64)
    cdef long long[::1] cur = np.empty(n, dtype=np.int64)
    cdef long long[::1] node_stack = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] arc_stack = np.empty(n + 1, dtype=np.int64)

    cdef long long total_flow = 0
    cdef Py_ssize_t heap_size, idx, depth, i, qhead, qtail
    cdef long long key, d, nd, a, p, pushed, pot_u, want
    cdef bint found

    while True:
        # Dijkstra over reduced costs; keys pack (distance << 32) | node
        for v in range(n):
            dist[v] = INF
        dist[s] = 0
        heap[0] = s
        heap_size = 1
        while heap_size > 0:
            key = _heap_pop(heap, &heap_size)
            d = key >> 32
            u = key & 0xFFFFFFFF
            if d > dist[u]:
                continue
            pot_u = pot[u]
            for idx in range(adj_start[u], adj_start[u + 1]):
                a = adj[idx]
                if rescap[a] <= 0:
                    continue
                v = to[a]
                nd = d + rcost[a] + pot_u - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    _heap_push(heap, &heap_size, (nd << 32) | v)
        if dist[t] >= INF:
            break
        for v in range(n):
            if dist[v] < INF:
                pot[v] += dist[v]

        # exhaust every augmenting path of the current cost: repeated
        # blocking flows over the tight arcs until the sink drops out
        while True:
            # BFS levels over zero-reduced-cost residual arcs
            for v in range(n):
                level[v] = -1
            level[s] = 0
            queue[0] = s
            qhead = 0
            qtail = 1
            while qhead < qtail:
                u = queue[qhead]
                qhead += 1
                pot_u = pot[u]
                want = level[u] + 1
                for idx in range(adj_start[u], adj_start[u + 1]):
                    a = adj[idx]
                    if rescap[a] <= 0:
                        continue
                    v = to[a]
                    if level[v] >= 0:
                        continue
                    if rcost[a] + pot_u - pot[v] != 0:
                        continue
                    level[v] = want
                    queue[qtail] = v
                    qtail += 1
            if level[t] < 0:
                break

            # Dinic augmentation on the level graph
            for v in range(n):
                cur[v] = adj_start[v]
            node_stack[0] = s
            depth = 0  # arcs on the stack; nodes on stack = depth + 1
            pushed = 0
            while True:
                u = node_stack[depth]
                if u == t:
                    p = INF
                    for i in range(depth):
                        if rescap[arc_stack[i]] < p:
                            p = rescap[arc_stack[i]]
                    for i in range(depth):
                        rescap[arc_stack[i]] -= p
                        rescap[arc_stack[i] ^ 1] += p
                    pushed += p
                    # retreat to the tail of the first saturated arc
                    i = 0
                    while rescap[arc_stack[i]] > 0:
                        i += 1
                    depth = i
                    continue
                found = False
                pot_u = pot[u]
                want = level[u] + 1
                while cur[u] < adj_start[u + 1]:
                    a = adj[cur[u]]
                    v = to[a]
                    if (rescap[a] > 0 and level[v] == want
                            and rcost[a] + pot_u - pot[v] == 0):
                        found = True
                        break
                    cur[u] += 1
                if found:
                    depth += 1
                    node_stack[depth] = v
                    arc_stack[depth - 1] = a
                else:
                    level[u] = -1  # prune: nothing admissible leaves here any more
                    if depth == 0:
                        break
                    depth -= 1
                    cur[node_stack[depth]] += 1
            if pushed == 0:
                raise AssertionError("level graph reached the sink but nothing augmented")
            total_flow += pushed

    flows = np.empty(m, dtype=np.int64)
    cdef long long[::1] flows_view = flows
    cdef long long total_cost = 0
    for k in range(m):
        flows_view[k] = rescap[2 * k + 1]
        total_cost += flows_view[k] * costs[k]
    return flows, int(total_flow), int(total_cost)


@cython.boundscheck(False)
@cython.wraparound(False)
cdef inline void _heap_push(long long[::1] heap, Py_ssize_t* size, long long key):
    cdef Py_ssize_t pos = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while pos > 0:
        parent = (pos - 1) >> 1
        if heap[parent] <= key:
            break
        heap[pos] = heap[parent]
        pos = parent
    heap[pos] = key


@cython.boundscheck(False)
@cython.wraparound(False)
cdef inline long long _heap_pop(long long[::1] heap, Py_ssize_t* size):
    cdef long long top = heap[0]
    cdef long long last
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t child
    size[0] -= 1
    last = heap[size[0]]
    while True:
        child = 2 * pos + 1
        if child >= size[0]:
            break
        if child + 1 < size[0] and heap[child + 1] < heap[child]:
            child += 1
        if heap[child] >= last:
            break
        heap[pos] = heap[child]
        pos = child
    heap[pos] = last
    return top


cdef _validate(Py_ssize_t n, long long[::1] tails, long long[::1] heads,
               long long[::1] caps, long long[::1] costs,
               Py_ssize_t source, Py_ssize_t sink):
    cdef Py_ssize_t k
    cdef long long pu = -1, pv = -1, max_cost = 0
    if not (0 <= source < n and 0 <= sink < n and source != sink):
        raise ValueError("source/sink out of range")
    for k in range(tails.shape[0]):
        if not (0 <= tails[k] < n and 0 <= heads[k] < n):
            raise ValueError(f"arc {k} endpoint out of range")
        if caps[k] < 0:
            raise ValueError(f"arc {k} has negative capacity")
        if costs[k] < 0:
            raise ValueError(f"arc {k} has negative cost")
        if costs[k] > max_cost:
            max_cost = costs[k]
        if tails[k] < pu or (tails[k] == pu and heads[k] < pv):
            raise ValueError("arcs must be sorted by (tail, head)")
        pu = tails[k]
        pv = heads[k]
    # distances pack into (dist << 32 | node); keep them below 2**31
    if n > 1 and (n - 1) * max_cost >= (<long long> 1) << 31:
        raise ValueError("path costs too large for packed Dijkstra keys")
