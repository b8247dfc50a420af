"""Pure-Python minimum-cost max-flow kernel.

Successive shortest paths with node potentials. Each Dijkstra phase fixes
the current shortest reduced cost; all augmenting paths of that cost are
then exhausted at once by Dinic-style blocking flows over the zero-
reduced-cost arcs (BFS levels, then depth-first augmentation with
current-arc pruning). Dijkstra runs again only when no tight path is
left, so the path cost strictly increases between phases.

This module is the fallback twin of the compiled kernel in ``_ssp.pyx``;
the two implement identical logic (same arc ordering, same tie-breaking,
same integer arithmetic) and must produce identical flows. Keep them in
sync.

Kernel contract
---------------
Arcs are given as parallel arrays (tail, head, capacity, cost), sorted by
(tail, head). Capacities and costs are nonnegative integers; path costs
must stay below 2**31 so Dijkstra keys can pack (distance, node) into one
integer, which is what makes heap ordering deterministic.

Determinism: the result is a pure function of the input arrays. Arc lists
are scanned per node in a fixed order (forward arcs by input position,
then reverse arcs by input position), the heap orders equal distances by
node index, and labels change only on strict improvement.
"""

from __future__ import annotations

import heapq

import numpy as np

INF = 1 << 62


def solve_min_cost_flow(node_count, tails, heads, caps, costs, source, sink):
    """Send the maximum flow from ``source`` to ``sink`` at minimum total cost.

    Returns ``(flows, total_flow, total_cost)`` where ``flows[k]`` is the
    flow on input arc ``k``.
    """
    n = int(node_count)
    tails = [int(x) for x in tails]
    heads = [int(x) for x in heads]
    caps = [int(x) for x in caps]
    costs = [int(x) for x in costs]
    source = int(source)
    sink = int(sink)
    m = len(tails)
    _validate(n, tails, heads, caps, costs, source, sink)

    # residual arcs: forward arc k -> id 2k, its reverse -> id 2k+1 (twin = id^1)
    to = [0] * (2 * m)
    rescap = [0] * (2 * m)
    rcost = [0] * (2 * m)
    for k in range(m):
        to[2 * k] = heads[k]
        rescap[2 * k] = caps[k]
        rcost[2 * k] = costs[k]
        to[2 * k + 1] = tails[k]
        rcost[2 * k + 1] = -costs[k]

    # per-node adjacency: forward arcs (input order), then reverse arcs (input order)
    adj_start = [0] * (n + 1)
    for k in range(m):
        adj_start[tails[k] + 1] += 1
        adj_start[heads[k] + 1] += 1
    for v in range(n):
        adj_start[v + 1] += adj_start[v]
    adj = [0] * (2 * m)
    fill = list(adj_start[:n])
    for k in range(m):
        u = tails[k]
        adj[fill[u]] = 2 * k
        fill[u] += 1
    for k in range(m):
        v = heads[k]
        adj[fill[v]] = 2 * k + 1
        fill[v] += 1

    pot = [0] * n
    total_flow = 0

    while True:
        # Dijkstra over reduced costs; keys pack (distance << 32) | node
        dist = [INF] * n
        dist[source] = 0
        heap = [source]
        while heap:
            key = heapq.heappop(heap)
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
                    heapq.heappush(heap, (nd << 32) | v)
        if dist[sink] >= INF:
            break
        for v in range(n):
            if dist[v] < INF:
                pot[v] += dist[v]

        # exhaust every augmenting path of the current cost: repeated
        # blocking flows over the tight arcs until the sink drops out
        while True:
            level = _tight_levels(n, adj_start, adj, to, rescap, rcost, pot, source)
            if level[sink] < 0:
                break
            pushed = _blocking_flow(
                n, adj_start, adj, to, rescap, rcost, pot, level, source, sink
            )
            if pushed == 0:
                raise AssertionError("level graph reached the sink but nothing augmented")
            total_flow += pushed

    flows = np.empty(m, dtype=np.int64)
    total_cost = 0
    for k in range(m):
        f = rescap[2 * k + 1]
        flows[k] = f
        total_cost += f * costs[k]
    return flows, total_flow, total_cost


def _tight_levels(n, adj_start, adj, to, rescap, rcost, pot, source):
    """BFS distance (in hops) from the source over zero-reduced-cost arcs."""
    level = [-1] * n
    level[source] = 0
    queue = [source]
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        pot_u = pot[u]
        next_level = level[u] + 1
        for idx in range(adj_start[u], adj_start[u + 1]):
            a = adj[idx]
            if rescap[a] <= 0:
                continue
            v = to[a]
            if level[v] >= 0 or rcost[a] + pot_u - pot[v] != 0:
                continue
            level[v] = next_level
            queue.append(v)
    return level


def _blocking_flow(n, adj_start, adj, to, rescap, rcost, pot, level, source, sink):
    """Dinic augmentation on the level graph of tight arcs."""
    cur = list(adj_start[:n])
    node_stack = [source]
    arc_stack = []
    pushed = 0
    while node_stack:
        u = node_stack[-1]
        if u == sink:
            p = min(rescap[a] for a in arc_stack)
            for a in arc_stack:
                rescap[a] -= p
                rescap[a ^ 1] += p
            pushed += p
            # retreat to the tail of the first saturated arc
            i = 0
            while rescap[arc_stack[i]] > 0:
                i += 1
            del arc_stack[i:]
            del node_stack[i + 1 :]
            continue
        found = False
        pot_u = pot[u]
        want = level[u] + 1
        while cur[u] < adj_start[u + 1]:
            a = adj[cur[u]]
            v = to[a]
            if (
                rescap[a] > 0
                and level[v] == want
                and rcost[a] + pot_u - pot[v] == 0
            ):
                node_stack.append(v)
                arc_stack.append(a)
                found = True
                break
            cur[u] += 1
        if not found:
            level[u] = -1  # prune: nothing admissible leaves here any more
            node_stack.pop()
            if node_stack:
                arc_stack.pop()
                cur[node_stack[-1]] += 1
    return pushed


def _validate(n, tails, heads, caps, costs, source, sink):
    if not (0 <= source < n and 0 <= sink < n and source != sink):
        raise ValueError("source/sink out of range")
    prev = (-1, -1)
    max_cost = 0
    for k in range(len(tails)):
        u, v = tails[k], heads[k]
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"arc {k} endpoint out of range")
        if caps[k] < 0:
            raise ValueError(f"arc {k} has negative capacity")
        if costs[k] < 0:
            raise ValueError(f"arc {k} has negative cost")
        if costs[k] > max_cost:
            max_cost = costs[k]
        if (u, v) < prev:
            raise ValueError("arcs must be sorted by (tail, head)")
        prev = (u, v)
    # distances pack into (dist << 32 | node); keep them below 2**31
    if n > 1 and (n - 1) * max_cost >= 1 << 31:
        raise ValueError("path costs too large for packed Dijkstra keys")
