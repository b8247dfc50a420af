"""Minimum-cost flow over a liability matrix.

Turns a liability matrix and its net positions into a flow instance with a
synthetic source feeding every net debtor and a synthetic sink draining
every net creditor, then finds the cheapest way to carry the required flow
(the net internal debt) through the obligations. The arc flows form the
residual settlement matrix M; everything of L that M does not use is made
of cycles and can be cleared by set-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netoff._backend import get_kernel
from netoff.model import (
    InternalInvariantError,
    LiabilityMatrix,
    ValidationError,
    lattice_split,
    net_positions,
    nid,
)


@dataclass(frozen=True, slots=True)
class Arc:
    tail: int
    head: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class FlowNetwork:
    """A min-cost-flow instance built from a liability matrix.

    Nodes 0..firm_count-1 are firms (plus any extra liquidity nodes when the
    matrix is an extended one); the last two nodes are the synthetic source
    and sink. Arcs are sorted by (tail, head).
    """

    node_count: int
    firm_count: int
    arcs: tuple[Arc, ...]
    source: int
    sink: int
    required_flow: int


@dataclass(frozen=True)
class FlowSolution:
    """Result of the optimization: the settlement matrix and its size.

    ``matrix`` holds the firm-to-firm flows (the obligations left for
    conventional settlement), ``total_cost`` its grandsum restricted to
    cost-bearing arcs, ``total_flow`` the net internal debt carried.
    """

    matrix: LiabilityMatrix
    total_flow: int
    total_cost: int


def build_mcf_instance(
    matrix: LiabilityMatrix,
    b: np.ndarray,
    *,
    unit_cost_nodes: int | None = None,
) -> FlowNetwork:
    """Build the flow instance for a liability matrix with net positions ``b``.

    Interior arcs copy the matrix entries as capacities. Arcs between nodes
    below ``unit_cost_nodes`` cost 1 per unit; all other arcs (and every
    source/sink arc) cost 0. The default prices every interior arc at 1,
    which makes the objective "leave as little as possible unsettled".
    """
    n = matrix.n
    b = np.asarray(b, dtype=np.int64)
    if b.shape != (n,):
        raise ValidationError(f"net position vector has shape {b.shape}, expected ({n},)")
    if not np.array_equal(b, net_positions(matrix)):
        raise ValidationError("net positions are inconsistent with the liability matrix")
    if unit_cost_nodes is None:
        unit_cost_nodes = n

    source = n
    sink = n + 1
    arcs = []
    for (i, j), cap in matrix.items():
        cost = 1 if i < unit_cost_nodes and j < unit_cost_nodes else 0
        arcs.append(Arc(i, j, cap, cost))
    b_plus, b_minus = lattice_split(b)
    for i in range(n):
        if b_minus[i] > 0:
            arcs.append(Arc(source, i, int(b_minus[i]), 0))
        elif b_plus[i] > 0:
            arcs.append(Arc(i, sink, int(b_plus[i]), 0))
    arcs.sort(key=lambda a: (a.tail, a.head))
    return FlowNetwork(
        node_count=n + 2,
        firm_count=n,
        arcs=tuple(arcs),
        source=source,
        sink=sink,
        required_flow=nid(b),
    )


def solve_mcf(net: FlowNetwork, *, backend: str | None = None) -> FlowSolution:
    """Carry the required flow through the instance at minimum cost.

    The result is deterministic: identical instances produce identical
    matrices, whichever kernel backend is in use. Raises
    InternalInvariantError if the required flow cannot be carried, which
    cannot happen for instances built from a liability matrix (the matrix
    itself is a feasible settlement), or if the solution violates its own
    invariants.
    """
    m = len(net.arcs)
    tails = np.fromiter((a.tail for a in net.arcs), dtype=np.int64, count=m)
    heads = np.fromiter((a.head for a in net.arcs), dtype=np.int64, count=m)
    caps = np.fromiter((a.capacity for a in net.arcs), dtype=np.int64, count=m)
    costs = np.fromiter((a.cost for a in net.arcs), dtype=np.int64, count=m)

    kernel = get_kernel(backend)
    flows, total_flow, total_cost = kernel(
        net.node_count, tails, heads, caps, costs, net.source, net.sink
    )

    if total_flow != net.required_flow:
        raise InternalInvariantError(
            f"carried {total_flow} of required {net.required_flow}; "
            "a liability-matrix instance is always feasible, so this is a bug"
        )

    entries = {}
    n = net.firm_count
    for k in range(m):
        f = int(flows[k])
        if f > 0 and tails[k] < n and heads[k] < n:
            entries[(int(tails[k]), int(heads[k]))] = f
    matrix = LiabilityMatrix(n, entries)
    solution = FlowSolution(matrix=matrix, total_flow=int(total_flow), total_cost=int(total_cost))
    _verify_solution(net, solution)
    return solution


def _verify_solution(net: FlowNetwork, solution: FlowSolution) -> None:
    # flow conservation: the settlement matrix must reproduce the divergences
    # implied by the source/sink arcs
    expected = np.zeros(net.firm_count, dtype=np.int64)
    for arc in net.arcs:
        if arc.tail == net.source:
            expected[arc.head] -= arc.capacity
        elif arc.head == net.sink:
            expected[arc.tail] += arc.capacity
    if not np.array_equal(net_positions(solution.matrix), expected):
        raise InternalInvariantError("settlement matrix changed the net positions")
    # no cost-bearing flow cycle may survive: removing one would beat the optimum
    costly = {
        (a.tail, a.head): solution.matrix.value(a.tail, a.head)
        for a in net.arcs
        if a.cost > 0
    }
    if not is_acyclic(LiabilityMatrix(net.firm_count, costly)):
        raise InternalInvariantError("settlement matrix carries a costed flow cycle")


def is_acyclic(matrix: LiabilityMatrix) -> bool:
    """Kahn's algorithm on the nonzero entries: true iff a topological order exists."""
    indegree: dict[int, int] = {}
    successors: dict[int, list[int]] = {}
    for (i, j), _ in matrix.items():
        successors.setdefault(i, []).append(j)
        indegree[j] = indegree.get(j, 0) + 1
        indegree.setdefault(i, 0)
    queue = [v for v, d in indegree.items() if d == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in successors.get(u, ()):
            indegree[v] -= 1
            if indegree[v] == 0:
                queue.append(v)
    return seen == len(indegree)
