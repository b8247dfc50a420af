"""The clearing pipeline: maximum balanced subsystem, cycles, set-off notices.

Subtracting the minimum-cost settlement matrix M from the liability matrix L
leaves T = L - M, a balanced subsystem whose firms all have zero net
position. T therefore decomposes into cycles, each of which can be
discharged by multilateral set-off with no cash at all; M is what remains
for conventional payment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netoff.flow import FlowSolution, build_mcf_instance, solve_mcf
from netoff.model import (
    InternalInvariantError,
    LiabilityMatrix,
    ObligationNetwork,
    ValidationError,
    build_liability_matrix,
    net_positions,
)


@dataclass(frozen=True, slots=True)
class CycleSettlement:
    """One discharged cycle: every firm in ``nodes`` pays its successor ``amount``.

    ``amount`` is the bottleneck, the minimum residual obligation along the
    cycle when it was extracted, so within the cycle every firm's inflow
    equals its outflow.
    """

    nodes: tuple[int, ...]
    amount: int

    @property
    def weight(self) -> int:
        return self.amount * len(self.nodes)


@dataclass(frozen=True, slots=True)
class ObligationSetOff:
    """Discharge of one invoice, possibly partial."""

    obligation_id: str
    debtor: int
    creditor: int
    amount: int
    discharged_in_full: bool


@dataclass(frozen=True, slots=True)
class SetOffNotice:
    """Per-firm statement of mutually discharged amounts.

    The debit side lists the firm's own obligations being set off, the
    credit side the obligations owed to it; the two totals are equal, which
    is what makes the multilateral set-off legally a set-off.
    """

    firm: int
    debit_items: tuple[ObligationSetOff, ...]
    credit_items: tuple[ObligationSetOff, ...]
    total: int


@dataclass(frozen=True)
class ClearingResult:
    """Everything the pipeline produces for one obligation network."""

    original_weight: int
    residual: FlowSolution
    tetris: LiabilityMatrix
    cycles: tuple[CycleSettlement, ...]
    notices: tuple[SetOffNotice, ...]
    cleared_weight: int


def tetris_subtract(matrix: LiabilityMatrix, solution: FlowSolution) -> LiabilityMatrix:
    """T = L - M: remove the settled flows, keeping every entry nonnegative.

    The result has all-zero net positions (L and M share the same ones), so
    it is made of cycles only. A negative entry means the settlement matrix
    was not actually feasible for this liability matrix, which is a solver
    bug or tampered input, not a data error.
    """
    entries = dict(matrix.items())
    for (i, j), v in solution.matrix.items():
        left = entries.get((i, j), 0) - v
        if left < 0:
            raise InternalInvariantError(
                f"settlement exceeds liability at ({i}, {j}): {v} > {entries.get((i, j), 0)}"
            )
        if left:
            entries[(i, j)] = left
        else:
            entries.pop((i, j), None)
    cleared = LiabilityMatrix(matrix.n, entries)
    if np.any(net_positions(cleared)):
        raise InternalInvariantError("cleared subsystem is not balanced")
    return cleared


def decompose_cycles(matrix: LiabilityMatrix) -> tuple[CycleSettlement, ...]:
    """Split a balanced matrix into a sequence of bottleneck cycles.

    Walks from the lowest-indexed firm with outstanding obligations, always
    following the lowest-indexed successor with a positive entry. Whenever
    the walk revisits a node on its own path, the enclosed cycle is
    extracted at its bottleneck and the walk resumes from the meeting node.
    In a balanced matrix every entered node has a successor, so the walk
    never dead-ends and the subtraction provably reaches the zero matrix.
    """
    if np.any(net_positions(matrix)):
        raise ValidationError("cycle decomposition requires a balanced matrix")

    n = matrix.n
    succ_heads: list[list[int]] = [[] for _ in range(n)]
    succ_vals: list[list[int]] = [[] for _ in range(n)]
    for (i, j), v in matrix.items():  # items are (i, j)-sorted
        succ_heads[i].append(j)
        succ_vals[i].append(v)
    ptr = [0] * n

    def exhausted(u: int) -> bool:
        heads, vals = succ_heads[u], succ_vals[u]
        while ptr[u] < len(heads) and vals[ptr[u]] == 0:
            ptr[u] += 1
        return ptr[u] >= len(heads)

    cycles: list[CycleSettlement] = []
    pos = [-1] * n
    start_scan = 0
    while True:
        while start_scan < n and exhausted(start_scan):
            start_scan += 1
        if start_scan == n:
            break
        stack = [start_scan]
        pos[start_scan] = 0
        while stack:
            u = stack[-1]
            if exhausted(u):
                if len(stack) != 1:
                    raise InternalInvariantError(
                        "walk dead-ended inside a balanced matrix"
                    )
                pos[u] = -1
                stack.pop()
                break
            v = succ_heads[u][ptr[u]]
            if pos[v] >= 0:
                cycle = tuple(stack[pos[v]:])
                bottleneck = min(succ_vals[w][ptr[w]] for w in cycle)
                for w in cycle:
                    succ_vals[w][ptr[w]] -= bottleneck
                cycles.append(CycleSettlement(cycle, bottleneck))
                for w in stack[pos[v] + 1:]:
                    pos[w] = -1
                del stack[pos[v] + 1:]
            else:
                pos[v] = len(stack)
                stack.append(v)
    return tuple(cycles)


def build_setoff_notices(
    matrix: LiabilityMatrix,
    cleared: LiabilityMatrix,
    network: ObligationNetwork,
) -> tuple[SetOffNotice, ...]:
    """Allocate the cleared amounts to individual obligations and group by firm.

    Aggregate set-offs map to invoices oldest-first (obligation id order),
    discharging whole invoices and splitting at most one per counterparty
    pair. Every firm's debit and credit totals come out equal because the
    cleared matrix is balanced.
    """
    setoffs = allocate_setoffs(matrix, cleared, network)
    by_firm_debit: dict[int, list[ObligationSetOff]] = {}
    by_firm_credit: dict[int, list[ObligationSetOff]] = {}
    for item in setoffs:
        by_firm_debit.setdefault(item.debtor, []).append(item)
        by_firm_credit.setdefault(item.creditor, []).append(item)

    notices = []
    for firm in sorted(set(by_firm_debit) | set(by_firm_credit)):
        debits = tuple(by_firm_debit.get(firm, ()))
        credits = tuple(by_firm_credit.get(firm, ()))
        debit_total = sum(item.amount for item in debits)
        credit_total = sum(item.amount for item in credits)
        if debit_total != credit_total:
            raise InternalInvariantError(
                f"firm {firm} set-off is lopsided: debit {debit_total}, credit {credit_total}"
            )
        notices.append(SetOffNotice(firm, debits, credits, debit_total))
    return tuple(notices)


def allocate_setoffs(
    matrix: LiabilityMatrix,
    cleared: LiabilityMatrix,
    network: ObligationNetwork,
) -> tuple[ObligationSetOff, ...]:
    """Per-invoice discharge amounts for a cleared matrix, oldest first."""
    by_pair: dict[tuple[int, int], list] = {}
    for ob in network.obligations:
        by_pair.setdefault((ob.debtor, ob.creditor), []).append(ob)
    for group in by_pair.values():
        group.sort(key=lambda ob: ob.id)

    items: list[ObligationSetOff] = []
    for (i, j), amount in cleared.items():
        if amount > matrix.value(i, j):
            raise InternalInvariantError(
                f"set-off at ({i}, {j}) exceeds recorded obligations: data integrity failure"
            )
        remaining = amount
        for ob in by_pair.get((i, j), ()):
            if remaining == 0:
                break
            take = min(ob.amount, remaining)
            remaining -= take
            items.append(
                ObligationSetOff(ob.id, i, j, take, discharged_in_full=take == ob.amount)
            )
        if remaining:
            raise InternalInvariantError(
                f"set-off at ({i}, {j}) exceeds recorded obligations: data integrity failure"
            )
    return tuple(items)


def clear(network: ObligationNetwork, *, backend: str | None = None) -> ClearingResult:
    """Run the whole pipeline on one obligation network.

    Collect the liability matrix, treat the network as a payment system with
    no external financing, find the minimum settlement matrix per weakly
    connected component, subtract it, decompose the cleared subsystem into
    cycles, and draw up the set-off notices. The residual matrix is what
    participants still have to pay through their banks.
    """
    matrix = build_liability_matrix(network)
    b = net_positions(matrix)

    merged: dict[tuple[int, int], int] = {}
    total_flow = 0
    total_cost = 0
    for component in _components(matrix):
        local = {node: k for k, node in enumerate(component)}
        sub_entries = {
            (local[i], local[j]): v
            for (i, j), v in matrix.items()
            if i in local
        }
        sub_matrix = LiabilityMatrix(len(component), sub_entries)
        sub_solution = solve_mcf(
            build_mcf_instance(sub_matrix, net_positions(sub_matrix)),
            backend=backend,
        )
        for (i, j), v in sub_solution.matrix.items():
            merged[(component[i], component[j])] = v
        total_flow += sub_solution.total_flow
        total_cost += sub_solution.total_cost

    residual = FlowSolution(
        matrix=LiabilityMatrix(matrix.n, merged),
        total_flow=total_flow,
        total_cost=total_cost,
    )
    cleared = tetris_subtract(matrix, residual)
    cycles = decompose_cycles(cleared)
    notices = build_setoff_notices(matrix, cleared, network)

    if matrix.total() != cleared.total() + residual.matrix.total():
        raise InternalInvariantError("weight was not conserved by the clearing split")
    if not np.array_equal(net_positions(residual.matrix), b):
        raise InternalInvariantError("residual matrix changed the net positions")
    if sum(c.weight for c in cycles) != cleared.total():
        raise InternalInvariantError("cycle decomposition lost weight")

    return ClearingResult(
        original_weight=matrix.total(),
        residual=residual,
        tetris=cleared,
        cycles=cycles,
        notices=notices,
        cleared_weight=cleared.total(),
    )


def _components(matrix: LiabilityMatrix) -> list[list[int]]:
    """Weakly connected components with at least one arc, ordered by lowest member."""
    parent = list(range(matrix.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    active = set()
    for (i, j), _ in matrix.items():
        active.add(i)
        active.add(j)
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for node in sorted(active):
        groups.setdefault(find(node), []).append(node)
    return [groups[root] for root in sorted(groups)]
