"""Clearing with real liquidity sources: account balances and overdrafts.

The liquidity sources become five extra nodes appended to the liability
matrix, and the desired cashflows become capacities on arcs to and from
them. Running the same minimum-cost optimization on this extended matrix,
with firm-to-firm arcs costing 1 and liquidity arcs costing 0, discharges
the maximum obligation weight the available liquidity can support. Flows
over the liquidity arcs of the cleared part translate directly into bank
operations: account debits and credits, overdraft draws and repayments.

Node layout (appended after the ``n`` firms, in this order):

    hub           central store of value, funds and absorbs everything
    holdings_in   pays each firm's own account balance into the network
    holdings_out  carries receipts back out into firm accounts
    credit_in     pays out pre-approved overdraft headroom
    credit_out    collects repayments of overdrafts already drawn

``holdings_out`` is deliberately indexed before ``credit_out``: when a
creditor firm could either bank its receipts or repay its overdraft at
equal (zero) cost, the solver's deterministic tie-break then routes the
residual through ``holdings_out``, which leaves the repayment inside the
cleared part. Repayments get priority without needing a cost term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from netoff.flow import FlowSolution, build_mcf_instance, solve_mcf
from netoff.model import (
    InternalInvariantError,
    LiabilityMatrix,
    ValidationError,
    lattice_split,
    net_positions,
)
from netoff.clearing import tetris_subtract

SPECIAL_NODES = 5


@dataclass(frozen=True)
class LiquiditySources:
    """Per-firm liquidity available to the payment system.

    ``holdings`` is cash on account, ``approved_overdraft`` the pre-approved
    credit line, ``drawn_overdraft`` how much of it is already used (and so
    owed back to the bank). ``facility_cap`` limits the bank's total new
    overdraft exposure across all firms.
    """

    holdings: np.ndarray
    approved_overdraft: np.ndarray
    drawn_overdraft: np.ndarray
    facility_cap: int

    def __post_init__(self):
        for name in ("holdings", "approved_overdraft", "drawn_overdraft"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be a vector")
            if np.any(arr < 0):
                raise ValidationError(f"{name} must be nonnegative")
        if self.approved_overdraft.shape != self.holdings.shape or (
            self.drawn_overdraft.shape != self.holdings.shape
        ):
            raise ValidationError("liquidity vectors must have equal length")
        if np.any(self.drawn_overdraft > self.approved_overdraft):
            raise ValidationError("drawn overdraft exceeds the approved line")
        if self.facility_cap < 0:
            raise ValidationError("facility cap must be nonnegative")

    @property
    def available_credit(self) -> np.ndarray:
        return self.approved_overdraft - self.drawn_overdraft

    @classmethod
    def none(cls, firm_count: int) -> "LiquiditySources":
        zero = np.zeros(firm_count, dtype=np.int64)
        return cls(zero, zero.copy(), zero.copy(), 0)


@dataclass(frozen=True)
class FeasibilityReport:
    """Whether the sources can fund a fully balanced payment system.

    Full clearing needs every firm's cash deficit covered by its holdings
    plus available credit, and the total credit in play within the bank's
    facility cap. Infeasibility is an answer, not an error.
    """

    feasible: bool
    shortfalls: tuple[tuple[int, int], ...]  # (firm, uncovered amount)
    credit_line_total: int
    facility_cap: int
    cap_exceeded: bool


def check_balanced_feasibility(b: np.ndarray, sources: LiquiditySources) -> FeasibilityReport:
    b = np.asarray(b, dtype=np.int64)
    if b.shape != sources.holdings.shape:
        raise ValidationError("net position vector and liquidity vectors differ in length")
    _, b_minus = lattice_split(b)
    cover = sources.holdings + sources.available_credit
    shortfalls = tuple(
        (int(i), int(b_minus[i] - cover[i]))
        for i in np.nonzero(b_minus > cover)[0]
    )
    credit_total = int(sources.available_credit.sum())
    cap_exceeded = credit_total > sources.facility_cap
    return FeasibilityReport(
        feasible=not shortfalls and not cap_exceeded,
        shortfalls=shortfalls,
        credit_line_total=credit_total,
        facility_cap=sources.facility_cap,
        cap_exceeded=cap_exceeded,
    )


@dataclass(frozen=True)
class ExtendedMatrix:
    """Liability matrix over firms plus the five liquidity nodes."""

    base: LiabilityMatrix
    firm_count: int

    @property
    def hub(self) -> int:
        return self.firm_count

    @property
    def holdings_in(self) -> int:
        return self.firm_count + 1

    @property
    def holdings_out(self) -> int:
        return self.firm_count + 2

    @property
    def credit_in(self) -> int:
        return self.firm_count + 3

    @property
    def credit_out(self) -> int:
        return self.firm_count + 4


def build_extended_matrix(matrix: LiabilityMatrix, sources: LiquiditySources) -> ExtendedMatrix:
    """Fold the liquidity sources into the liability matrix as extra nodes.

    The firm block is copied unchanged. Capacities on the liquidity arcs:

        hub -> holdings_in      total cash the network can absorb (NID)
        hub -> credit_in        the overdraft facility cap
        holdings_in -> firm     the firm's account balance
        credit_in -> firm       approved minus drawn overdraft
        firm -> holdings_out    the firm's potential net receipts
        firm -> credit_out      the firm's drawn overdraft (to repay)
        holdings_out -> hub     total potential receipts
        credit_out -> hub       total drawn overdraft
    """
    n = matrix.n
    if sources.holdings.shape != (n,):
        raise ValidationError(
            f"liquidity vectors have length {sources.holdings.shape[0]}, expected {n}"
        )
    b = net_positions(matrix)
    b_plus, b_minus = lattice_split(b)
    hub, holdings_in, holdings_out = n, n + 1, n + 2
    credit_in, credit_out = n + 3, n + 4

    entries: dict[tuple[int, int], int] = dict(matrix.items())
    entries[(hub, holdings_in)] = int(b_minus.sum())
    entries[(hub, credit_in)] = sources.facility_cap
    entries[(holdings_out, hub)] = int(b_plus.sum())
    entries[(credit_out, hub)] = int(sources.drawn_overdraft.sum())
    available = sources.available_credit
    for i in range(n):
        entries[(holdings_in, i)] = int(sources.holdings[i])
        entries[(credit_in, i)] = int(available[i])
        entries[(i, credit_out)] = int(sources.drawn_overdraft[i])
        entries[(i, holdings_out)] = int(b_plus[i])
    return ExtendedMatrix(
        base=LiabilityMatrix(n + SPECIAL_NODES, entries), firm_count=n
    )


@dataclass(frozen=True)
class ExtendedClearingResult:
    """Outcome of clearing with liquidity: what settles and what cash moves."""

    extended: ExtendedMatrix
    residual: FlowSolution
    tetris_extended: LiabilityMatrix
    discharged: LiabilityMatrix
    discharged_weight: int
    account_debits: np.ndarray
    account_credits: np.ndarray
    overdraft_draws: np.ndarray
    repayments: np.ndarray


def optimize_extended(ext: ExtendedMatrix, *, backend: str | None = None) -> ExtendedClearingResult:
    """Discharge the maximum obligation weight the liquidity allows.

    Runs the minimum-cost optimization on the extended matrix, with cost
    only on firm-to-firm arcs, and splits the cleared part into discharged
    obligations (the firm block) and the cash movements that fund them.
    """
    base = ext.base
    n = ext.firm_count
    instance = build_mcf_instance(base, net_positions(base), unit_cost_nodes=n)
    residual = solve_mcf(instance, backend=backend)
    cleared = tetris_subtract(base, residual)

    discharged = LiabilityMatrix(
        n, {(i, j): v for (i, j), v in cleared.items() if i < n and j < n}
    )
    account_debits = np.zeros(n, dtype=np.int64)
    account_credits = np.zeros(n, dtype=np.int64)
    overdraft_draws = np.zeros(n, dtype=np.int64)
    repayments = np.zeros(n, dtype=np.int64)
    for (i, j), v in cleared.items():
        if i == ext.holdings_in and j < n:
            account_debits[j] = v
        elif i == ext.credit_in and j < n:
            overdraft_draws[j] = v
        elif i < n and j == ext.holdings_out:
            account_credits[i] = v
        elif i < n and j == ext.credit_out:
            repayments[i] = v

    total_draws = int(overdraft_draws.sum())
    if total_draws > base.value(ext.hub, ext.credit_in):
        raise InternalInvariantError("overdraft draws exceed the facility cap")

    return ExtendedClearingResult(
        extended=ext,
        residual=residual,
        tetris_extended=cleared,
        discharged=discharged,
        discharged_weight=discharged.total(),
        account_debits=account_debits,
        account_credits=account_credits,
        overdraft_draws=overdraft_draws,
        repayments=repayments,
    )
