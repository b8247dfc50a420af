"""netoff: multilateral netting for obligation networks.

Finds the maximum-weight balanced subsystem of a directed network of
inter-firm obligations, discharges it by cycle set-off, and leaves a
minimum-weight residual for conventional settlement. An extended mode
folds real liquidity sources (account holdings, overdraft facilities)
into the same optimization.

Typical use::

    from netoff import ObligationNetwork, clear

    network = ObligationNetwork.from_edges([("a", "b", 120), ("b", "a", 90)])
    result = clear(network)
    result.cleared_weight    # 180: both invoices set off up to the smaller one
"""

from netoff._backend import solver_backend
from netoff.model import (
    DEFAULT_DENSE_FIRM_CAP,
    Firm,
    InternalInvariantError,
    LiabilityMatrix,
    Obligation,
    ObligationNetwork,
    PaymentSystem,
    ValidationError,
    build_liability_matrix,
    debt_credit_vectors,
    external_clearing_vector,
    is_balanced_system,
    lattice_split,
    net_positions,
    nid,
)
from netoff.flow import (
    Arc,
    FlowNetwork,
    FlowSolution,
    build_mcf_instance,
    is_acyclic,
    solve_mcf,
)
from netoff.clearing import (
    ClearingResult,
    CycleSettlement,
    ObligationSetOff,
    SetOffNotice,
    allocate_setoffs,
    build_setoff_notices,
    clear,
    decompose_cycles,
    tetris_subtract,
)
from netoff.liquidity import (
    ExtendedClearingResult,
    ExtendedMatrix,
    FeasibilityReport,
    LiquiditySources,
    build_extended_matrix,
    check_balanced_feasibility,
    optimize_extended,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ClearingResult",
    "CycleSettlement",
    "DEFAULT_DENSE_FIRM_CAP",
    "ExtendedClearingResult",
    "ExtendedMatrix",
    "FeasibilityReport",
    "Firm",
    "FlowNetwork",
    "FlowSolution",
    "InternalInvariantError",
    "LiabilityMatrix",
    "LiquiditySources",
    "Obligation",
    "ObligationNetwork",
    "ObligationSetOff",
    "PaymentSystem",
    "SetOffNotice",
    "ValidationError",
    "allocate_setoffs",
    "build_extended_matrix",
    "build_liability_matrix",
    "build_mcf_instance",
    "build_setoff_notices",
    "check_balanced_feasibility",
    "clear",
    "debt_credit_vectors",
    "decompose_cycles",
    "external_clearing_vector",
    "is_acyclic",
    "is_balanced_system",
    "lattice_split",
    "net_positions",
    "nid",
    "optimize_extended",
    "solve_mcf",
    "solver_backend",
    "tetris_subtract",
]
