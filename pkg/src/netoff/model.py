"""Obligation networks, liability matrices, and net-position algebra.

All amounts are integer minor currency units (cents). Every computation in
this package is exact integer arithmetic; nothing is ever rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import index as _as_int

import numpy as np

#: Largest firm count for which a dense matrix export is allowed by default.
#: The engine itself is sparse throughout; this only guards ``to_dense``.
DEFAULT_DENSE_FIRM_CAP = 10_000


class ValidationError(ValueError):
    """Input data violates a model contract (bad rows, unknown firms, ...)."""


class InternalInvariantError(RuntimeError):
    """A computed result broke a guarantee the engine makes.

    Indicates a bug or tampered intermediate data, never bad user input.
    """


@dataclass(frozen=True, slots=True)
class Firm:
    """A network participant: dense 0-based index plus its external label."""

    index: int
    label: str


@dataclass(frozen=True, slots=True)
class Obligation:
    """A single invoice: ``debtor`` owes ``creditor`` exactly ``amount``."""

    id: str
    debtor: int
    creditor: int
    amount: int


class ObligationNetwork:
    """Directed multigraph of firms and individually valued obligations.

    Parallel obligations between the same pair of firms are permitted.
    Self-loops, non-positive amounts, duplicate labels, duplicate obligation
    ids, and dangling firm references are rejected at construction, so a
    network that exists is always safe to aggregate.
    """

    __slots__ = ("firms", "obligations")

    def __init__(self, firms, obligations):
        firms = tuple(firms)
        labels = set()
        for pos, firm in enumerate(firms):
            if firm.index != pos:
                raise ValidationError(
                    f"firm indices must be dense and 0-based, got {firm!r} at position {pos}"
                )
            if firm.label in labels:
                raise ValidationError(f"duplicate firm label {firm.label!r}")
            labels.add(firm.label)

        n = len(firms)
        obligations = tuple(obligations)
        seen_ids = set()
        for ob in obligations:
            if ob.id in seen_ids:
                raise ValidationError(f"duplicate obligation id {ob.id!r}")
            seen_ids.add(ob.id)
            if not (0 <= ob.debtor < n) or not (0 <= ob.creditor < n):
                raise ValidationError(f"obligation {ob.id!r} references an unknown firm")
            if ob.debtor == ob.creditor:
                raise ValidationError(f"obligation {ob.id!r} is a self-loop")
            try:
                amount = _as_int(ob.amount)
            except TypeError:
                raise ValidationError(
                    f"obligation {ob.id!r} amount {ob.amount!r} is not an integer"
                ) from None
            if amount <= 0:
                raise ValidationError(f"obligation {ob.id!r} amount must be positive")

        self.firms = firms
        self.obligations = obligations

    @property
    def firm_count(self) -> int:
        return len(self.firms)

    def labels(self) -> tuple[str, ...]:
        return tuple(firm.label for firm in self.firms)

    def total_weight(self) -> int:
        """Sum of all obligation amounts in the network."""
        return sum(ob.amount for ob in self.obligations)

    @classmethod
    def from_edges(cls, edges, extra_firms=()) -> "ObligationNetwork":
        """Build a network from ``(debtor_label, creditor_label, amount)`` triples.

        Firms are indexed in first-seen order; obligation ids are generated
        as ``o1``, ``o2``, ... in input order. ``extra_firms`` is registered
        before the edges, so it can pin the firm ordering and include firms
        with no obligations (isolated firms are legitimate).
        """
        index: dict[str, int] = {}

        def firm_of(label: str) -> int:
            if label not in index:
                index[label] = len(index)
            return index[label]

        for label in extra_firms:
            firm_of(label)
        obligations = []
        for k, (debtor, creditor, amount) in enumerate(edges, start=1):
            obligations.append(
                Obligation(f"o{k}", firm_of(debtor), firm_of(creditor), amount)
            )
        firms = [Firm(i, label) for label, i in sorted(index.items(), key=lambda kv: kv[1])]
        return cls(firms, obligations)

    def __repr__(self) -> str:
        return (
            f"ObligationNetwork(firms={self.firm_count}, "
            f"obligations={len(self.obligations)})"
        )


class LiabilityMatrix:
    """Square grid of aggregated liabilities: entry (i, j) is what firm i owes firm j.

    Stored sparsely so networks stay cheap at scale; a dense export is
    available for small firm counts. The zero diagonal and nonnegative
    entries are enforced at construction.
    """

    __slots__ = ("n", "_entries", "_items")

    def __init__(self, n, entries=()):
        n = _as_int(n)
        if n < 0:
            raise ValidationError("firm count must be nonnegative")
        cleaned: dict[tuple[int, int], int] = {}
        pairs = entries.items() if isinstance(entries, dict) else entries
        for (i, j), value in pairs:
            value = _as_int(value)
            if value == 0:
                continue
            if value < 0:
                raise ValidationError(f"negative liability at ({i}, {j})")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"liability entry ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValidationError(f"nonzero diagonal entry at ({i}, {i})")
            key = (int(i), int(j))
            cleaned[key] = cleaned.get(key, 0) + value
        self.n = n
        self._entries = cleaned
        self._items = None

    @classmethod
    def zeros(cls, n: int) -> "LiabilityMatrix":
        return cls(n)

    @classmethod
    def from_dense(cls, array) -> "LiabilityMatrix":
        a = np.asarray(array)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("liability matrix must be square")
        n = a.shape[0]
        entries = {
            (int(i), int(j)): int(a[i, j])
            for i, j in zip(*np.nonzero(a))
        }
        return cls(n, entries)

    def to_dense(self, *, max_firms: int = DEFAULT_DENSE_FIRM_CAP) -> np.ndarray:
        if self.n > max_firms:
            raise ValueError(
                f"refusing dense export for n={self.n} (cap {max_firms}); "
                "raise max_firms explicitly if you really want this"
            )
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for (i, j), v in self._entries.items():
            out[i, j] = v
        return out

    def items(self) -> tuple[tuple[tuple[int, int], int], ...]:
        """Nonzero entries as ``((i, j), value)`` sorted by (i, j)."""
        if self._items is None:
            self._items = tuple(sorted(self._entries.items()))
        return self._items

    def value(self, i: int, j: int) -> int:
        return self._entries.get((i, j), 0)

    def row_sums(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        for (i, _), v in self._entries.items():
            out[i] += v
        return out

    def col_sums(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        for (_, j), v in self._entries.items():
            out[j] += v
        return out

    def total(self) -> int:
        """Grandsum: the sum of every entry, i.e. the network weight."""
        return sum(self._entries.values())

    def nonzero_count(self) -> int:
        return len(self._entries)

    def transpose(self) -> "LiabilityMatrix":
        return LiabilityMatrix(self.n, {(j, i): v for (i, j), v in self._entries.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, LiabilityMatrix):
            return NotImplemented
        return self.n == other.n and self._entries == other._entries

    def __repr__(self) -> str:
        if self.nonzero_count() <= 12:
            body = ", ".join(f"{i}->{j}: {v}" for (i, j), v in self.items())
            return f"LiabilityMatrix(n={self.n}, {{{body}}})"
        return f"LiabilityMatrix(n={self.n}, nonzero={self.nonzero_count()})"


def build_liability_matrix(network: ObligationNetwork) -> LiabilityMatrix:
    """Aggregate individual obligations into the firm-by-firm liability matrix.

    Entry (i, j) is the sum of every obligation from firm i to firm j;
    the diagonal is structurally zero.
    """
    totals: dict[tuple[int, int], int] = {}
    for ob in network.obligations:
        key = (ob.debtor, ob.creditor)
        totals[key] = totals.get(key, 0) + ob.amount
    return LiabilityMatrix(network.firm_count, totals)


def debt_credit_vectors(matrix: LiabilityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-firm total debt (row sums) and total credit (column sums)."""
    return matrix.row_sums(), matrix.col_sums()


def net_positions(matrix: LiabilityMatrix) -> np.ndarray:
    """Net position vector b = credit - debt.

    The components always sum to zero because every obligation appears once
    as a debt and once as a credit; a nonzero sum means the engine itself
    is broken, so it raises rather than returning garbage.
    """
    debt, credit = debt_credit_vectors(matrix)
    b = credit - debt
    if int(b.sum()) != 0:
        raise InternalInvariantError("net positions do not sum to zero")
    return b


def lattice_split(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a signed vector into (positive part, negated negative part)."""
    b = np.asarray(b, dtype=np.int64)
    zero = np.zeros_like(b)
    return np.maximum(b, zero), np.maximum(-b, zero)


def nid(b: np.ndarray) -> int:
    """Net internal debt: the external cash needed to discharge everything.

    Equals the l1-norm of the negative part of the net position vector.
    """
    _, b_minus = lattice_split(b)
    return int(b_minus.sum())


def external_clearing_vector(b: np.ndarray) -> np.ndarray:
    """The external cashflow f = -b that balances the payment system."""
    return -np.asarray(b, dtype=np.int64)


@dataclass(frozen=True)
class PaymentSystem:
    """An obligation network's liability matrix plus an external cashflow vector.

    Positive ``external_flow`` components are cash injected into the network,
    negative components are cash leaving it.
    """

    liabilities: LiabilityMatrix
    external_flow: np.ndarray


def is_balanced_system(system: PaymentSystem) -> bool:
    """True when every firm's net position plus external flow is zero.

    A balanced system can discharge all obligations simultaneously; flow
    conservation then holds at every firm and at the external source/sink.
    """
    f = np.asarray(system.external_flow, dtype=np.int64)
    if f.shape != (system.liabilities.n,):
        raise ValidationError(
            f"external flow has length {f.shape}, expected ({system.liabilities.n},)"
        )
    b = net_positions(system.liabilities)
    return bool(np.all(b + f == 0))
