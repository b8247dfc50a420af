"""Seeded generators for synthetic obligation networks.

Used by the test suite and the benchmark script. Every generator takes an
explicit seed and derives all shape parameters from it, so any failing case
can be replayed from the seed alone.
"""

from __future__ import annotations

import random

import numpy as np

from netoff.liquidity import LiquiditySources
from netoff.model import Firm, Obligation, ObligationNetwork


def random_network(seed: int, *, firms: int, obligations: int,
                   max_amount: int = 10_000) -> ObligationNetwork:
    """Uniform random multigraph with exactly ``obligations`` edges."""
    rng = random.Random(seed)
    obs = []
    for k in range(1, obligations + 1):
        i = rng.randrange(firms)
        j = rng.randrange(firms - 1)
        if j >= i:
            j += 1
        obs.append(Obligation(f"o{k}", i, j, rng.randint(1, max_amount)))
    return ObligationNetwork(
        [Firm(i, f"firm{i:05d}") for i in range(firms)], obs
    )


def random_small_network(seed: int, *, max_firms: int = 6, max_entry: int = 4,
                         max_pairs: int = 13) -> ObligationNetwork:
    """Small network whose aggregated liability entries never exceed ``max_entry``.

    Suitable for exhaustive oracle checks: ``max_pairs`` bounds the number of
    distinct debtor/creditor pairs so the search space of the brute-force
    oracles stays enumerable in milliseconds. Some pair totals are split into
    two parallel invoices so aggregation keeps getting exercised.
    """
    rng = random.Random(seed)
    n = rng.randint(2, max_firms)
    density = rng.uniform(0.15, 0.55)
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < density
    ]
    if len(pairs) > max_pairs:
        pairs = sorted(rng.sample(pairs, max_pairs))
    obs = []
    k = 1
    for i, j in pairs:
        total = rng.randint(1, max_entry)
        if total > 1 and rng.random() < 0.25:
            cut = rng.randint(1, total - 1)
            parts = [cut, total - cut]
        else:
            parts = [total]
        for amount in parts:
            obs.append(Obligation(f"o{k}", i, j, amount))
            k += 1
    return ObligationNetwork([Firm(i, f"f{i}") for i in range(n)], obs)


def random_liquidity(seed: int, firm_count: int, *, max_holding: int = 5,
                     max_overdraft: int = 4) -> LiquiditySources:
    """Random per-firm holdings and overdraft facilities, many of them zero."""
    rng = random.Random(seed)
    holdings = np.array(
        [rng.randint(0, max_holding) if rng.random() < 0.6 else 0 for _ in range(firm_count)],
        dtype=np.int64,
    )
    approved = np.array(
        [rng.randint(1, max_overdraft) if rng.random() < 0.4 else 0 for _ in range(firm_count)],
        dtype=np.int64,
    )
    drawn = np.array([rng.randint(0, a) for a in approved], dtype=np.int64)
    cap = rng.randint(0, 2 * max_overdraft)
    return LiquiditySources(holdings, approved, drawn, cap)
