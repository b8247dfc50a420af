"""Benchmark the compiled flow kernel against the pure-Python fallback.

Both kernels implement the same algorithm and must return identical
settlement matrices; this script times them side by side on random
networks and verifies the outputs match.

    python benchmarks/bench_kernels.py          # quick sizes
    python benchmarks/bench_kernels.py --full   # includes the 10k-firm case
"""

import argparse
import time

from netoff._backend import solver_backend
from netoff.flow import build_mcf_instance, solve_mcf
from netoff.model import build_liability_matrix, net_positions
from netoff.testing import random_network

QUICK_SIZES = [(200, 1_500), (1_000, 8_000), (3_000, 30_000)]
FULL_SIZES = QUICK_SIZES + [(10_000, 100_000)]


def time_solve(instance, backend):
    started = time.perf_counter()
    solution = solve_mcf(instance, backend=backend)
    return time.perf_counter() - started, solution


def run(sizes):
    print(f"default backend: {solver_backend()}")
    print(f"{'firms':>7} {'obligations':>12} {'compiled':>10} {'python':>10} {'speedup':>8}  identical")
    for firms, obligations in sizes:
        net = random_network(1234, firms=firms, obligations=obligations)
        matrix = build_liability_matrix(net)
        instance = build_mcf_instance(matrix, net_positions(matrix))
        t_c, sol_c = time_solve(instance, "compiled")
        t_p, sol_p = time_solve(instance, "python")
        same = sol_c.matrix == sol_p.matrix and sol_c.total_cost == sol_p.total_cost
        print(
            f"{firms:>7} {obligations:>12} {t_c:>9.3f}s {t_p:>9.3f}s "
            f"{t_p / t_c:>7.1f}x  {same}"
        )
        if not same:
            raise SystemExit("backend outputs diverged; this is a bug")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--full", action="store_true", help="include the 10k-firm case")
    args = parser.parse_args()
    if solver_backend() != "compiled":
        raise SystemExit(
            "compiled kernel is not available; build it first (pip install -e .)"
        )
    run(FULL_SIZES if args.full else QUICK_SIZES)


if __name__ == "__main__":
    main()
