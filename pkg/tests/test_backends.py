"""The compiled kernel and the pure-Python kernel must agree bit for bit."""

import numpy as np
import pytest

from netoff._backend import get_kernel, solver_backend
from netoff.model import build_liability_matrix, net_positions
from netoff.flow import build_mcf_instance, solve_mcf
from netoff.testing import random_network, random_small_network

compiled_available = solver_backend() == "compiled"
needs_compiled = pytest.mark.skipif(
    not compiled_available, reason="compiled kernel not built"
)


@needs_compiled
def test_backends_agree_on_small_instances():
    for case in range(150):
        seed = 71_000 + case
        L = build_liability_matrix(random_small_network(seed))
        net = build_mcf_instance(L, net_positions(L))
        a = solve_mcf(net, backend="python")
        b = solve_mcf(net, backend="compiled")
        assert a.matrix == b.matrix, f"seed {seed}"
        assert (a.total_flow, a.total_cost) == (b.total_flow, b.total_cost), f"seed {seed}"


@needs_compiled
def test_backends_agree_on_medium_instance():
    L = build_liability_matrix(
        random_network(99, firms=120, obligations=900, max_amount=500)
    )
    net = build_mcf_instance(L, net_positions(L))
    a = solve_mcf(net, backend="python")
    b = solve_mcf(net, backend="compiled")
    assert a.matrix == b.matrix
    assert (a.total_flow, a.total_cost) == (b.total_flow, b.total_cost)


@needs_compiled
def test_backends_agree_on_extended_instances():
    # liquidity instances are mostly zero-cost arcs, a different regime from
    # the unit-cost trade-credit ones
    from netoff.liquidity import build_extended_matrix, optimize_extended
    from netoff.testing import random_liquidity

    for case in range(60):
        seed = 72_000 + case
        L = build_liability_matrix(random_small_network(seed, max_firms=5))
        ext = build_extended_matrix(L, random_liquidity(seed, L.n))
        a = optimize_extended(ext, backend="python")
        b = optimize_extended(ext, backend="compiled")
        assert a.tetris_extended == b.tetris_extended, f"seed {seed}"
        assert a.discharged == b.discharged, f"seed {seed}"


@needs_compiled
def test_full_pipeline_identical_under_fallback():
    from netoff.clearing import clear

    net = random_network(55, firms=300, obligations=2_000, max_amount=400)
    assert clear(net, backend="python") == clear(net, backend="compiled")


@needs_compiled
def test_kernel_level_flows_identical():
    L = build_liability_matrix(
        random_network(7, firms=40, obligations=250, max_amount=60)
    )
    net = build_mcf_instance(L, net_positions(L))
    m = len(net.arcs)
    tails = np.fromiter((a.tail for a in net.arcs), dtype=np.int64, count=m)
    heads = np.fromiter((a.head for a in net.arcs), dtype=np.int64, count=m)
    caps = np.fromiter((a.capacity for a in net.arcs), dtype=np.int64, count=m)
    costs = np.fromiter((a.cost for a in net.arcs), dtype=np.int64, count=m)
    fa, tfa, tca = get_kernel("python")(net.node_count, tails, heads, caps, costs, net.source, net.sink)
    fb, tfb, tcb = get_kernel("compiled")(net.node_count, tails, heads, caps, costs, net.source, net.sink)
    assert np.array_equal(fa, fb)
    assert (tfa, tca) == (tfb, tcb)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown backend"):
        get_kernel("fortran")


@needs_compiled
@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_sortedness_enforced(backend):
    kernel = get_kernel(backend)
    tails = np.array([1, 0], dtype=np.int64)
    heads = np.array([2, 1], dtype=np.int64)
    caps = np.array([1, 1], dtype=np.int64)
    costs = np.array([0, 0], dtype=np.int64)
    with pytest.raises(ValueError, match="sorted"):
        kernel(3, tails, heads, caps, costs, 0, 2)
