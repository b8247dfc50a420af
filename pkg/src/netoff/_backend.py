"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``NETOFF_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from netoff import _ssp_py


def _load_default():
    if os.environ.get("NETOFF_PURE_PYTHON"):
        return _ssp_py.solve_min_cost_flow, "python"
    try:
        from netoff import _ssp  # compiled extension, built by setup.py
    except ImportError:
        return _ssp_py.solve_min_cost_flow, "python"
    return _ssp.solve_min_cost_flow, "compiled"


solve_min_cost_flow, BACKEND = _load_default()


def solver_backend() -> str:
    """Name of the kernel in use: ``"compiled"`` or ``"python"``."""
    return BACKEND


def get_kernel(name: str | None = None):
    """Kernel function for an explicit backend name, or the default."""
    if name is None:
        return solve_min_cost_flow
    if name == "python":
        return _ssp_py.solve_min_cost_flow
    if name == "compiled":
        from netoff import _ssp
        return _ssp.solve_min_cost_flow
    raise ValueError(f"unknown backend {name!r}")
