"""Composite Gauss-Legendre quadrature with panel-doubling error control."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureNotConverged(RuntimeError):
    """Panel doubling failed to reach the requested tolerance."""


@lru_cache(maxsize=32)
def _gauss_rule(n_nodes: int):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return x, w


def panel_nodes(a: float, b: float, n_panels: int, n_nodes: int):
    """Nodes and weights of composite Gauss-Legendre on [a, b].

    Returns flat arrays of length n_panels * n_nodes.
    """
    xr, wr = _gauss_rule(n_nodes)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * xr[None, :]).ravel()
    w = (half[:, None] * wr[None, :]).ravel()
    return x, w


def fixed_quad(f, a: float, b: float, n_panels: int = 1, n_nodes: int = 12) -> float:
    x, w = panel_nodes(a, b, n_panels, n_nodes)
    return float(np.dot(w, np.asarray(f(x), dtype=float)))


def integrate_adaptive(
    f,
    a: float,
    b: float,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-13,
    n_nodes: int = 12,
    initial_panels: int = 1,
    max_doublings: int = 12,
):
    """Integrate f over [a, b], doubling the panel count until stable.

    Returns (value, error_estimate) where the estimate is the difference
    between the last two refinement levels. Raises QuadratureNotConverged
    if the doubling budget runs out.
    """
    if b <= a:
        return 0.0, 0.0
    panels = max(1, int(initial_panels))
    prev = fixed_quad(f, a, b, panels, n_nodes)
    err = np.inf
    for _ in range(max_doublings):
        panels *= 2
        cur = fixed_quad(f, a, b, panels, n_nodes)
        err = abs(cur - prev)
        if err <= max(abs_tol, rel_tol * abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureNotConverged(
        f"integral over [{a}, {b}] did not stabilize within {panels} panels "
        f"(last change {err:.3e})"
    )
