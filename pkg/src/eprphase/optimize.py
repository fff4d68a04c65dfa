"""Derivative-free maximisers used by the Bell-violation searches."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 2000
    tol: float = 1e-10
    refine: bool = True
    bracket_start: float = 1.0


@dataclass
class MaxResult:
    x: object
    value: float
    n_iter: int
    converged: bool
    trace: list = field(default_factory=list)


def expand_bracket(f, lo: float, hi: float, max_doublings: int = 60) -> float:
    """Grow ``hi`` until ``f`` is decreasing there (unimodal ``f`` on ``[lo, inf)``)."""
    for _ in range(max_doublings):
        mid = lo + 0.5 * (hi - lo)
        if f(hi) < f(mid):
            return hi
        hi = lo + 2.0 * (hi - lo)
    return hi


def golden_section_max(f, lo: float, hi: float, xtol: float = 1e-12, max_iter: int = 2000) -> MaxResult:
    """Maximise a unimodal scalar function on ``[lo, hi]``.

    The left endpoint is also a candidate, so a maximum sitting at ``lo``
    (e.g. a monotonically decreasing ``f``) is returned exactly; ties go to
    the smaller abscissa.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        trace.append((it, max(fc, fd)))
        if b - a <= xtol * (1.0 + abs(a)):
            converged = True
            break
    x, fx = (c, fc) if fc >= fd else (d, fd)
    f_lo = f(lo)
    if f_lo >= fx:
        x, fx = lo, f_lo
    return MaxResult(x, fx, it, converged, trace)


def nelder_mead_max(f, x0, max_iter: int = 2000, tol: float = 1e-10) -> MaxResult:
    """Local simplex refinement of ``f`` from ``x0`` (scipy's Nelder-Mead)."""
    trace = []

    def callback(intermediate_result):
        trace.append((len(trace) + 1, -float(intermediate_result.fun)))

    res = minimize(
        lambda x: -f(x),
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        callback=callback,
        options={"maxiter": max_iter, "xatol": tol, "fatol": tol, "adaptive": False},
    )
    return MaxResult(np.asarray(res.x), -float(res.fun), int(res.nit), bool(res.success), trace)
