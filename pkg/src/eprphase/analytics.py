"""Closed-form phase-space quantities of the two-mode squeezed vacuum.

The state is ``sum_n tanh(r)**n / cosh(r) |n, n>``.  Every function here
accepts complex scalars or broadcastable complex arrays for the mode
amplitudes ``alpha`` and ``beta`` and a scalar squeezing parameter ``r``.

All exponents are assembled in log space and exponentiated once.  The
cross term is rewritten through the rotated combinations
``alpha - conj(beta)`` and ``alpha + conj(beta)``::

    -2 cosh(2r)(|a|^2 + |b|^2) + 2 sinh(2r)(ab + a*b*)
        = -e^{2r} |a - b*|^2 - e^{-2r} |a + b*|^2

which avoids the catastrophic cancellation of the expanded form at large
``r``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import RangeError, check_squeezing

LOG_PI = math.log(math.pi)


class PhasePoint(NamedTuple):
    """Argument pair of the two-mode phase-space functions."""

    alpha: complex
    beta: complex


def _log_cosh(r: float) -> float:
    return r + math.log1p(math.exp(-2.0 * r)) - math.log(2.0)


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real * z.real + z.imag * z.imag


def _rotated(alpha, beta):
    a = np.asarray(alpha, dtype=complex)
    b = np.asarray(beta, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        return _abs2(a - np.conj(b)), _abs2(a + np.conj(b))


def _finish(log_value):
    """Exponentiate once, refusing non-finite exponents."""
    log_value = np.asarray(log_value, dtype=float)
    if not np.all(np.isfinite(log_value)):
        raise RangeError("exponent is not representable in double precision")
    out = np.exp(log_value)
    return float(out) if out.ndim == 0 else out


def _wigner_exponent(r, alpha, beta):
    r = check_squeezing(r, 2.0)
    diff2, sum2 = _rotated(alpha, beta)
    with np.errstate(over="ignore", invalid="ignore"):
        return -(math.exp(2.0 * r) * diff2 + math.exp(-2.0 * r) * sum2)


def _q_exponent(r, alpha, beta):
    r = check_squeezing(r)
    diff2, sum2 = _rotated(alpha, beta)
    e = math.exp(-2.0 * r)
    # (1 + tanh r)/2 and (1 - tanh r)/2 without subtraction
    w_diff = 1.0 / (1.0 + e)
    w_sum = e / (1.0 + e)
    with np.errstate(over="ignore", invalid="ignore"):
        return -(w_diff * diff2 + w_sum * sum2), _log_cosh(r)


def parity_correlation(r, alpha, beta):
    """Joint displaced-parity correlation ``E(alpha; beta)``.

    Equals ``exp[-2 cosh 2r (|a|^2+|b|^2) + 2 sinh 2r (ab + a*b*)]``; lies in
    ``(0, 1]`` for this state.
    """
    return _finish(_wigner_exponent(r, alpha, beta))


def wigner(r, alpha, beta):
    """Two-mode Wigner function, ``(4/pi^2) * parity_correlation``."""
    return (4.0 / math.pi**2) * parity_correlation(r, alpha, beta)


def nocount_joint(r, alpha, beta):
    """Probability that neither displaced detector fires.

    ``sech^2 r * exp(-|a|^2 - |b|^2 + tanh r (a*b* + ab))``.
    """
    expo, log_cosh = _q_exponent(r, alpha, beta)
    return _finish(expo - 2.0 * log_cosh)


def qfunc(r, alpha, beta):
    """Two-mode Husimi function ``|<alpha, beta|psi>|^2 / pi^2``."""
    return nocount_joint(r, alpha, beta) / math.pi**2


def _single_exponent(r, amplitude):
    r = check_squeezing(r)
    log_cosh = _log_cosh(r)
    with np.errstate(over="ignore", invalid="ignore"):
        a2 = _abs2(np.asarray(amplitude, dtype=complex))
        return -a2 * math.exp(-2.0 * log_cosh), log_cosh


def nocount_single_a(r, alpha):
    """No-count probability of detector ``a`` alone: ``sech^2 r exp(-|a|^2 sech^2 r)``."""
    expo, log_cosh = _single_exponent(r, alpha)
    return _finish(expo - 2.0 * log_cosh)


def nocount_single_b(r, beta):
    """Mode-``b`` counterpart of :func:`nocount_single_a`."""
    return nocount_single_a(r, beta)


def q_marginal_a(r, alpha):
    """Marginal of :func:`qfunc` over ``beta``.

    ``1/(pi cosh^2 r) * exp(-|alpha|^2 / cosh^2 r)``.  The prefactor has
    been checked against direct quadrature of :func:`qfunc` (see
    ``tests/test_analytics.py::test_q_marginal_matches_quadrature``).
    """
    expo, log_cosh = _single_exponent(r, alpha)
    return _finish(expo - 2.0 * log_cosh - LOG_PI)


def q_marginal_b(r, beta):
    return q_marginal_a(r, beta)


def _check_intensity(J):
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)) or np.any(J < 0):
        raise RangeError("displacement intensity J must be finite and non-negative")
    return J


def ch_closed_form(r, J):
    """Clauser-Horne combination at real settings ``alpha = -beta = sqrt(J)``.

    ``sech^2 r * (2 e^{-J} - e^{-2J(1 + tanh r)} - 1)``, evaluated through
    ``expm1`` so that the small-``J`` regime keeps full relative precision.
    ``r`` and ``J`` broadcast against each other.
    """
    J = _check_intensity(J)
    r_arr = np.asarray(r, dtype=float)
    for value in np.ravel(r_arr):
        check_squeezing(value)
    t = np.tanh(r_arr)
    sech2 = 1.0 / np.cosh(r_arr) ** 2
    out = sech2 * (2.0 * np.expm1(-J) - np.expm1(-2.0 * J * (1.0 + t)))
    return float(out) if out.ndim == 0 else out


def ch_asymptote(r, J):
    """Leading small-``J``, large-``r`` behaviour ``8 J e^{-2r}``."""
    r_arr = np.asarray(r, dtype=float)
    out = 8.0 * np.asarray(J, dtype=float) * np.exp(-2.0 * r_arr)
    return float(out) if out.ndim == 0 else out
