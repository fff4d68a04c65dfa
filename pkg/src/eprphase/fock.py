"""Truncated photon-number-basis oracle for the two-mode squeezed vacuum.

Nothing here uses the phase-space closed forms: the state is built from its
number-state amplitudes, displaced with exact matrix elements of the
displacement operator, and measured by summing over outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import RangeError, TruncationError, check_squeezing

DEFAULT_TOL = 1e-10
HARD_CAP = 4096


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NopaAmplitudes:
    r: float
    cutoff: int
    c: np.ndarray

    @property
    def tail(self) -> float:
        """Probability weight dropped by the truncation, ``tanh(r)**(2(N+1))``."""
        return math.tanh(self.r) ** (2 * (self.cutoff + 1))


@dataclass(frozen=True)
class DisplacementMatrix:
    alpha: complex
    cutoff: int
    d: np.ndarray

    def column_deficits(self) -> np.ndarray:
        """``1 - sum_m |d[m, n]|^2`` per column (zero for an untruncated operator)."""
        return 1.0 - np.sum(self.d.real ** 2 + self.d.imag ** 2, axis=0)


@dataclass(frozen=True)
class JointCountDistribution:
    """Photon-count statistics ``p[m, n]`` behind two displaced detectors."""

    p: np.ndarray
    cutoff: int
    mass: float
    r: float = 0.0
    alpha: complex = 0j
    beta: complex = 0j

    @property
    def deficit(self) -> float:
        return 1.0 - self.mass

    def parity(self) -> float:
        sign = 1.0 - 2.0 * (np.add.outer(np.arange(self.cutoff + 1), np.arange(self.cutoff + 1)) % 2)
        return float(np.sum(sign * self.p))

    def nocount(self) -> tuple[float, float, float]:
        """``(P[m=0 and n=0], P[m=0], P[n=0])``."""
        return float(self.p[0, 0]), float(self.p[0].sum()), float(self.p[:, 0].sum())

    @classmethod
    def point_mass(cls, m: int = 0, n: int = 0, cutoff: int | None = None) -> "JointCountDistribution":
        cutoff = max(m, n) if cutoff is None else cutoff
        p = np.zeros((cutoff + 1, cutoff + 1))
        p[m, n] = 1.0
        return cls(_frozen(p), cutoff, 1.0)


def nopa_amplitudes(r, cutoff: int) -> NopaAmplitudes:
    r = check_squeezing(r)
    if cutoff < 0:
        raise ValueError(f"cutoff must be non-negative, got {cutoff}")
    n = np.arange(cutoff + 1)
    c = np.power(math.tanh(r), n) / math.cosh(r)
    return NopaAmplitudes(r, cutoff, _frozen(c))


def _phases(alpha: complex, cutoff: int) -> np.ndarray:
    # d[m, n] = G[m, n] * e^{i(m-n)theta} * (-1)^{n-m} for n > m
    theta = math.atan2(alpha.imag, alpha.real)
    m = np.arange(cutoff + 1)[:, None]
    n = np.arange(cutoff + 1)[None, :]
    sign = np.where((n > m) & ((n - m) % 2 == 1), -1.0, 1.0)
    return sign * np.exp(1j * (m - n) * theta)


def displacement_matrix(alpha, cutoff: int, *, tol: float | None = None, check_columns: int | None = None) -> DisplacementMatrix:
    """Matrix elements ``<m|D(alpha)|n>`` for ``0 <= m, n <= cutoff``.

    The elements themselves are exact (not those of a truncated operator
    exponential), so only the rows beyond ``cutoff`` are missing.  When
    ``tol`` is given, the first ``check_columns`` columns (default: all)
    must lose less than ``tol`` of their norm to that truncation, otherwise
    :class:`TruncationError` is raised.
    """
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise RangeError(f"displacement must be finite, got {alpha}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be non-negative, got {cutoff}")
    x = alpha.real ** 2 + alpha.imag ** 2
    g = kernels.displacement_table(x, cutoff)
    d = g * _phases(alpha, cutoff) if x > 0 else g.astype(complex)
    out = DisplacementMatrix(alpha, cutoff, _frozen(d))
    if tol is not None:
        ncol = cutoff + 1 if check_columns is None else check_columns
        worst = float(np.max(out.column_deficits()[:ncol], initial=0.0))
        if worst > tol:
            raise TruncationError(
                f"cutoff {cutoff} loses {worst:.3g} of column norm at |alpha|={math.sqrt(x):.4g} (tol {tol:g})"
            )
    return out


def _tail_cutoff(t: float, tol: float) -> int:
    """Smallest N with t**(2(N+1)) < tol."""
    if t == 0.0:
        return 0
    n = max(int(math.ceil(math.log(tol) / (2.0 * math.log(t)))) - 1, 0)
    while t ** (2 * (n + 1)) >= tol:
        n += 1
    while n > 0 and t ** (2 * n) < tol:
        n -= 1
    return n


def cutoff_autoselect(r, max_disp: float, tol: float = DEFAULT_TOL, hard_cap: int = HARD_CAP) -> int:
    """Smallest cutoff whose truncation error bound is below ``tol``.

    The bound is ``tail + 2 * sum_k c_k^2 (1 - sum_{m<=N} |<m|D|k>|^2)``:
    the dropped amplitude tail plus the weighted column-norm leakage of each
    mode's displacement at ``|alpha| = max_disp``.  It bounds the mass
    deficit of :func:`displaced_joint_distribution` for any pair of
    displacements with magnitudes up to ``max_disp``.
    """
    r = check_squeezing(r)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    max_disp = float(max_disp)
    if not math.isfinite(max_disp) or max_disp < 0:
        raise RangeError(f"max_disp must be finite and non-negative, got {max_disp}")
    t = math.tanh(r)
    n0 = _tail_cutoff(t, tol)
    if n0 > hard_cap:
        raise TruncationError(f"tolerance {tol:g} needs cutoff > {hard_cap} at r={r}")
    if max_disp == 0.0:
        return n0

    x = max_disp * max_disp
    size = min(hard_cap, max(2 * n0, n0 + 16 + int(12 * max_disp * math.sqrt(n0 + 1) + 4 * x)))
    while True:
        g = kernels.displacement_table(x, size)
        leak = np.clip(1.0 - np.cumsum(g * g, axis=0), 0.0, None)  # leak[N, k]
        weights = t ** (2.0 * np.arange(size + 1)) / math.cosh(r) ** 2
        partial = np.diagonal(np.cumsum(leak * weights, axis=1))  # sum over k <= N
        n = np.arange(size + 1)
        bound = t ** (2.0 * (n + 1)) + 2.0 * partial
        ok = np.flatnonzero((bound < tol) & (n >= n0))
        if ok.size:
            return int(ok[0])
        if size >= hard_cap:
            raise TruncationError(f"tolerance {tol:g} needs cutoff > {hard_cap} at r={r}, |alpha|={max_disp}")
        size = min(2 * size, hard_cap)


def displaced_joint_distribution(r, alpha, beta, cutoff: int | None = None, tol: float = DEFAULT_TOL) -> JointCountDistribution:
    """Count statistics after displacing mode a by ``alpha`` and b by ``beta``.

    Detection is modelled as projecting ``D(-alpha) x D(-beta) |psi>`` on
    ``|m, n>``, so ``p[0, 0] = |<alpha, beta|psi>|^2``.
    """
    r = check_squeezing(r)
    alpha, beta = complex(alpha), complex(beta)
    if cutoff is None:
        cutoff = cutoff_autoselect(r, max(abs(alpha), abs(beta)), tol)
    c = nopa_amplitudes(r, cutoff).c
    da = displacement_matrix(-alpha, cutoff).d
    db = displacement_matrix(-beta, cutoff).d
    amp = (da * c) @ db.T
    p = amp.real ** 2 + amp.imag ** 2
    mass = float(p.sum())
    if 1.0 - mass > tol:
        raise TruncationError(f"cutoff {cutoff} leaves mass deficit {1.0 - mass:.3g} > tol {tol:g}")
    return JointCountDistribution(_frozen(p), cutoff, mass, r, alpha, beta)


def parity_expectation_fock(r, alpha, beta, cutoff: int | None = None, tol: float = DEFAULT_TOL) -> float:
    """``sum_{m,n} (-1)^{m+n} p[m, n]`` over the displaced count distribution."""
    return displaced_joint_distribution(r, alpha, beta, cutoff, tol).parity()


def vacuum_projection_fock(r, alpha, beta, cutoff: int | None = None, tol: float = DEFAULT_TOL) -> float:
    return float(displaced_joint_distribution(r, alpha, beta, cutoff, tol).p[0, 0])
