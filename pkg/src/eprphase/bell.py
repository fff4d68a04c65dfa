"""CHSH and Clauser-Horne combinations, scans and violation maximisation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .errors import check_squeezing
from .optimize import OptimizerConfig, expand_bracket, golden_section_max, nelder_mead_max

CHSH_BOUNDS = (-2.0, 2.0)
CH_BOUNDS = (-1.0, 0.0)
# r -> infinity maximum of the CHSH combination on the restricted family
CHSH_LIMIT = 1.0 + 3.0 * 2.0 ** (-4.0 / 3.0)


@dataclass(frozen=True)
class BellSettings:
    alpha: complex = 0j
    alpha_prime: complex = 0j
    beta: complex = 0j
    beta_prime: complex = 0j

    def to_vector(self) -> np.ndarray:
        return np.array(
            [z for s in (self.alpha, self.alpha_prime, self.beta, self.beta_prime) for z in (s.real, s.imag)]
        )

    @classmethod
    def from_vector(cls, v) -> "BellSettings":
        v = [float(x) for x in v]
        return cls(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5]), complex(v[6], v[7]))

    @classmethod
    def restricted(cls, J: float) -> "BellSettings":
        """``alpha' = beta' = 0``, ``alpha = sqrt(J)``, ``beta = -sqrt(J)``."""
        s = math.sqrt(J)
        return cls(alpha=complex(s), beta=complex(-s))


@dataclass(frozen=True)
class Refinement:
    settings: BellSettings
    value: float
    n_iter: int
    converged: bool
    trace: tuple


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a violation search.

    ``value``/``settings`` are the optimum over the restricted real family
    ``alpha' = beta' = 0, alpha = -beta = sqrt(J)``; ``unrestricted`` holds
    the local refinement over all eight real setting components, which can
    exceed it.
    """

    combination: str
    r: float
    settings: BellSettings
    value: float
    bound_low: float
    bound_high: float
    violated: bool
    optimizer_trace: tuple
    J: float
    converged: bool
    analytic_value: float | None = None
    unrestricted: Refinement | None = None
    messages: tuple = field(default_factory=tuple)


def chsh_combination(r, s: BellSettings) -> float:
    E = analytics.parity_correlation
    return (
        E(r, s.alpha_prime, s.beta_prime)
        + E(r, s.alpha_prime, s.beta)
        + E(r, s.alpha, s.beta_prime)
        - E(r, s.alpha, s.beta)
    )


def ch_combination_general(r, s: BellSettings) -> float:
    """Six-term Clauser-Horne combination with four free settings.

    ``p(a';b') + p(a';b) + p(a;b') - p(a;b) - p_a(a') - p_b(b')``.
    """
    p = analytics.nocount_joint
    return (
        p(r, s.alpha_prime, s.beta_prime)
        + p(r, s.alpha_prime, s.beta)
        + p(r, s.alpha, s.beta_prime)
        - p(r, s.alpha, s.beta)
        - analytics.nocount_single_a(r, s.alpha_prime)
        - analytics.nocount_single_b(r, s.beta_prime)
    )


def ch_combination(r, alpha, beta) -> float:
    """Clauser-Horne combination with the primed settings fixed at zero."""
    return ch_combination_general(r, BellSettings(alpha=complex(alpha), beta=complex(beta)))


def chsh_restricted_analytic(r) -> tuple[float, float]:
    """Exact ``(J*, B*)`` on the restricted family.

    With ``u = 2 J cosh 2r`` the family gives
    ``B(u) = 1 + 2 e^{-u} - e^{-2u(1 + tanh 2r)}``, maximal at
    ``u* = ln(1 + tanh 2r) / (1 + 2 tanh 2r)``.
    """
    r = check_squeezing(r, 2.0)
    t = math.tanh(2.0 * r)
    u = math.log1p(t) / (1.0 + 2.0 * t)
    value = 1.0 + 2.0 * math.exp(-u) - math.exp(-2.0 * u * (1.0 + t))
    return u / (2.0 * math.cosh(2.0 * r)), value


def ch_restricted_analytic(r) -> tuple[float, float]:
    """Exact maximiser of :func:`analytics.ch_closed_form` over ``J``."""
    r = check_squeezing(r)
    t = math.tanh(r)
    J = math.log1p(t) / (1.0 + 2.0 * t)
    return J, analytics.ch_closed_form(r, J)


def _report(combination, r, restricted, J, settings, bounds, refinement, analytic_value, messages):
    value = restricted.value
    return ViolationReport(
        combination=combination,
        r=r,
        settings=settings,
        value=value,
        bound_low=bounds[0],
        bound_high=bounds[1],
        violated=bool(value > bounds[1] or value < bounds[0]),
        optimizer_trace=tuple(restricted.trace),
        J=J,
        converged=restricted.converged and (refinement is None or refinement.converged),
        analytic_value=analytic_value,
        unrestricted=refinement,
        messages=tuple(messages),
    )


def _refine(objective, start: BellSettings, config: OptimizerConfig, messages):
    res = nelder_mead_max(lambda v: objective(BellSettings.from_vector(v)), start.to_vector(), config.max_iter, config.tol)
    if not res.converged:
        messages.append(f"unrestricted refinement stopped after {res.n_iter} iterations without converging")
    best = BellSettings.from_vector(res.x)
    value = res.value
    start_value = objective(start)
    if start_value >= value:
        best, value = start, start_value
    return Refinement(best, value, res.n_iter, res.converged, tuple(res.trace))


def chsh_optimize(r, config: OptimizerConfig | None = None) -> ViolationReport:
    """Maximise the CHSH combination.

    Golden-section search over the restricted family (in the scaled
    intensity ``u = 2 J cosh 2r``), followed, if ``config.refine``, by a
    Nelder-Mead refinement over all eight real setting components.
    """
    config = config or OptimizerConfig()
    r = check_squeezing(r, 2.0)
    scale = 2.0 * math.cosh(2.0 * r)

    def along_family(u):
        return chsh_combination(r, BellSettings.restricted(u / scale))

    hi = expand_bracket(along_family, 0.0, config.bracket_start)
    restricted = golden_section_max(along_family, 0.0, hi, max_iter=config.max_iter)
    messages = []
    if not restricted.converged:
        messages.append(f"golden-section search stopped after {restricted.n_iter} iterations")
    J = restricted.x / scale
    settings = BellSettings.restricted(J)
    refinement = _refine(lambda s: chsh_combination(r, s), settings, config, messages) if config.refine else None
    return _report("chsh", r, restricted, J, settings, CHSH_BOUNDS, refinement, chsh_restricted_analytic(r)[1], messages)


def ch_max_over_J(r, config: OptimizerConfig | None = None) -> tuple[float, float]:
    """``(J*, CH*)`` maximising the closed-form CH combination over ``J >= 0``."""
    res = _ch_search(r, config or OptimizerConfig())
    return res.x, res.value


def _ch_search(r, config):
    r = check_squeezing(r)

    def f(J):
        return analytics.ch_closed_form(r, J)

    hi = expand_bracket(f, 0.0, config.bracket_start)
    return golden_section_max(f, 0.0, hi, max_iter=config.max_iter)


def ch_optimize(r, config: OptimizerConfig | None = None) -> ViolationReport:
    """CH counterpart of :func:`chsh_optimize` (refinement over four free settings)."""
    config = config or OptimizerConfig()
    r = check_squeezing(r)
    restricted = _ch_search(r, config)
    messages = []
    if not restricted.converged:
        messages.append(f"golden-section search stopped after {restricted.n_iter} iterations")
    settings = BellSettings.restricted(restricted.x)
    refinement = _refine(lambda s: ch_combination_general(r, s), settings, config, messages) if config.refine else None
    return _report("ch", r, restricted, restricted.x, settings, CH_BOUNDS, refinement, ch_restricted_analytic(r)[1], messages)


def ch_scan(r_grid, J_grid) -> np.ndarray:
    """``ch_closed_form`` on the product grid, shape ``(len(r_grid), len(J_grid))``."""
    r = np.asarray(r_grid, dtype=float)
    J = np.asarray(J_grid, dtype=float)
    if r.size == 0 or J.size == 0:
        raise ValueError("scan grids must be non-empty")
    return np.asarray(analytics.ch_closed_form(r[:, None], J[None, :]))


def ch_scan_maxima(r_grid, J_grid):
    """Per-row argmax of :func:`ch_scan`; ties resolve to the smaller ``J``."""
    J = np.asarray(J_grid, dtype=float)
    order = np.argsort(J, kind="stable")
    J = J[order]
    table = ch_scan(r_grid, J)
    idx = np.argmax(table, axis=1)  # first maximum, i.e. smallest J
    return J[idx], table[np.arange(table.shape[0]), idx]
