"""Phase-space nonlocality of the two-mode squeezed vacuum.

Closed-form Wigner/Q quantities (:mod:`eprphase.analytics`), a Fock-space
oracle (:mod:`eprphase.fock`), Bell combinations and optimisers
(:mod:`eprphase.bell`), and a photodetection Monte Carlo
(:mod:`eprphase.detector`).
"""

__version__ = "0.1.0"

from .analytics import (  # noqa: E402
    PhasePoint,
    ch_asymptote,
    ch_closed_form,
    nocount_joint,
    nocount_single_a,
    nocount_single_b,
    parity_correlation,
    q_marginal_a,
    q_marginal_b,
    qfunc,
    wigner,
)
from .errors import RangeError, TruncationError  # noqa: E402
