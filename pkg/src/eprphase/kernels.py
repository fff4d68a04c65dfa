"""Hot inner loops, each in a numba and a pure-numpy flavour.

The module-level names ``displacement_table`` and ``tally_cells`` point at
the numba versions unless ``EPRPHASE_DISABLE_NUMBA`` is set.  Both flavours
are importable explicitly (``*_numba`` / ``*_numpy``) for benchmarking and
cross-checking.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

_BIG = 1e150
_LOG_BIG = math.log(_BIG)


def _displacement_table_py(x, size):
    # G[m, n] = |<m|D|n>| up to sign, for |alpha|^2 = x, via the normalised
    # associated-Laguerre recurrence along each diagonal k = |m - n|:
    #   f_j = sqrt(j!/(j+k)!) x^{k/2} e^{-x/2} L_j^{(k)}(x)
    # carried with a running log scale so f_0 may underflow safely.
    out = np.zeros((size + 1, size + 1))
    if x == 0.0:
        for i in range(size + 1):
            out[i, i] = 1.0
        return out
    log_x = math.log(x)
    for k in range(size + 1):
        scale = 0.5 * k * log_x - 0.5 * x - 0.5 * math.lgamma(k + 1.0)
        f_prev = 0.0
        f_cur = 1.0
        for j in range(size - k + 1):
            v = f_cur * math.exp(scale)
            out[j + k, j] = v
            out[j, j + k] = v
            f_next = ((2.0 * j + 1.0 + k - x) * f_cur - math.sqrt(j * (j + k)) * f_prev) / math.sqrt(
                (j + 1.0) * (j + 1.0 + k)
            )
            f_prev = f_cur
            f_cur = f_next
            if abs(f_cur) > _BIG:
                f_prev /= _BIG
                f_cur /= _BIG
                scale += _LOG_BIG
    return out


displacement_table_numba = njit(_displacement_table_py)


def displacement_table_numpy(x, size):
    """Vectorised over diagonals; same recurrence as the numba kernel."""
    out = np.zeros((size + 1, size + 1))
    if x == 0.0:
        np.fill_diagonal(out, 1.0)
        return out
    k = np.arange(size + 1, dtype=float)
    lgam = np.array([math.lgamma(kk + 1.0) for kk in k])
    scale = 0.5 * k * math.log(x) - 0.5 * x - 0.5 * lgam
    f_prev = np.zeros(size + 1)
    f_cur = np.ones(size + 1)
    idx = np.arange(size + 1)
    for j in range(size + 1):
        n_diag = size - j + 1
        kk = k[:n_diag]
        v = f_cur[:n_diag] * np.exp(scale[:n_diag])
        out[idx[:n_diag] + j, j] = v
        out[j, idx[:n_diag] + j] = v
        f_next = ((2.0 * j + 1.0 + kk - x) * f_cur[:n_diag] - np.sqrt(j * (j + kk)) * f_prev[:n_diag]) / np.sqrt(
            (j + 1.0) * (j + 1.0 + kk)
        )
        f_prev[:n_diag] = f_cur[:n_diag]
        f_cur[:n_diag] = f_next
        big = np.abs(f_next) > _BIG
        if big.any():
            sel = np.flatnonzero(big)
            f_prev[sel] /= _BIG
            f_cur[sel] /= _BIG
            scale[sel] += _LOG_BIG
    return out


def _tally_cells_py(cdf, u):
    # counts[i] = #{u : cdf[i-1] <= u < cdf[i]}, i.e. searchsorted(side="right")
    n_cells = cdf.shape[0]
    counts = np.zeros(n_cells, dtype=np.int64)
    for t in range(u.shape[0]):
        x = u[t]
        lo = 0
        hi = n_cells
        while lo < hi:
            mid = (lo + hi) >> 1
            if cdf[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        if lo >= n_cells:
            lo = n_cells - 1
        counts[lo] += 1
    return counts


tally_cells_numba = njit(_tally_cells_py)


def tally_cells_numpy(cdf, u):
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, cdf.shape[0] - 1, out=idx)
    return np.bincount(idx, minlength=cdf.shape[0]).astype(np.int64)


def lookup_cells(cdf, u):
    """Inverse-CDF cell index of each uniform draw."""
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, cdf.shape[0] - 1, out=idx)
    return idx


if USE_NUMBA:
    displacement_table = displacement_table_numba
    tally_cells = tally_cells_numba
else:
    displacement_table = displacement_table_numpy
    tally_cells = tally_cells_numpy
