"""Hot numeric kernels.

Each kernel exists twice: a numba-compiled loop and a numpy expression.
The public names at the bottom of this module are bound to one or the other
at import time according to :data:`stratmc._accel.USE_NUMBA`. Both variants
are importable directly (``*_numba`` / ``*_numpy``) for benchmarking and for
the cross-backend tests.
"""
import math

import numpy as np
from scipy.special import erfc as _erfc

from ._accel import USE_NUMBA, njit

# Acklam's rational approximation to the normal quantile, lower half.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# clamp range for the quantile argument
U_MIN = 2.0 ** -53
U_MAX = 1.0 - 2.0 ** -53


# ---------------------------------------------------------------- numba ---

@njit(cache=True)
def _ppf_lower_scalar(p):
    # p in (0, 0.5]
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    # one Halley step against the exact cdf
    e = 0.5 * math.erfc(-x / _SQRT2) - p
    u = e * _SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True)
def _ppf_scalar(p):
    if not p > U_MIN:
        p = U_MIN
    elif not p < U_MAX:
        p = U_MAX
    if p > 0.5:
        return -_ppf_lower_scalar(1.0 - p)
    return _ppf_lower_scalar(p)


@njit(cache=True)
def norm_ppf_numba(u):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _ppf_scalar(u[i])
    return out


@njit(cache=True)
def gbm_advance_numba(s, u, drift, vol):
    out = np.empty(s.shape[0])
    for i in range(s.shape[0]):
        out[i] = s[i] * math.exp(drift + vol * _ppf_scalar(u[i]))
    return out


@njit(cache=True)
def asian_advance_numba(s, g, u, drift, vol, p):
    s_new = np.empty(s.shape[0])
    g_new = np.empty(s.shape[0])
    for i in range(s.shape[0]):
        log_s = math.log(s[i]) + drift + vol * _ppf_scalar(u[i])
        s_new[i] = math.exp(log_s)
        if p == 0:
            g_new[i] = s_new[i]
        else:
            g_new[i] = math.exp((p * math.log(g[i]) + log_s) / (p + 1))
    return s_new, g_new


@njit(cache=True)
def select_index_numba(w, s, n, d):
    last = n ** (1 + d)
    out = np.empty(w.shape[0], dtype=np.int64)
    for k in range(w.shape[0]):
        q = 0
        for i in range(s - 1):
            q = q * n + int(math.floor(n * w[k, i]))
        out[k] = q * last + int(math.floor(last * w[k, s - 1]))
    return out


@njit(cache=True)
def place_numba(cell, u, m, coarse, mc):
    out = np.empty(cell.shape[0])
    for k in range(cell.shape[0]):
        x = (cell[k] + u[k]) / m
        for _ in range(64):
            a = math.floor(x * m)
            b = math.floor(x * mc)
            if a > cell[k] or b > coarse[k]:
                x = np.nextafter(x, -np.inf)
            elif a < cell[k] or b < coarse[k]:
                x = np.nextafter(x, np.inf)
            else:
                break
        out[k] = x
    return out


# ---------------------------------------------------------------- numpy ---

def _poly(coeffs, x):
    acc = np.full_like(x, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * x + c
    return acc


def _ppf_lower_numpy(p):
    x = np.empty_like(p)
    tail = p < _P_LOW
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        x[tail] = _poly(_C, q) / (_poly(_D, q) * q + 1.0)
    mid = ~tail
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        x[mid] = _poly(_A, r) * q / (_poly(_B, r) * r + 1.0)
    e = 0.5 * _erfc(-x / _SQRT2) - p
    u = e * _SQRT2PI * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def norm_ppf_numpy(u):
    p = np.clip(np.asarray(u, dtype=float), U_MIN, U_MAX)
    upper = p > 0.5
    lower_arg = np.where(upper, 1.0 - p, p)
    x = _ppf_lower_numpy(lower_arg)
    return np.where(upper, -x, x)


def gbm_advance_numpy(s, u, drift, vol):
    return s * np.exp(drift + vol * norm_ppf_numpy(u))


def asian_advance_numpy(s, g, u, drift, vol, p):
    log_s = np.log(s) + drift + vol * norm_ppf_numpy(u)
    s_new = np.exp(log_s)
    if p == 0:
        return s_new, s_new.copy()
    return s_new, np.exp((p * np.log(g) + log_s) / (p + 1))


def select_index_numpy(w, s, n, d):
    last = n ** (1 + d)
    q = np.zeros(w.shape[0], dtype=np.int64)
    for i in range(s - 1):
        q = q * n + np.floor(n * w[:, i]).astype(np.int64)
    return q * last + np.floor(last * w[:, s - 1]).astype(np.int64)


def place_numpy(cell, u, m, coarse, mc):
    x = (cell + u) / m
    for _ in range(64):
        a = np.floor(x * m)
        b = np.floor(x * mc)
        high = (a > cell) | (b > coarse)
        low = ~high & ((a < cell) | (b < coarse))
        if not (high.any() or low.any()):
            return x
        x[high] = np.nextafter(x[high], -np.inf)
        x[low] = np.nextafter(x[low], np.inf)
    raise RuntimeError("could not place coordinates inside their cells")


# ------------------------------------------------------------- dispatch ---

if USE_NUMBA:
    _norm_ppf = norm_ppf_numba
    gbm_advance = gbm_advance_numba
    asian_advance = asian_advance_numba
    _select_index = select_index_numba
    _place = place_numba
else:
    _norm_ppf = norm_ppf_numpy
    gbm_advance = gbm_advance_numpy
    asian_advance = asian_advance_numpy
    _select_index = select_index_numpy
    _place = place_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"


def norm_ppf(u):
    """Standard normal quantile of ``u`` (scalar or 1-d array).

    Arguments outside the open unit interval are clamped to
    ``[U_MIN, U_MAX]`` rather than rejected.
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        return float(_norm_ppf(arr.reshape(1))[0])
    return _norm_ppf(np.ascontiguousarray(arr.ravel())).reshape(arr.shape)


def select_index(w, s, n, d):
    """Flat label position of the state picked by each row of ``w``.

    Only the first ``s`` columns of ``w`` are read.
    """
    return _select_index(np.ascontiguousarray(w, dtype=float), s, n, d)


def place(cell, u, m, coarse=None, mc=None):
    """Coordinates ``(cell + u) / m`` pinned so ``floor(x * m) == cell``.

    With ``coarse``/``mc`` given, ``floor(x * mc) == coarse`` is enforced as
    well (the coarse cell must contain the fine one). Rounding can push
    ``(cell + u) / m`` across a cell boundary; offending values are moved
    back by single ulps.
    """
    cell = np.ascontiguousarray(cell, dtype=np.int64)
    if coarse is None:
        coarse, mc = cell, m
    return _place(cell, np.ascontiguousarray(u, dtype=float), float(m),
                  np.ascontiguousarray(coarse, dtype=np.int64), float(mc))


def warmup():
    """Compile (or load from cache) every kernel so later timings exclude JIT cost."""
    u = np.linspace(0.01, 0.99, 8)
    s = np.ones(8)
    norm_ppf(u)
    gbm_advance(s, u, 0.0, 0.1)
    asian_advance(s, s, u, 0.0, 0.1, 0)
    asian_advance(s, s, u, 0.0, 0.1, 1)
    select_index(np.column_stack((u, u)), 1, 2, 1)
    place(np.zeros(8, dtype=np.int64), u, 2.0)
