"""Scalar Gaussian helpers shared by densities, partition and bounds.

Interval masses are computed from the erfc of the tail-side endpoint so they
stay accurate far from the origin instead of cancelling.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)
LOG_2PI = np.log(2.0 * np.pi)


def phi(z):
    """Standard normal pdf."""
    z = np.asarray(z, dtype=np.float64)
    return np.exp(-0.5 * z * z) / _SQRT2PI


def gauss_cdf(z):
    z = np.asarray(z, dtype=np.float64)
    return special.ndtr(z)


def gauss_interval_mass(a, b):
    """P(a < Z < b) for standard normal Z, stable in both tails.

    Both endpoints are mapped to the same side before differencing, so the
    result keeps relative accuracy even when the interval sits many sigma out.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # reflect intervals on the negative axis onto the positive one
    neg = hi <= 0
    lo_r = np.where(neg, -hi, lo)
    hi_r = np.where(neg, -lo, hi)
    straddle = lo_r < 0
    # one-sided: 0 <= lo_r < hi_r, use erfc differences (no cancellation at 0.5)
    one_sided = 0.5 * (special.erfc(lo_r / _SQRT2) - special.erfc(hi_r / _SQRT2))
    both = special.ndtr(hi_r) - special.ndtr(lo_r)
    return np.where(straddle, both, one_sided)


def gauss_interval_logmass(a, b):
    """log P(a < Z < b), usable when the mass underflows a float."""
    a = float(a)
    b = float(b)
    lo, hi = min(a, b), max(a, b)
    if hi <= 0:
        lo, hi = -hi, -lo
    if lo < 0:
        return float(np.log(special.ndtr(hi) - special.ndtr(lo)))
    # log[ Phi(-lo) - Phi(-hi) ] via log_ndtr, asymptotic-safe in the far tail
    la = special.log_ndtr(-lo)
    lb = special.log_ndtr(-hi)
    return float(la + np.log1p(-np.exp(lb - la)))


# Acklam's rational approximation to the standard normal quantile,
# refined by one Halley step.
_PPF_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
          1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_PPF_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
          6.680131188771972e01, -1.328068155288572e01)
_PPF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
          -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_PPF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
          3.754408661907416e00)


def norm_ppf(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        if p == 0.0:
            return -np.inf
        if p == 1.0:
            return np.inf
        raise ValueError(f"p={p} outside [0, 1]")
    p_low = 0.02425
    a, b, c, d = _PPF_A, _PPF_B, _PPF_C, _PPF_D
    if p < p_low:
        q = np.sqrt(-2.0 * np.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        )
    else:
        q = np.sqrt(-2.0 * np.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # one Halley step on Phi(x) - p
    e = special.ndtr(x) - p
    u = e * _SQRT2PI * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return float(x)


def marsaglia_normal_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """n iid standard 2D normal points via the Marsaglia polar method.

    Each accepted (u, v) pair in the unit disk yields one 2D point, so the
    draw sequence (and hence the output) is fully determined by the generator
    state.
    """
    out = np.empty((n, 2), dtype=np.float64)
    filled = 0
    while filled < n:
        need = n - filled
        batch = max(int(need * 1.35) + 8, 16)
        uv = rng.random((batch, 2)) * 2.0 - 1.0
        s = uv[:, 0] ** 2 + uv[:, 1] ** 2
        keep = (s > 0.0) & (s < 1.0)
        uv = uv[keep]
        s = s[keep]
        factor = np.sqrt(-2.0 * np.log(s) / s)
        pts = uv * factor[:, None]
        take = min(len(pts), need)
        out[filled : filled + take] = pts[:take]
        filled += take
    return out


_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer; the record-seed mixer for the harness."""
    z = x & _MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64
