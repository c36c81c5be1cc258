"""Analytic upper bounds on transport costs.

``talagrand_bound`` returns twice the relative entropy against the standard
planar Gaussian: the factor two is the form that is tight for a mean-shifted
Gaussian (W2^2 = |v|^2 with KL = |v|^2 / 2), and the one every consumer here
relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import (
    Density,
    Gaussian2D,
    Maxwellian,
    Multiscaling,
    TruncatedGaussian,
    UniformDisk,
    UniformSquare,
)
from .errors import DivergenceError, InputError, MatchlabError
from .gaussmath import LOG_2PI, gauss_interval_logmass
from .partition import GridPartition, build_gaussian_partition


@dataclass(frozen=True)
class AnnulusCounts:
    """Observed per-annulus sample counts for a multiscaling density."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 0 for c in counts):
            raise InputError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.counts)


def talagrand_bound(m: Density, n: int | None = None) -> float:
    """Upper bound 2 KL(m || standard Gaussian) on W2^2(gaussian, m).

    ``n`` is required for the N-dependent families.
    """
    if isinstance(m, Gaussian2D):
        return m.mean[0] ** 2 + m.mean[1] ** 2
    if isinstance(m, TruncatedGaussian):
        return 2.0 * math.log(1.0 / m.support_mass)
    if isinstance(m, UniformSquare):
        # KL = -H(m) + log(2 pi) + E|x|^2 / 2, H = 2 log side, E|x|^2 = 2 side^2 / 3
        kl = -2.0 * math.log(m.side) + LOG_2PI + m.side**2 / 3.0
    elif isinstance(m, UniformDisk):
        kl = -math.log(math.pi * m.radius**2) + LOG_2PI + m.radius**2 / 4.0
    elif isinstance(m, Multiscaling):
        if n is None:
            raise InputError("multiscaling needs the sample count n")
        values = m.annulus_values(n)
        masses = m.annulus_masses(n)
        radii = np.asarray(m.radii)
        # E|x|^2 restricted to each annulus: value * 2 pi (s4 - s4') / 4
        second = values * 2.0 * math.pi * (radii[1:] ** 4 - radii[:-1] ** 4) / 4.0
        kl = float(np.dot(masses, np.log(values)) + LOG_2PI + second.sum() / 2.0)
    elif isinstance(m, Maxwellian):
        # against the Gaussian, only the x1 factor contributes
        kl = 1.0 / 6.0 + 0.5 * LOG_2PI
    else:
        raise DivergenceError(f"no KL formula for density {m!r}")
    if not math.isfinite(kl) or kl < -1e-12:
        raise DivergenceError(f"relative entropy undefined: {kl}")
    return 2.0 * max(kl, 0.0)


def cutoff_bound(n: int, alpha: float, eps: float) -> float:
    """2 log(1 / rho(E_N)): bound on W2^2 between the Gaussian and its
    renormalized restriction to the square cover E_N."""
    part = build_gaussian_partition(n, alpha, eps)
    return 2.0 * math.log(1.0 / part.rho_support)


def radial_bb_bound(d: Multiscaling, counts: AnnulusCounts) -> float:
    """Radial potential-energy bound on W2^2 between the multiscaling density
    and its counts-reweighted version.

    Per annulus: 4 / rho_l * integral over (s_l, s_{l+1}) of
    (cumulative deficit + annulus deficit * (r^2 - s_l^2)/(s_{l+1}^2 - s_l^2))^2
    / (2 pi r) dr, by adaptive Simpson to 1e-8 relative.
    """
    if not isinstance(d, Multiscaling):
        raise InputError("radial_bb_bound expects a multiscaling density")
    if len(counts.counts) != d.levels:
        raise InputError(f"need {d.levels} annulus counts, got {len(counts.counts)}")
    n = counts.total
    if n < 1:
        raise InputError("counts must sum to a positive n")
    masses = d.annulus_masses(n)
    values = d.annulus_values(n)
    if (values <= 0.0).any():
        raise InputError("zero-mass annulus")
    counts_frac = np.asarray(counts.counts, dtype=np.float64) / n
    total = 0.0
    cum_deficit = 0.0
    for lvl in range(d.levels):
        s_lo, s_hi = d.radii[lvl], d.radii[lvl + 1]
        ann_deficit = masses[lvl] - counts_frac[lvl]
        width2 = s_hi**2 - s_lo**2

        def integrand(r, c=cum_deficit, a=ann_deficit, lo=s_lo, w2=width2):
            if r <= 0.0:
                return 0.0
            num = c + a * (r * r - lo * lo) / w2
            return num * num / (2.0 * math.pi * r)

        total += _adaptive_simpson(integrand, s_lo, s_hi, 1e-8) / values[lvl]
        cum_deficit += ann_deficit
    return 4.0 * total


def _adaptive_simpson(f, a, b, rel_tol, max_depth=48):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(abs(whole), 1e-300)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1
    )


def cell_entropy_sum(part: GridPartition, n: int) -> float:
    """Sum over partition cells of |Q| log(n rho_N(Q)); rho_N(Q) are the exact
    erf-product cell masses of the renormalized cut-off density."""
    if n != part.n:
        raise InputError("partition was built for a different n")
    log_n = math.log(n)
    log_support = math.log(part.rho_support)
    total = 0.0
    for cell, mass in zip(part.cells, part.cell_masses):
        if mass > 1e-280:
            log_mass = math.log(mass)
        else:
            # log-space fallback for far-tail cells
            b = cell.bounds
            log_mass = gauss_interval_logmass(b.y0, b.y1)
            if part.kind == "gaussian":
                log_mass += gauss_interval_logmass(b.x0, b.x1)
            else:
                log_mass += math.log(part.step)
        val = log_n + log_mass - log_support
        if not math.isfinite(val):
            raise MatchlabError(
                f"cell ({cell.j}, {cell.k}) has nonpositive expected count"
            )
        total += cell.bounds.area * val
    return total
