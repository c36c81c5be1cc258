"""Probability densities on the plane: descriptors, samplers, exact region
masses and the asymptotic cost predictors.

Cost conventions used throughout the package: ``C_N`` is the total matching
cost (sum of squared distances) and ``W2sq = C_N / N``.  The predictors here
return the leading term of ``E[C_N]``.

The N-dependent families (Multiscaling, TruncatedGaussian) receive the sample
count at call sites instead of storing it, so one descriptor serves an entire
N-sweep.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    ConfigurationError,
    InputError,
    QuadratureError,
    UnsupportedCombinationError,
)
from .gaussmath import gauss_interval_mass, marsaglia_normal_points
from .geometry import Annulus, Rect, as_points

TWO_PI = 2.0 * math.pi
SQRT_2PI = math.sqrt(TWO_PI)


class PredictorMode(enum.Enum):
    """Prefactor selector: bipartite cost is asymptotically twice semidiscrete."""

    SEMIDISCRETE = "semidiscrete"
    BIPARTITE = "bipartite"

    @property
    def prefactor(self) -> float:
        return 1.0 / TWO_PI if self is PredictorMode.BIPARTITE else 1.0 / (2.0 * TWO_PI)


@dataclass(frozen=True)
class Density:
    """Base class; concrete families below."""

    @property
    def family(self) -> str:
        raise NotImplementedError

    def n_dependent(self) -> bool:
        return False


@dataclass(frozen=True)
class UniformSquare(Density):
    side: float = 1.0

    def __post_init__(self):
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ConfigurationError(f"side must be positive, got {self.side}")

    @property
    def family(self) -> str:
        return "uniform_square"


@dataclass(frozen=True)
class UniformDisk(Density):
    radius: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ConfigurationError(f"radius must be positive, got {self.radius}")

    @property
    def family(self) -> str:
        return "uniform_disk"


@dataclass(frozen=True)
class Multiscaling(Density):
    """Piecewise-constant density on concentric annuli.

    ``radii`` is the full boundary list 0 = s_0 < s_1 < ... < s_L = S and
    ``exponents`` the per-annulus list 1 = alpha_0 > alpha_1 > ... > 0.  At
    sample count n the annulus l >= 1 carries mass n^(alpha_l - 1) and the
    disk l = 0 the remainder.
    """

    radii: tuple[float, ...]
    exponents: tuple[float, ...]

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        exps = tuple(float(a) for a in self.exponents)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "exponents", exps)
        if len(radii) < 2 or radii[0] != 0.0:
            raise ConfigurationError("radii must start at 0 and contain the outer radius")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ConfigurationError("radii must be strictly increasing")
        if len(exps) != len(radii) - 1:
            raise ConfigurationError("need one exponent per annulus")
        if exps[0] != 1.0:
            raise ConfigurationError("the innermost exponent must equal 1")
        if any(a <= 0 for a in exps):
            raise ConfigurationError("exponents must be positive")
        if any(b >= a for a, b in zip(exps, exps[1:])):
            raise ConfigurationError("exponents must be strictly decreasing")

    @property
    def family(self) -> str:
        return "multiscaling"

    def n_dependent(self) -> bool:
        return True

    @property
    def levels(self) -> int:
        return len(self.exponents)

    @property
    def outer_radius(self) -> float:
        return self.radii[-1]

    def annulus_areas(self) -> np.ndarray:
        r = np.asarray(self.radii)
        return math.pi * (r[1:] ** 2 - r[:-1] ** 2)

    def annulus_masses(self, n: int) -> np.ndarray:
        """Per-annulus probability masses at sample count n."""
        _require_n(self, n)
        exps = np.asarray(self.exponents)
        masses = np.empty(self.levels)
        masses[1:] = n ** (exps[1:] - 1.0)
        masses[0] = 1.0 - masses[1:].sum()
        if masses[0] <= 0.0:
            raise ConfigurationError(
                f"multiscaling masses invalid at n={n}: inner annulus mass "
                f"{masses[0]:.3g} <= 0 (n too small for these exponents)"
            )
        return masses

    def annulus_values(self, n: int) -> np.ndarray:
        """Constant pdf value on each annulus."""
        return self.annulus_masses(n) / self.annulus_areas()

    def coefficient(self) -> float:
        """Sum over annuli of alpha_l |C_l|, the predictor slope coefficient."""
        return float(np.dot(self.exponents, self.annulus_areas()))


@dataclass(frozen=True)
class Gaussian2D(Density):
    """Standard planar Gaussian, optionally mean-shifted (variance stays I)."""

    mean: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        mean = (float(self.mean[0]), float(self.mean[1]))
        object.__setattr__(self, "mean", mean)
        if not all(math.isfinite(v) for v in mean):
            raise ConfigurationError("mean must be finite")

    @property
    def family(self) -> str:
        return "gaussian"

    @property
    def is_standard(self) -> bool:
        return self.mean == (0.0, 0.0)


@dataclass(frozen=True)
class Maxwellian(Density):
    """Uniform on [0, 1] in x1, standard Gaussian in x2."""

    @property
    def family(self) -> str:
        return "maxwellian"


@dataclass(frozen=True)
class TruncatedGaussian(Density):
    """Standard Gaussian restricted to the square cover E_N and renormalized.

    The support is fixed by the stored (n, alpha, eps); the ``n`` passed to
    pdf/sample is only the number of draws.
    """

    n: int
    alpha: float
    eps: float

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ConfigurationError(f"alpha must lie in (1, 2), got {self.alpha}")
        if not self.eps > 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.n < 3:
            raise ConfigurationError("n must be at least 3")

    @property
    def family(self) -> str:
        return "truncated_gaussian"

    def n_dependent(self) -> bool:
        return True

    def _partition(self):
        from .partition import build_gaussian_partition

        return build_gaussian_partition(self.n, self.alpha, self.eps)

    @property
    def support_mass(self) -> float:
        """Gaussian mass of E_N (the renormalization constant)."""
        return self._partition().rho_support


@dataclass(frozen=True)
class PointCloud:
    """Sampled planar points with provenance."""

    points: np.ndarray
    seed: int
    density: Density | None = None
    n: int = field(default=-1)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InputError(f"points must have shape (n, 2), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.n == -1:
            object.__setattr__(self, "n", len(pts))
        elif self.n != len(pts):
            raise InputError(f"n={self.n} does not match {len(pts)} points")

    def __len__(self) -> int:
        return self.n


def _require_n(d: Density, n) -> int:
    if n is None:
        raise InputError(f"{d.family} requires the sample count n")
    n = int(n)
    if d.n_dependent() and n < 2:
        raise InputError(f"{d.family} requires n >= 2, got {n}")
    return n


# ---------------------------------------------------------------------------
# pdf
# ---------------------------------------------------------------------------

def pdf(d: Density, p, n: int | None = None) -> np.ndarray | float:
    """Density value at point(s) p; zero outside the support.

    ``n`` is required for the N-dependent families and ignored otherwise.
    """
    pts = as_points(p)
    scalar = np.ndim(p) == 1
    if isinstance(d, UniformSquare):
        inside = Rect(0.0, 0.0, d.side, d.side).contains(pts)
        out = np.where(inside, 1.0 / d.side**2, 0.0)
    elif isinstance(d, UniformDisk):
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        out = np.where(r2 <= d.radius**2, 1.0 / (math.pi * d.radius**2), 0.0)
    elif isinstance(d, Multiscaling):
        values = d.annulus_values(_require_n(d, n))
        r = np.hypot(pts[:, 0], pts[:, 1])
        idx = np.searchsorted(d.radii, r, side="right") - 1
        inside = (r <= d.outer_radius) & (idx >= 0)
        idx = np.clip(idx, 0, d.levels - 1)
        out = np.where(inside, values[idx], 0.0)
    elif isinstance(d, Gaussian2D):
        dx = pts[:, 0] - d.mean[0]
        dy = pts[:, 1] - d.mean[1]
        out = np.exp(-0.5 * (dx * dx + dy * dy)) / TWO_PI
    elif isinstance(d, Maxwellian):
        inside = (pts[:, 0] >= 0.0) & (pts[:, 0] <= 1.0)
        out = np.where(inside, np.exp(-0.5 * pts[:, 1] ** 2) / SQRT_2PI, 0.0)
    elif isinstance(d, TruncatedGaussian):
        part = d._partition()
        inside = part.contains(pts)
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        out = np.where(inside, np.exp(-0.5 * r2) / (TWO_PI * part.rho_support), 0.0)
    else:
        raise ConfigurationError(f"unknown density {d!r}")
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample(d: Density, n: int, seed: int) -> PointCloud:
    """n iid draws from d, bit-reproducible from (descriptor, n, seed)."""
    if n < 0:
        raise InputError("n must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    if n == 0:
        pts = np.empty((0, 2))
    elif isinstance(d, UniformSquare):
        pts = rng.random((n, 2)) * d.side
    elif isinstance(d, UniformDisk):
        pts = _sample_radial(rng, n, np.array([0.0, d.radius]), np.array([1.0]))
    elif isinstance(d, Multiscaling):
        masses = d.annulus_masses(_require_n(d, n))
        pts = _sample_radial(rng, n, np.asarray(d.radii), masses)
    elif isinstance(d, Gaussian2D):
        pts = marsaglia_normal_points(rng, n) + np.asarray(d.mean)
    elif isinstance(d, Maxwellian):
        x1 = rng.random(n)
        x2 = marsaglia_normal_points(rng, (n + 1) // 2).ravel()[:n]
        pts = np.column_stack([x1, x2])
    elif isinstance(d, TruncatedGaussian):
        pts = _sample_truncated(rng, d, n)
    else:
        raise ConfigurationError(f"unknown density {d!r}")
    return PointCloud(points=pts, seed=int(seed), density=d, n=n)


def _sample_radial(rng, n, radii, masses):
    """Radial sampler: level by mass, then r = sqrt(s_l^2 + U (s_{l+1}^2 - s_l^2))."""
    cum = np.cumsum(masses)
    cum[-1] = 1.0
    levels = np.searchsorted(cum, rng.random(n), side="right")
    levels = np.minimum(levels, len(masses) - 1)
    lo2 = radii[levels] ** 2
    hi2 = radii[levels + 1] ** 2
    r = np.sqrt(lo2 + rng.random(n) * (hi2 - lo2))
    theta = rng.random(n) * TWO_PI
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _sample_truncated(rng, d: TruncatedGaussian, n: int) -> np.ndarray:
    part = d._partition()
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        batch = max(n - filled + 8, 16)
        cand = marsaglia_normal_points(rng, batch)
        keep = cand[part.contains(cand)]
        take = min(len(keep), n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


# ---------------------------------------------------------------------------
# exact region masses
# ---------------------------------------------------------------------------

def region_mass(d: Density, region, n: int | None = None) -> float:
    """Exact probability mass of an Annulus or Rect under d (closed forms)."""
    from .partition import Cell

    if isinstance(region, Cell):
        region = region.bounds

    if isinstance(region, Annulus):
        return _annulus_mass(d, region, n)
    if isinstance(region, Rect):
        return _rect_mass(d, region, n)
    raise UnsupportedCombinationError(f"unsupported region type {type(region).__name__}")


def _annulus_mass(d: Density, a: Annulus, n) -> float:
    if isinstance(d, UniformDisk):
        lo = min(a.r_inner, d.radius)
        hi = min(a.r_outer, d.radius)
        return (hi * hi - lo * lo) / d.radius**2
    if isinstance(d, Multiscaling):
        values = d.annulus_values(_require_n(d, n))
        total = 0.0
        for lvl in range(d.levels):
            lo = max(a.r_inner, d.radii[lvl])
            hi = min(a.r_outer, d.radii[lvl + 1])
            if hi > lo:
                total += values[lvl] * math.pi * (hi * hi - lo * lo)
        return total
    if isinstance(d, Gaussian2D) and d.is_standard:
        return math.exp(-0.5 * a.r_inner**2) - math.exp(-0.5 * a.r_outer**2)
    raise UnsupportedCombinationError(
        f"no closed-form annulus mass for {d.family}"
    )


def _rect_mass(d: Density, r: Rect, n) -> float:
    if isinstance(d, UniformSquare):
        overlap = r.intersect(Rect(0.0, 0.0, d.side, d.side))
        return 0.0 if overlap is None else overlap.area / d.side**2
    if isinstance(d, Gaussian2D):
        mx = float(gauss_interval_mass(r.x0 - d.mean[0], r.x1 - d.mean[0]))
        my = float(gauss_interval_mass(r.y0 - d.mean[1], r.y1 - d.mean[1]))
        return mx * my
    if isinstance(d, Maxwellian):
        w = max(0.0, min(r.x1, 1.0) - max(r.x0, 0.0))
        return w * float(gauss_interval_mass(r.y0, r.y1))
    if isinstance(d, TruncatedGaussian):
        part = d._partition()
        total = 0.0
        for cell in part.cells:
            clipped = cell.bounds.intersect(r)
            if clipped is not None:
                total += float(
                    gauss_interval_mass(clipped.x0, clipped.x1)
                    * gauss_interval_mass(clipped.y0, clipped.y1)
                )
        return total / part.rho_support
    raise UnsupportedCombinationError(f"no closed-form rectangle mass for {d.family}")


# ---------------------------------------------------------------------------
# predictors
# ---------------------------------------------------------------------------

def predictor_numeric(d: Density, n: int, mode: PredictorMode) -> float:
    """prefactor * integral of log(n rho(x)) over the super-level set {rho > 1/n}.

    Radial families integrate the exact 1D radial reduction with adaptive
    Gauss-Kronrod quadrature; the Maxwellian uses the product rule; piecewise
    constant families integrate exactly.
    """
    n = _require_n(d, n)
    if n < 2:
        raise InputError("predictor requires n >= 2")
    if isinstance(d, UniformSquare):
        area = d.side**2
        integral = area * max(math.log(n / area), 0.0)
    elif isinstance(d, UniformDisk):
        area = math.pi * d.radius**2
        integral = area * max(math.log(n / area), 0.0)
    elif isinstance(d, Multiscaling):
        values = d.annulus_values(n)
        areas = d.annulus_areas()
        integral = float(
            np.sum(areas * np.maximum(np.log(n * values), 0.0))
        )
    elif isinstance(d, Gaussian2D):
        if n <= TWO_PI:
            integral = 0.0
        else:
            lvl = math.log(n / TWO_PI)
            radius = math.sqrt(2.0 * lvl)

            def integrand(r):
                return TWO_PI * r * (lvl - 0.5 * r * r)

            integral = _quad(integrand, 0.0, radius)
    elif isinstance(d, Maxwellian):
        if n <= SQRT_2PI:
            integral = 0.0
        else:
            lvl = math.log(n / SQRT_2PI)
            z = math.sqrt(2.0 * lvl)

            def integrand(t):
                return lvl - 0.5 * t * t

            integral = _quad(integrand, -z, z)
    elif isinstance(d, TruncatedGaussian):
        integral = _truncated_gaussian_predictor_integral(d, n)
    else:
        raise ConfigurationError(f"unknown density {d!r}")
    return mode.prefactor * integral


def _quad(f, a, b) -> float:
    val, err = integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)
    if not math.isfinite(val) or (abs(val) > 1e-9 and err > 1e-6 * abs(val)):
        raise QuadratureError(
            f"quadrature failed on [{a}, {b}]: value={val}, err={err}"
        )
    return val


def _truncated_gaussian_predictor_integral(d: TruncatedGaussian, n: int) -> float:
    """Cellwise-exact integral of [log(n rho_N)]_+ over E_N.

    On each grid cell the integrand is K - (x^2 + y^2)/2 with
    K = log(n / (2 pi rho(E_N))); cells fully inside the level disk get the
    exact polynomial integral and straddling cells fall back to 2D quadrature.
    """
    part = d._partition()
    k_level = math.log(n / (TWO_PI * part.rho_support))
    if k_level <= 0:
        return 0.0
    r2_level = 2.0 * k_level
    total = 0.0
    for cell in part.cells:
        b = cell.bounds
        cx = max(abs(b.x0), abs(b.x1))
        cy = max(abs(b.y0), abs(b.y1))
        far2 = cx * cx + cy * cy
        if far2 <= r2_level:
            ix = (b.x1**3 - b.x0**3) / 3.0
            iy = (b.y1**3 - b.y0**3) / 3.0
            total += k_level * b.area - 0.5 * (ix * b.height + iy * b.width)
            continue
        nx = 0.0 if b.x0 <= 0.0 <= b.x1 else min(abs(b.x0), abs(b.x1))
        ny = 0.0 if b.y0 <= 0.0 <= b.y1 else min(abs(b.y0), abs(b.y1))
        if nx * nx + ny * ny >= r2_level:
            continue
        val, _ = integrate.dblquad(
            lambda y, x: max(k_level - 0.5 * (x * x + y * y), 0.0),
            b.x0, b.x1, b.y0, b.y1, epsabs=1e-12,
        )
        total += val
    return total


def predictor_closed_form(d: Density, n: int, mode: PredictorMode) -> float:
    """The leading asymptotic term of E[C_N] for the closed-form families."""
    n = _require_n(d, n)
    log_n = math.log(n)
    if isinstance(d, UniformSquare):
        lead = d.side**2 * log_n
    elif isinstance(d, UniformDisk):
        lead = math.pi * d.radius**2 * log_n
    elif isinstance(d, Multiscaling):
        lead = d.coefficient() * log_n
    elif isinstance(d, Gaussian2D):
        lead = math.pi * log_n**2
    elif isinstance(d, Maxwellian):
        lead = (4.0 * math.sqrt(2.0) / 3.0) * log_n**1.5
    else:
        raise UnsupportedCombinationError(
            f"no closed-form predictor for {d.family}; use predictor_numeric"
        )
    return mode.prefactor * lead


def riemann_multiscaling_config(levels: int, radius: float) -> Multiscaling:
    """Multiscaling family with c_l = l/L, s_l = c_l S and alpha_l = 1 - c_l^2.

    Its predictor coefficient converges to pi S^2 / 2 as the number of levels
    grows (error ~ 4/(3L)).
    """
    if levels < 1:
        raise ConfigurationError("levels must be >= 1")
    if radius <= 0:
        raise ConfigurationError("radius must be positive")
    c = np.arange(levels + 1) / levels
    radii = tuple(c * radius)
    exponents = tuple(1.0 - c[:-1] ** 2)
    return Multiscaling(radii=radii, exponents=exponents)


# ---------------------------------------------------------------------------
# JSON serialization (schema: src/matchlab/schemas/density.schema.json)
# ---------------------------------------------------------------------------

def density_to_json(d: Density) -> dict:
    if isinstance(d, UniformSquare):
        return {"family": d.family, "side": d.side}
    if isinstance(d, UniformDisk):
        return {"family": d.family, "radius": d.radius}
    if isinstance(d, Multiscaling):
        return {
            "family": d.family,
            "radii": list(d.radii),
            "exponents": list(d.exponents),
        }
    if isinstance(d, Gaussian2D):
        out = {"family": d.family}
        if not d.is_standard:
            out["mean"] = list(d.mean)
        return out
    if isinstance(d, Maxwellian):
        return {"family": d.family}
    if isinstance(d, TruncatedGaussian):
        return {"family": d.family, "n": d.n, "alpha": d.alpha, "eps": d.eps}
    raise ConfigurationError(f"unknown density {d!r}")


def density_from_json(obj: dict | str) -> Density:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "family" not in obj:
        raise ConfigurationError("density JSON must be an object with a 'family' key")
    obj = dict(obj)
    family = obj.pop("family")
    try:
        if family == "uniform_square":
            return UniformSquare(**obj)
        if family == "uniform_disk":
            return UniformDisk(**obj)
        if family == "multiscaling":
            return Multiscaling(
                radii=tuple(obj.pop("radii")), exponents=tuple(obj.pop("exponents")), **obj
            )
        if family == "gaussian":
            if "mean" in obj:
                obj["mean"] = tuple(obj["mean"])
            return Gaussian2D(**obj)
        if family == "maxwellian":
            return Maxwellian(**obj)
        if family == "truncated_gaussian":
            return TruncatedGaussian(**obj)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for family {family!r}: {exc}") from exc
    raise ConfigurationError(f"unknown density family {family!r}")
