"""Cut-off grid geometry for the Gaussian and Maxwellian densities.

The Gaussian kind covers the disk {|x| <= r_N}, r_N = sqrt(2 log(n / (log n)^alpha)),
with the minimal set of squares of side eps / r_N; the Maxwellian kind covers
(0, 1) x (-r_tilde, r_tilde) with squares of side 1 / (m floor(r_N)), where
r_tilde is rounded up so that r_tilde * m * floor(r_N) is an integer.

Cells are half-open [a_j, a_{j+1}) x [b_k, b_{k+1}) so point-in-cell is
unambiguous; ties on the outermost ring resolve inward.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError
from .gaussmath import gauss_interval_mass, norm_ppf
from .geometry import Rect, as_points

_SQRT2PI = math.sqrt(2.0 * math.pi)


def cutoff_radius(n: int, alpha: float) -> float:
    """r_N = sqrt(2 log(n / (log n)^alpha))."""
    if n < 3:
        raise ConfigurationError("n must be at least 3")
    if not (1.0 < alpha < 2.0):
        raise ConfigurationError(f"alpha must lie in (1, 2), got {alpha}")
    r2 = 2.0 * (math.log(n) - alpha * math.log(math.log(n)))
    if r2 <= 0.0:
        raise InputError(f"degenerate cutoff: r_N^2 = {r2:.3g} <= 0 at n={n}")
    return math.sqrt(r2)


@dataclass(frozen=True)
class Cell:
    """Grid cell (a_j, a_{j+1}) x (b_k, b_{k+1})."""

    j: int
    k: int
    bounds: Rect


@dataclass(frozen=True)
class ChernoffEvent:
    theta: float
    xi: float
    holds: bool
    worst_cell: tuple[int, int]
    worst_rel_deviation: float


@dataclass(frozen=True)
class GridPartition:
    kind: str  # "gaussian" | "maxwellian"
    n: int
    alpha: float
    eps: float | None
    m: int | None
    r_n: float
    r_tilde: float | None
    step: float
    k_min: int
    k_max: int
    j_ranges: dict[int, tuple[int, int]]
    cells: tuple[Cell, ...]
    cell_masses: np.ndarray  # untruncated Gaussian/Maxwellian mass per cell
    rho_support: float  # density mass of the support E_N (per-row erf products)
    min_expected_count: float  # min over cells of n * mass / rho_support
    expected_count_constant: float  # min_expected / (eps^2 (log n)^(alpha-1))
    distortion_eps: float  # global bound on |a_{j+1}^2 - a_j^2| over both axes
    _index: dict[tuple[int, int], int] = field(repr=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def cell_area(self) -> float:
        return self.step * self.step

    def truncated_masses(self) -> np.ndarray:
        """Per-cell mass under the renormalized (cut-off) density."""
        return self.cell_masses / self.rho_support

    def expected_counts(self) -> np.ndarray:
        return self.n * self.truncated_masses()

    def cell_of(self, j: int, k: int) -> Cell:
        return self.cells[self._index[(j, k)]]

    def grid_indices(self, pts: np.ndarray) -> np.ndarray:
        """Cell index per point, -1 when outside the support."""
        pts = as_points(pts)
        j = np.floor(pts[:, 0] / self.step).astype(np.int64)
        k = np.floor(pts[:, 1] / self.step).astype(np.int64)
        out = np.full(len(pts), -1, dtype=np.int64)
        inside_k = (k >= self.k_min) & (k <= self.k_max)
        for idx in np.nonzero(inside_k)[0]:
            rng = self.j_ranges.get(int(k[idx]))
            if rng is not None and rng[0] <= j[idx] <= rng[1]:
                out[idx] = self._index[(int(j[idx]), int(k[idx]))]
        return out

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return self.grid_indices(pts) >= 0

    def counts_per_cell(self, pts: np.ndarray) -> np.ndarray:
        idx = self.grid_indices(pts)
        if (idx < 0).any():
            raise InputError("some points fall outside the partition support")
        return np.bincount(idx, minlength=len(self.cells)).astype(np.int64)


@functools.lru_cache(maxsize=32)
def build_gaussian_partition(n: int, alpha: float, eps: float) -> GridPartition:
    """Minimal square cover of the disk {|x| <= r_N} with side eps / r_N."""
    if eps <= 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    r_n = cutoff_radius(n, alpha)
    step = eps / r_n
    k_lim = math.floor(r_n * r_n / eps)
    k_min, k_max = -k_lim - 1, k_lim

    cells: list[Cell] = []
    j_ranges: dict[int, tuple[int, int]] = {}
    masses: list[float] = []
    row_y_masses = {}
    rho_support = 0.0
    for k in range(k_min, k_max + 1):
        b0, b1 = k * step, (k + 1) * step
        dy = 0.0 if b0 <= 0.0 <= b1 else min(abs(b0), abs(b1))
        w2 = r_n * r_n - dy * dy
        if w2 <= 0.0:
            raise ConfigurationError(
                f"empty grid row k={k} at n={n}, alpha={alpha}, eps={eps}"
            )
        half_width = math.sqrt(w2)
        j_max = math.ceil(half_width / step) - 1
        j_min = -j_max - 1
        j_ranges[k] = (j_min, j_max)
        my = float(gauss_interval_mass(b0, b1))
        row_y_masses[k] = my
        rho_support += my * float(
            gauss_interval_mass(j_min * step, (j_max + 1) * step)
        )
        for j in range(j_min, j_max + 1):
            a0, a1 = j * step, (j + 1) * step
            cells.append(Cell(j=j, k=k, bounds=Rect(a0, b0, a1, b1)))
            masses.append(float(gauss_interval_mass(a0, a1)) * my)

    return _finalize_partition(
        kind="gaussian", n=n, alpha=alpha, eps=eps, m=None, r_n=r_n, r_tilde=None,
        step=step, k_min=k_min, k_max=k_max, j_ranges=j_ranges, cells=cells,
        masses=np.asarray(masses), rho_support=rho_support,
    )


@functools.lru_cache(maxsize=32)
def build_maxwell_partition(n: int, alpha: float, m: int) -> GridPartition:
    """Square cover of (0, 1) x (-r_tilde, r_tilde), side 1 / (m floor(r_N))."""
    if m < 1:
        raise ConfigurationError(f"m must be a positive integer, got {m}")
    r_n = cutoff_radius(n, alpha)
    denom = m * math.floor(r_n)
    if denom < 1:
        raise ConfigurationError(f"floor(r_N) = 0 at n={n}; n too small")
    k_top = math.floor(denom * r_n) + 1  # r_tilde * denom, exactly an integer
    r_tilde = k_top / denom
    step = 1.0 / denom

    cells: list[Cell] = []
    j_ranges: dict[int, tuple[int, int]] = {}
    masses: list[float] = []
    rho_support = 0.0
    k_min, k_max = -k_top, k_top - 1
    for k in range(k_min, k_max + 1):
        b0, b1 = k * step, (k + 1) * step
        my = float(gauss_interval_mass(b0, b1))
        j_ranges[k] = (0, denom - 1)
        rho_support += my  # full unit width in x1
        for j in range(denom):
            a0, a1 = j * step, (j + 1) * step
            cells.append(Cell(j=j, k=k, bounds=Rect(a0, b0, a1, b1)))
            masses.append(step * my)

    return _finalize_partition(
        kind="maxwellian", n=n, alpha=alpha, eps=None, m=m, r_n=r_n,
        r_tilde=r_tilde, step=step, k_min=k_min, k_max=k_max,
        j_ranges=j_ranges, cells=cells, masses=np.asarray(masses),
        rho_support=rho_support,
    )


def _finalize_partition(*, kind, n, alpha, eps, m, r_n, r_tilde, step, k_min,
                        k_max, j_ranges, cells, masses, rho_support):
    expected = n * masses / rho_support
    min_expected = float(expected.min())
    if min_expected <= 0.0:
        raise ConfigurationError("cell with nonpositive expected count")
    constant = min_expected / (
        (eps if eps is not None else step * r_n) ** 2
        * math.log(n) ** (alpha - 1.0)
    )
    # largest |a_{j+1}^2 - a_j^2| across both axes (distortion driver)
    deltas = []
    for cell in cells:
        b = cell.bounds
        deltas.append(abs(b.x1**2 - b.x0**2))
        deltas.append(abs(b.y1**2 - b.y0**2))
    index = {(c.j, c.k): i for i, c in enumerate(cells)}
    return GridPartition(
        kind=kind, n=n, alpha=alpha, eps=eps, m=m, r_n=r_n, r_tilde=r_tilde,
        step=step, k_min=k_min, k_max=k_max, j_ranges=dict(j_ranges),
        cells=tuple(cells), cell_masses=masses, rho_support=float(rho_support),
        min_expected_count=min_expected, expected_count_constant=float(constant),
        distortion_eps=float(max(deltas)), _index=index,
    )


def truncate_density(n: int, alpha: float, eps: float):
    """Gaussian restricted to E_N and renormalized (descriptor only)."""
    from .densities import TruncatedGaussian

    build_gaussian_partition(n, alpha, eps)  # validates parameters eagerly
    return TruncatedGaussian(n=n, alpha=alpha, eps=eps)


def gaussian_distortion_eps(n: int, alpha: float, eps: float) -> float:
    """The Lipschitz-distortion exponent 2 eps + eps^2 / r_N^2."""
    r_n = cutoff_radius(n, alpha)
    return 2.0 * eps + eps * eps / (r_n * r_n)


class CellUniformMap:
    """Product monotone map pushing the restricted Gaussian on a cell to the
    uniform measure on the same cell.

    ``forward`` maps restricted-Gaussian-distributed points to uniform ones,
    ``inverse`` goes back.  Squared distances are distorted by at most
    ``exp(+-distortion_bound)``.
    """

    def __init__(self, part: GridPartition, cell: Cell):
        self.cell = cell
        self.bounds = cell.bounds
        # x1 axis is uniform already in the Maxwellian kind
        self._gaussian_x = part.kind == "gaussian"
        b = cell.bounds
        self.distortion_bound = max(
            abs(b.x1**2 - b.x0**2) if self._gaussian_x else 0.0,
            abs(b.y1**2 - b.y0**2),
        )

    def forward(self, p) -> np.ndarray:
        pts = as_points(p)
        self._check_inside(pts)
        b = self.bounds
        x = _axis_gauss_to_uniform(pts[:, 0], b.x0, b.x1) if self._gaussian_x else pts[:, 0]
        y = _axis_gauss_to_uniform(pts[:, 1], b.y0, b.y1)
        out = np.column_stack([x, y])
        return out[0] if np.ndim(p) == 1 else out

    def inverse(self, q) -> np.ndarray:
        pts = as_points(q)
        self._check_inside(pts)
        b = self.bounds
        x = _axis_uniform_to_gauss(pts[:, 0], b.x0, b.x1) if self._gaussian_x else pts[:, 0]
        y = _axis_uniform_to_gauss(pts[:, 1], b.y0, b.y1)
        out = np.column_stack([x, y])
        return out[0] if np.ndim(q) == 1 else out

    def __call__(self, p) -> np.ndarray:
        return self.forward(p)

    def _check_inside(self, pts):
        b = self.bounds
        eps = 1e-12 * max(1.0, abs(b.x1), abs(b.y1))
        ok = (
            (pts[:, 0] >= b.x0 - eps) & (pts[:, 0] <= b.x1 + eps)
            & (pts[:, 1] >= b.y0 - eps) & (pts[:, 1] <= b.y1 + eps)
        )
        if not ok.all():
            raise InputError("point outside the cell")


def _axis_gauss_to_uniform(x, lo, hi):
    m = gauss_interval_mass(lo, hi)
    frac = gauss_interval_mass(lo, np.maximum(x, lo)) / m
    return lo + (hi - lo) * np.clip(frac, 0.0, 1.0)


def _axis_uniform_to_gauss(y, lo, hi):
    """Invert the monotone axis map by bisection-safeguarded Newton to 1e-12."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    m = float(gauss_interval_mass(lo, hi))
    out = np.empty_like(y)
    cdf_lo = float(_ndtr(lo))
    for i, yi in enumerate(y):
        frac = (yi - lo) / (hi - lo)
        frac = min(max(frac, 0.0), 1.0)
        target = frac * m  # = Phi(x) - Phi(lo)
        p = cdf_lo + target
        x = norm_ppf(min(max(p, 1e-300), 1.0 - 1e-16)) if 0.0 < p < 1.0 else lo
        x = min(max(x, lo), hi)
        a, b = lo, hi
        for _ in range(100):
            f = float(gauss_interval_mass(lo, x)) - target
            if f > 0:
                b = x
            else:
                a = x
            d = _phi(x)
            if d > 0:
                x_new = x - f / d
            else:
                x_new = 0.5 * (a + b)
            if not (a <= x_new <= b):
                x_new = 0.5 * (a + b)
            if abs(x_new - x) <= 1e-13 * max(1.0, abs(x)):
                x = x_new
                break
            x = x_new
        out[i] = min(max(x, lo), hi)
    return out


def _ndtr(x):
    from scipy.special import ndtr

    return ndtr(x)


def _phi(x):
    return math.exp(-0.5 * x * x) / _SQRT2PI


def cell_uniform_map(part: GridPartition, cell: Cell, p, inverse: bool = False):
    """Apply the cell's monotone map (or its inverse) to point(s) p."""
    cmap = CellUniformMap(part, cell)
    return cmap.inverse(p) if inverse else cmap.forward(p)


def chernoff_event_check(
    part: GridPartition,
    counts_x: np.ndarray,
    counts_y: np.ndarray,
    xi: float,
) -> ChernoffEvent:
    """Check whether every per-cell count deviates from its expectation by at
    most theta = (log n)^(-xi), for both clouds."""
    if not (0.0 < xi < (part.alpha - 1.0) / 2.0):
        raise ConfigurationError(
            f"xi must lie in (0, (alpha-1)/2) = (0, {(part.alpha - 1) / 2:.3g})"
        )
    counts_x = np.asarray(counts_x, dtype=np.int64)
    counts_y = np.asarray(counts_y, dtype=np.int64)
    if counts_x.shape != (len(part.cells),) or counts_y.shape != (len(part.cells),):
        raise InputError("counts must have one entry per cell")
    if counts_x.sum() != part.n or counts_y.sum() != part.n:
        raise InputError("count totals must equal the partition's n")
    theta = math.log(part.n) ** (-xi)
    expect = part.expected_counts()
    rel = np.maximum(
        np.abs(counts_x - expect) / expect, np.abs(counts_y - expect) / expect
    )
    worst = int(np.argmax(rel))
    cell = part.cells[worst]
    return ChernoffEvent(
        theta=theta,
        xi=xi,
        holds=bool(rel[worst] <= theta),
        worst_cell=(cell.j, cell.k),
        worst_rel_deviation=float(rel[worst]),
    )
