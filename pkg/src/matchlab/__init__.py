"""matchlab: random Euclidean matching with exponent 2.

Exact assignment / optimal-transport solvers (compiled core with a pure
Python fallback), the multiscaling / Gaussian / Maxwellian density families
with their asymptotic cost predictors, the Gaussian cut-off partition
geometry, analytic transport bounds, and a reproducible Monte Carlo harness.
"""

__version__ = "0.1.0"

from . import bounds, densities, harness, partition, transport  # noqa: F401
