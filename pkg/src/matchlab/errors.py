"""Exception hierarchy for matchlab.

The CLI maps ConfigurationError to exit code 2 and ResourceError to exit
code 3; everything else is an ordinary failure.
"""


class MatchlabError(Exception):
    """Base class for all matchlab errors."""


class ConfigurationError(MatchlabError):
    """Invalid descriptor, parameter out of its allowed domain, bad config file."""


class InputError(MatchlabError):
    """Structurally valid configuration but inconsistent runtime inputs
    (size mismatch, mass mismatch, point outside its declared domain)."""


class UnsupportedCombinationError(MatchlabError):
    """A (density, region) or similar pairing with no closed form."""


class ResourceError(MatchlabError):
    """A solve would exceed a configured resource budget (e.g. flow-graph arcs)."""


class QuadratureError(MatchlabError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DivergenceError(MatchlabError):
    """A relative entropy / divergence is infinite or undefined."""


class InternalError(MatchlabError):
    """Invariant violated inside a solver; must not happen on valid inputs."""
