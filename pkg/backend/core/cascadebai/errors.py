# backend/core/cascadebai/errors.py
# ------------------------------------------------------------
# Exception hierarchy for cascadebai.
# - Input problems derive from ValueError so callers that only
#   know the standard library still catch them.
# - The CLI maps every CascadeBAIError to exit status 2.
# ------------------------------------------------------------

from __future__ import annotations


class CascadeBAIError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------
# Instance validation
# ---------------------------

class EmptyWeights(CascadeBAIError, ValueError):
    """Weight vector is empty or has fewer than two items."""


class WeightOutOfRange(CascadeBAIError, ValueError):
    """A click probability lies outside [0, 1] (or is not finite)."""


class DegenerateBoundary(CascadeBAIError, ValueError):
    """w(K) == w(K+1): the set of K optimal items is not unique."""


class BadDelta(CascadeBAIError, ValueError):
    """Risk level outside the open interval (0, 1)."""


class BadK(CascadeBAIError, ValueError):
    """Arm size K outside [1, L], or a bad epsilon."""


# ---------------------------
# Analytic quantities
# ---------------------------

class NonPositiveGap(CascadeBAIError, ValueError):
    """Adjusted gap must be strictly positive to compute a threshold."""


class ZeroMinWeight(CascadeBAIError, ValueError):
    """v_k is undefined when the smallest click probability is zero."""


class DegenerateQ(CascadeBAIError, ValueError):
    """Second argument of the Bernoulli KL sits on {0, 1}."""


class EpsilonNotZero(CascadeBAIError, ValueError):
    """The lower bound is only stated for exact identification."""


class BadDistribution(CascadeBAIError, ValueError):
    """Atom probabilities are negative or do not sum to one."""


class ArmTooLong(CascadeBAIError, ValueError):
    """Arm exceeds the exact-enumeration cap."""


# ---------------------------
# Algorithms
# ---------------------------

class InvalidState(CascadeBAIError, RuntimeError):
    """A step was requested on a run that has already terminated."""


# ---------------------------
# Harness
# ---------------------------

class DegeneratePoints(CascadeBAIError, ValueError):
    """Too few (or repeated) K values to fit a two-parameter model."""


class BadGrid(CascadeBAIError, ValueError):
    """Experiment grid is empty or malformed."""


class ConfigError(CascadeBAIError, ValueError):
    """Config file or flag combination cannot be resolved."""
