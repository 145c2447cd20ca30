"""Exception taxonomy shared by all pointscatter modules.

Every error carries a human-readable message naming the offending
quantity or numerical condition; the CLI maps these onto exit codes
(config errors -> 2, numerical errors -> 3).
"""

from __future__ import annotations


class PointScatterError(Exception):
    """Base class for all library errors."""


class ConfigError(PointScatterError):
    """Malformed or inconsistent configuration input (CLI exit code 2)."""


class ValidationError(PointScatterError):
    """Domain-type invariant violated at construction (CLI exit code 2)."""


class ConstraintViolation(ValidationError):
    """Parameter constraint a*d - b*c = 1 broken beyond tolerance."""


class NonFinite(ValidationError):
    """A parameter that must be a finite real is NaN or infinite."""


class DuplicatePosition(ValidationError):
    """Two lattice positions closer than the minimum gap of 1e-12."""


class NumericalError(PointScatterError):
    """Evaluation hit a numerically singular configuration (CLI exit code 3)."""


class KTooSmall(NumericalError):
    """|k| below 1e-9; the 1/(2ik) prefactors are singular at k = 0."""


class PoleHit(NumericalError):
    """Amplitude denominator -c + ik(d+a) + bk^2 vanished at the requested k."""


class ResonanceDenominator(NumericalError):
    """Block composition denominator 1 - R(-)R(+)e^{2ik dy} below 1e-14."""


class OnInteractionPoint(NumericalError):
    """Green function requested exactly on an interaction point; one-sided
    limits differ there, so the caller must pick a side explicitly."""


class SpectralPole(NumericalError):
    """Green function evaluated at (numerically on top of) an eigenvalue."""


class WronskianVanishes(NumericalError):
    """Oracle construction degenerate: evaluation at an eigenvalue."""


class ScanTooCoarse(NumericalError):
    """Root scan resolution insufficient: argument-principle count over the
    interval disagrees with the roots found."""


class EtaTooSmall(NumericalError):
    """Density-of-states broadening too small: a spectral pole lies within
    the requested contour's safety margin."""


class PacketTooWideForDomain(NumericalError):
    """Initial packet has non-negligible mass outside the domain or sits
    closer than 4 sigma to a hard wall."""


class QuadratureUnderResolved(NumericalError):
    """A posteriori accuracy check failed (norm drift above the bound)."""
