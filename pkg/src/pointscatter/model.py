"""Domain types, validation, and the geometry/lattice data model.

Units are fixed throughout the package: hbar = 1, m = 1/2, so the free
equation is -psi'' = k^2 psi and E = k^2 exactly.

A point interaction is the boundary condition

    (psi, psi')(y+) = omega * [[a, b], [c, d]] (psi, psi')(y-)

with a, b, c, d real, ad - bc = 1 and |omega| = 1.  omega is stored as a
phase angle so the unit-modulus constraint cannot be broken.  Walls are
geometry data, not lattice elements; the solvers lower them internally to
perfect mirrors.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Union

from .errors import (
    ConfigError,
    ConstraintViolation,
    DuplicatePosition,
    KTooSmall,
    NonFinite,
    ValidationError,
)

DET_TOL = 1e-12
MIN_GAP = 1e-12
K_MIN = 1e-9


def _require_finite_real(name: str, value: float) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise NonFinite(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(out):
        raise NonFinite(f"{name} must be finite, got {out!r}")
    return out


@dataclass(frozen=True)
class InteractionParams:
    """The four real parameters plus unit-modulus phase of one interaction.

    a, d are dimensionless; b has units of length, c of 1/length.
    Validated at construction: ad - bc = 1 within 1e-12, all entries finite.
    """

    a: float
    b: float
    c: float
    d: float
    omega_phase: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d", "omega_phase"):
            object.__setattr__(self, name, _require_finite_real(name, getattr(self, name)))
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > DET_TOL:
            raise ConstraintViolation(
                f"a*d - b*c must equal 1 within {DET_TOL:g}; got {det!r} "
                f"for a={self.a!r}, b={self.b!r}, c={self.c!r}, d={self.d!r}"
            )

    @property
    def omega(self) -> complex:
        """The phase factor omega = exp(i * omega_phase)."""
        return cmath.exp(1j * self.omega_phase)

    @property
    def theta_plus(self) -> float:
        """ad - bc, computed from the stored parameters (equals 1 by the
        construction constraint; kept literal so violations stay loud)."""
        return self.a * self.d - self.b * self.c

    theta_minus: float = field(default=1.0, init=False, repr=False)


def make_interaction(a: float, b: float, c: float, d: float, omega_phase: float = 0.0) -> InteractionParams:
    """Validated constructor for InteractionParams."""
    return InteractionParams(a, b, c, d, omega_phase)


def delta(gamma: float) -> InteractionParams:
    """Delta potential of strength gamma: a = d = 1, b = 0, c = gamma."""
    return InteractionParams(1.0, 0.0, float(gamma), 1.0, 0.0)


def delta_prime(gamma: float) -> InteractionParams:
    """Delta-prime potential of strength gamma: a = d = 1, b = gamma, c = 0."""
    return InteractionParams(1.0, float(gamma), 0.0, 1.0, 0.0)


IDENTITY = InteractionParams(1.0, 0.0, 0.0, 1.0, 0.0)


@dataclass(frozen=True)
class PlacedInteraction:
    """An interaction pinned to a position y on the axis."""

    params: InteractionParams
    position: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _require_finite_real("position", self.position))


@dataclass(frozen=True)
class Lattice:
    """Strictly ordered tuple of placed interactions; may be empty."""

    interactions: tuple[PlacedInteraction, ...]

    def __post_init__(self) -> None:
        items = tuple(self.interactions)
        object.__setattr__(self, "interactions", items)
        for prev, cur in zip(items, items[1:]):
            if cur.position - prev.position < MIN_GAP:
                raise DuplicatePosition(
                    f"lattice positions must increase by at least {MIN_GAP:g}; "
                    f"got y={prev.position!r} followed by y={cur.position!r}"
                )

    def __len__(self) -> int:
        return len(self.interactions)

    def __iter__(self):
        return iter(self.interactions)

    @property
    def positions(self) -> tuple[float, ...]:
        return tuple(item.position for item in self.interactions)


def make_lattice(items) -> Lattice:
    """Sort placed interactions by position and validate the minimum gap."""
    placed = sorted(items, key=lambda item: item.position)
    return Lattice(tuple(placed))


class WallCondition(enum.Enum):
    """Hard-wall boundary condition.

    Dirichlet (psi = 0) reflects with coefficient -1, Neumann (psi' = 0)
    with +1; equivalently s = +1 for Dirichlet and s = -1 for Neumann.
    """

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @property
    def reflection(self) -> float:
        return -1.0 if self is WallCondition.DIRICHLET else 1.0

    @property
    def s(self) -> float:
        return 1.0 if self is WallCondition.DIRICHLET else -1.0


@dataclass(frozen=True)
class Line:
    """The infinite line."""


@dataclass(frozen=True)
class HalfLine:
    """The half-line x > 0 with a hard wall at x = 0."""

    wall: WallCondition = WallCondition.DIRICHLET
    wall_position: float = field(default=0.0, init=False, repr=False)


@dataclass(frozen=True)
class Box:
    """An infinite well on (0, L) with walls at both ends."""

    L: float
    left: WallCondition = WallCondition.DIRICHLET
    right: WallCondition = WallCondition.DIRICHLET

    def __post_init__(self) -> None:
        object.__setattr__(self, "L", _require_finite_real("L", self.L))
        if self.L <= 0.0:
            raise ValidationError(f"Box length L must be > 0, got {self.L!r}")


@dataclass(frozen=True)
class Ring:
    """A ring of circumference L, coordinates in (-L/2, L/2), periodic:
    psi(-L/2) = psi(L/2) and psi'(-L/2) = psi'(L/2)."""

    L: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "L", _require_finite_real("L", self.L))
        if self.L <= 0.0:
            raise ValidationError(f"Ring length L must be > 0, got {self.L!r}")


Geometry = Union[Line, HalfLine, Box, Ring]


def domain_interval(geom: Geometry) -> tuple[float, float]:
    """Open interval of admissible positions for the geometry."""
    if isinstance(geom, Line):
        return (-math.inf, math.inf)
    if isinstance(geom, HalfLine):
        return (0.0, math.inf)
    if isinstance(geom, Box):
        return (0.0, geom.L)
    if isinstance(geom, Ring):
        return (-geom.L / 2.0, geom.L / 2.0)
    raise ValidationError(f"unknown geometry {geom!r}")


def validate_geometry_lattice(geom: Geometry, lat: Lattice) -> None:
    """All lattice positions must lie strictly inside the geometry domain."""
    lo, hi = domain_interval(geom)
    for item in lat:
        if not (lo < item.position < hi):
            raise ValidationError(
                f"lattice position y={item.position!r} outside the open domain "
                f"({lo!r}, {hi!r}) of {type(geom).__name__}"
            )


@dataclass(frozen=True)
class Wavenumber:
    """A wavenumber k (possibly complex); energy convention E = k^2.

    |k| >= 1e-9 is enforced because the 1/(2ik) prefactors are singular
    at k = 0.
    """

    k: complex

    def __post_init__(self) -> None:
        value = complex(self.k)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise NonFinite(f"k must be finite, got {value!r}")
        if abs(value) < K_MIN:
            raise KTooSmall(f"|k| must be >= {K_MIN:g}, got k={value!r}")
        object.__setattr__(self, "k", value)

    @property
    def energy(self) -> complex:
        return self.k * self.k


def as_wavenumber(k) -> Wavenumber:
    """Coerce a plain number (or Wavenumber) into a validated Wavenumber."""
    if isinstance(k, Wavenumber):
        return k
    return Wavenumber(complex(k))


@dataclass(frozen=True)
class BlockAmplitudes:
    """Reflection/transmission amplitudes of a contiguous block of sites.

    Indices are 1-based and inclusive; first_index == last_index + 1 marks
    the empty block (R = 0, T = 1).  The amplitudes follow the convention
    in which endpoint positions enter explicitly, so the physical (dressed)
    quantities are r_plus * e^{2iky_l}, r_minus * e^{-2iky_n} and
    t_{+/-} * e^{-ik(y_n - y_l)} with y_l = leftmost_position and
    y_n = rightmost_position.

    This is an inert container shared between the closed-form composition
    and the transfer-matrix oracle; all arithmetic lives elsewhere.
    """

    r_plus: complex
    r_minus: complex
    t_plus: complex
    t_minus: complex
    first_index: int
    last_index: int
    leftmost_position: float
    rightmost_position: float
    at_k: Wavenumber

    def __post_init__(self) -> None:
        if self.first_index > self.last_index + 1:
            raise ValidationError(
                f"block indices must satisfy first <= last + 1, got "
                f"first_index={self.first_index}, last_index={self.last_index}"
            )

    @property
    def is_empty(self) -> bool:
        return self.first_index == self.last_index + 1


# ---------------------------------------------------------------------------
# Config (de)serialization.  Field names below are the normative external
# schema: geometry {variant, L?, left_wall?, right_wall?} and
# lattice: [{a, b, c, d, omega_phase, y}, ...].
# ---------------------------------------------------------------------------

_VARIANT_NAMES = {
    "line": Line,
    "half_line": HalfLine,
    "halfline": HalfLine,
    "box": Box,
    "ring": Ring,
}


def _parse_wall(raw, field_name: str) -> WallCondition:
    try:
        return WallCondition(str(raw).strip().lower())
    except ValueError as exc:
        raise ConfigError(
            f"geometry.{field_name}: expected 'dirichlet' or 'neumann', got {raw!r}"
        ) from exc


def geometry_from_dict(data: dict) -> Geometry:
    if not isinstance(data, dict):
        raise ConfigError(f"geometry: expected an object, got {data!r}")
    variant_raw = data.get("variant")
    if variant_raw is None:
        raise ConfigError("geometry.variant: missing (one of line, half_line, box, ring)")
    key = str(variant_raw).strip().lower()
    cls = _VARIANT_NAMES.get(key)
    if cls is None:
        raise ConfigError(
            f"geometry.variant: unknown value {variant_raw!r} "
            "(expected line, half_line, box or ring)"
        )
    try:
        if cls is Line:
            return Line()
        if cls is HalfLine:
            wall = _parse_wall(data.get("left_wall", "dirichlet"), "left_wall")
            return HalfLine(wall=wall)
        if cls is Box:
            if "L" not in data:
                raise ConfigError("geometry.L: required for the box variant")
            left = _parse_wall(data.get("left_wall", "dirichlet"), "left_wall")
            right = _parse_wall(data.get("right_wall", "dirichlet"), "right_wall")
            return Box(L=float(data["L"]), left=left, right=right)
        if "L" not in data:
            raise ConfigError("geometry.L: required for the ring variant")
        return Ring(L=float(data["L"]))
    except ValidationError as exc:
        raise ConfigError(f"geometry: {exc}") from exc


def geometry_to_dict(geom: Geometry) -> dict:
    if isinstance(geom, Line):
        return {"variant": "line"}
    if isinstance(geom, HalfLine):
        return {"variant": "half_line", "left_wall": geom.wall.value}
    if isinstance(geom, Box):
        return {
            "variant": "box",
            "L": geom.L,
            "left_wall": geom.left.value,
            "right_wall": geom.right.value,
        }
    if isinstance(geom, Ring):
        return {"variant": "ring", "L": geom.L}
    raise ValidationError(f"unknown geometry {geom!r}")


def lattice_from_list(data) -> Lattice:
    if data is None:
        data = []
    if not isinstance(data, (list, tuple)):
        raise ConfigError(f"lattice: expected a list of objects, got {data!r}")
    placed = []
    for index, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ConfigError(f"lattice[{index}]: expected an object, got {entry!r}")
        missing = [name for name in ("a", "b", "c", "d", "y") if name not in entry]
        if missing:
            raise ConfigError(f"lattice[{index}]: missing field(s) {', '.join(missing)}")
        try:
            params = make_interaction(
                entry["a"],
                entry["b"],
                entry["c"],
                entry["d"],
                entry.get("omega_phase", 0.0),
            )
            placed.append(PlacedInteraction(params, float(entry["y"])))
        except ValidationError as exc:
            raise ConfigError(f"lattice[{index}]: {exc}") from exc
    try:
        return make_lattice(placed)
    except ValidationError as exc:
        raise ConfigError(f"lattice: {exc}") from exc


def lattice_to_list(lat: Lattice) -> list:
    return [
        {
            "a": item.params.a,
            "b": item.params.b,
            "c": item.params.c,
            "d": item.params.d,
            "omega_phase": item.params.omega_phase,
            "y": item.position,
        }
        for item in lat
    ]
