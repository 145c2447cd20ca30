"""Parameter containers, geometry validation and config round-trips."""

import math

import numpy as np
import pytest

from pointscatter.errors import (
    ConfigError,
    ConstraintViolation,
    DuplicatePosition,
    KTooSmall,
    NonFinite,
    ValidationError,
)
from pointscatter.model import (
    Box,
    HalfLine,
    Line,
    PlacedInteraction,
    Ring,
    WallCondition,
    as_wavenumber,
    delta,
    delta_prime,
    domain_interval,
    geometry_from_dict,
    geometry_to_dict,
    lattice_from_list,
    lattice_to_list,
    make_interaction,
    make_lattice,
    validate_geometry_lattice,
)


def test_named_families():
    p = delta(2.5)
    assert (p.a, p.b, p.c, p.d, p.omega_phase) == (1.0, 0.0, 2.5, 1.0, 0.0)
    q = delta_prime(-0.7)
    assert (q.a, q.b, q.c, q.d) == (1.0, -0.7, 0.0, 1.0)
    assert q.omega == 1.0


def test_omega_is_unimodular_phase():
    p = make_interaction(1.0, 0.0, 0.3, 1.0, omega_phase=0.9)
    assert p.omega == pytest.approx(complex(math.cos(0.9), math.sin(0.9)), abs=1e-15)
    assert abs(abs(p.omega) - 1.0) < 1e-15


def test_determinant_constraint():
    with pytest.raises(ConstraintViolation):
        make_interaction(1.0, 0.0, 0.0, 2.0)
    make_interaction(2.0, 1.0, 1.0, 1.0)  # ad - bc = 1, fine


def test_nonfinite_rejected():
    with pytest.raises(NonFinite):
        make_interaction(float("nan"), 0.0, 0.0, 1.0)
    with pytest.raises(NonFinite):
        make_interaction(1.0, 0.0, float("inf"), 1.0)


def test_lattice_sorts_and_rejects_duplicates():
    lat = make_lattice(
        [PlacedInteraction(delta(1.0), 2.0), PlacedInteraction(delta(2.0), -1.0)]
    )
    assert lat.positions == (-1.0, 2.0)
    assert lat.interactions[0].params.c == 2.0
    with pytest.raises(DuplicatePosition):
        make_lattice(
            [PlacedInteraction(delta(1.0), 0.0), PlacedInteraction(delta(2.0), 1e-13)]
        )


def test_domain_interval():
    assert domain_interval(Line()) == (-math.inf, math.inf)
    assert domain_interval(HalfLine(WallCondition.DIRICHLET)) == (0.0, math.inf)
    assert domain_interval(Box(3.0, WallCondition.DIRICHLET, WallCondition.NEUMANN)) == (0.0, 3.0)
    assert domain_interval(Ring(5.0)) == (-2.5, 2.5)


def test_geometry_validation():
    with pytest.raises(ValidationError):
        Box(-1.0, WallCondition.DIRICHLET, WallCondition.DIRICHLET)
    with pytest.raises(ValidationError):
        Ring(0.0)
    lat = make_lattice([PlacedInteraction(delta(1.0), -0.5)])
    with pytest.raises(ValidationError):
        validate_geometry_lattice(HalfLine(WallCondition.DIRICHLET), lat)
    with pytest.raises(ValidationError):
        validate_geometry_lattice(Box(2.0, WallCondition.DIRICHLET, WallCondition.DIRICHLET), lat)
    validate_geometry_lattice(Line(), lat)
    validate_geometry_lattice(Ring(4.0), lat)


def test_site_on_wall_rejected():
    lat = make_lattice([PlacedInteraction(delta(1.0), 0.0)])
    with pytest.raises(ValidationError):
        validate_geometry_lattice(HalfLine(WallCondition.DIRICHLET), lat)


def test_wavenumber():
    kn = as_wavenumber(2.0)
    assert kn.k == 2.0 + 0.0j
    kc = as_wavenumber(1.0 + 0.5j)
    assert kc.k == 1.0 + 0.5j
    with pytest.raises(KTooSmall):
        as_wavenumber(0.0)
    with pytest.raises(KTooSmall):
        as_wavenumber(1e-15)


def test_geometry_dict_round_trip():
    for geom in (
        Line(),
        HalfLine(WallCondition.NEUMANN),
        Box(2.5, WallCondition.DIRICHLET, WallCondition.NEUMANN),
        Ring(6.0),
    ):
        assert geometry_from_dict(geometry_to_dict(geom)) == geom


def test_geometry_dict_errors_name_fields():
    with pytest.raises(ConfigError, match="geometry.variant"):
        geometry_from_dict({})
    with pytest.raises(ConfigError, match="geometry.variant"):
        geometry_from_dict({"variant": "circle"})
    with pytest.raises(ConfigError, match="geometry.L"):
        geometry_from_dict({"variant": "box"})
    with pytest.raises(ConfigError, match="left_wall"):
        geometry_from_dict({"variant": "half_line", "left_wall": "open"})


def test_lattice_list_round_trip():
    entries = [
        {"a": 1.0, "b": 0.0, "c": 2.0, "d": 1.0, "omega_phase": 0.0, "y": -1.0},
        {"a": 1.2, "b": 0.5, "c": (1.2 * 0.9 - 1.0) / 0.5, "d": 0.9, "omega_phase": 0.3, "y": 1.0},
    ]
    lat = lattice_from_list(entries)
    back = lattice_to_list(lat)
    assert [e["y"] for e in back] == [-1.0, 1.0]
    assert lattice_from_list(back) == lat


def test_lattice_list_errors_name_entries():
    with pytest.raises(ConfigError, match=r"lattice\[0\]"):
        lattice_from_list([{"a": 1.0, "b": 0.0, "c": 2.0, "d": 1.0}])  # missing y
    with pytest.raises(ConfigError, match=r"lattice\[1\]"):
        lattice_from_list(
            [
                {"a": 1.0, "b": 0.0, "c": 2.0, "d": 1.0, "y": 0.0},
                {"a": 1.0, "b": 0.0, "c": 0.0, "d": 2.0, "y": 1.0},  # det != 1
            ]
        )
    with pytest.raises(ConfigError, match="lattice"):
        lattice_from_list({"a": 1.0})


def test_empty_lattice_allowed():
    lat = make_lattice(())
    assert len(lat) == 0
    assert lattice_from_list(None) == lat
    for geom in (Line(), Ring(3.0)):
        validate_geometry_lattice(geom, lat)
