"""Bare and dressed scattering amplitudes: frozen values, literal formulas
and the unitarity/conjugation identities."""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter.amplitudes import (
    bare_amplitudes,
    conjugation_residuals,
    dressed_reflections,
    single_bound_poles,
    unitarity_residuals,
)
from pointscatter.errors import KTooSmall, PoleHit
from pointscatter.model import delta, delta_prime, make_interaction

from helpers import random_interaction


def _literal(p, k):
    """Independent transcription of the closed-form amplitudes."""
    den = -p.c + 1j * k * (p.d + p.a) + p.b * k * k
    r_plus = (p.c + 1j * k * (p.d - p.a) + p.b * k * k) / den
    r_minus = (p.c - 1j * k * (p.d - p.a) + p.b * k * k) / den
    t_plus = 2j * k * p.omega / den
    t_minus = 2j * k / p.omega / den
    return r_plus, r_minus, t_plus, t_minus


def test_delta_frozen():
    amp = bare_amplitudes(delta(2.0), 1.0)
    assert amp.r_plus == pytest.approx(-0.5 - 0.5j, abs=1e-15)
    assert amp.r_minus == pytest.approx(-0.5 - 0.5j, abs=1e-15)
    assert amp.t_plus == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert amp.t_minus == pytest.approx(0.5 - 0.5j, abs=1e-15)


def test_delta_prime_frozen():
    amp = bare_amplitudes(delta_prime(2.0), 1.0)
    assert amp.r_plus == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert amp.r_minus == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert amp.t_plus == pytest.approx(0.5 + 0.5j, abs=1e-15)
    assert amp.t_minus == pytest.approx(0.5 + 0.5j, abs=1e-15)


def test_generic_omega_frozen():
    p = make_interaction(1.1, 0.3, (1.1 * 0.9 - 1.0) / 0.3, 0.9, omega_phase=0.7)
    amp = bare_amplitudes(p, 1.3)
    assert amp.r_plus == pytest.approx(-0.0595667168407914 - 0.1945586728203749j, abs=1e-14)
    assert amp.r_minus == pytest.approx(0.1321530289742454 - 0.1547153769272756j, abs=1e-14)
    assert amp.t_plus == pytest.approx(0.6048379690130970 + 0.7699154241313102j, abs=1e-14)
    assert amp.t_minus == pytest.approx(0.8615155283348910 - 0.4651770883362988j, abs=1e-14)


def test_matches_literal_formula(rng):
    for _ in range(200):
        p = random_interaction(rng)
        k = float(rng.uniform(0.1, 10.0))
        amp = bare_amplitudes(p, k)
        rp, rm, tp, tm = _literal(p, k)
        assert abs(amp.r_plus - rp) < 1e-13
        assert abs(amp.r_minus - rm) < 1e-13
        assert abs(amp.t_plus - tp) < 1e-13
        assert abs(amp.t_minus - tm) < 1e-13


def test_t_ratio_is_omega_squared(rng):
    for _ in range(50):
        p = random_interaction(rng)
        amp = bare_amplitudes(p, 0.8)
        assert abs(amp.t_plus / amp.t_minus - p.omega**2) < 1e-12


@settings(max_examples=150, deadline=None)
@given(
    a=st.floats(-3.0, 3.0),
    d=st.floats(-3.0, 3.0),
    babs=st.floats(0.1, 3.0),
    bsign=st.sampled_from([-1.0, 1.0]),
    phase=st.floats(0.0, 2.0 * np.pi),
    k=st.floats(0.1, 10.0),
)
def test_unitarity_property(a, d, babs, bsign, phase, k):
    b = babs * bsign
    p = make_interaction(a, b, (a * d - 1.0) / b, d, omega_phase=phase)
    amp = bare_amplitudes(p, k)
    assert max(unitarity_residuals(amp)) < 1e-12
    assert max(conjugation_residuals(p, k)) < 1e-12


def test_unitarity_b_zero_family(rng):
    for _ in range(100):
        gamma = float(rng.uniform(-5.0, 5.0))
        k = float(rng.uniform(0.1, 10.0))
        for p in (delta(gamma), delta_prime(gamma)):
            amp = bare_amplitudes(p, k)
            assert max(unitarity_residuals(amp)) < 1e-12


def test_dressed_phases(rng):
    for _ in range(30):
        p = random_interaction(rng)
        y = float(rng.uniform(-3.0, 3.0))
        k = float(rng.uniform(0.2, 5.0))
        bare = bare_amplitudes(p, k)
        dr = dressed_reflections(p, y, k)
        assert abs(dr.r_plus - bare.r_plus * cmath.exp(2j * k * y)) < 1e-13
        assert abs(dr.r_minus - bare.r_minus * cmath.exp(-2j * k * y)) < 1e-13
        assert abs(dr.t_plus - bare.t_plus) < 1e-15
        assert abs(dr.t_minus - bare.t_minus) < 1e-15


def test_bound_poles_frozen():
    assert single_bound_poles(delta(-2.0)) == pytest.approx([1j], abs=1e-12)
    assert single_bound_poles(delta(2.0)) == []
    assert single_bound_poles(delta_prime(-0.8)) == pytest.approx([2.5j], abs=1e-12)
    assert single_bound_poles(delta_prime(0.8)) == []


def test_bound_pole_is_denominator_zero(rng):
    for _ in range(40):
        p = random_interaction(rng)
        for pole in single_bound_poles(p):
            kappa = pole.imag
            assert kappa > 0
            den = -p.c - kappa * (p.a + p.d) - p.b * kappa * kappa
            assert abs(den) < 1e-9 * max(1.0, abs(p.c), kappa * 2.0, abs(p.b) * kappa**2)


def test_pole_hit_raised():
    with pytest.raises(PoleHit):
        bare_amplitudes(delta(-2.0), 1j)


def test_k_zero_rejected():
    with pytest.raises(KTooSmall):
        bare_amplitudes(delta(1.0), 0.0)
