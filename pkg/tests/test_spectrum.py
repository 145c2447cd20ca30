"""Eigenvalues, bound states and the density of states, cross-checked by
oracle shooting throughout."""

import numpy as np
import pytest
from scipy.optimize import brentq

from pointscatter.errors import ValidationError
from pointscatter.model import (
    Box,
    HalfLine,
    Line,
    PlacedInteraction,
    Ring,
    WallCondition,
    delta,
    delta_prime,
    make_interaction,
    make_lattice,
)
from pointscatter.oracle import bound_mismatch, box_wall_mismatch
from pointscatter.spectrum import (
    density_of_states,
    find_bound_states,
    find_eigenvalues,
)

D = WallCondition.DIRICHLET
N = WallCondition.NEUMANN
EMPTY = make_lattice(())


def _sign_scan_roots(fun, lo, hi, n):
    grid = np.linspace(lo, hi, n)
    vals = [fun(x) for x in grid]
    return [
        brentq(fun, grid[i], grid[i + 1], xtol=1e-13)
        for i in range(len(grid) - 1)
        if vals[i] * vals[i + 1] < 0
    ]


def test_dd_box_integers():
    res = find_eigenvalues(Box(np.pi, D, D), EMPTY, 0.5, 10.5)
    ks = [r.k for r in res.eigen_k]
    assert np.allclose(ks, np.arange(1, 11), atol=1e-10)
    assert all(r.multiplicity == 1 for r in res.eigen_k)
    assert all(r.residual < 1e-10 for r in res.eigen_k)


def test_dn_box_half_integers():
    res = find_eigenvalues(Box(np.pi, D, N), EMPTY, 0.1, 10.0)
    ks = [r.k for r in res.eigen_k]
    assert np.allclose(ks, np.arange(1, 11) - 0.5, atol=1e-10)


def test_nn_box():
    res = find_eigenvalues(Box(np.pi, N, N), EMPTY, 0.5, 5.5)
    ks = [r.k for r in res.eigen_k]
    assert np.allclose(ks, [1, 2, 3, 4, 5], atol=1e-10)


def test_empty_ring_doubly_degenerate():
    res = find_eigenvalues(Ring(2 * np.pi), EMPTY, 0.5, 5.5)
    assert np.allclose([r.k for r in res.eigen_k], [1, 2, 3, 4, 5], atol=1e-10)
    assert all(r.multiplicity == 2 for r in res.eigen_k)


def test_delta_in_box_vs_oracle_shooting():
    lat = make_lattice([PlacedInteraction(delta(2.0), 0.5)])
    res = find_eigenvalues(Box(1.0, D, D), lat, 0.5, 20.0)
    ks = [r.k for r in res.eigen_k]
    roots = _sign_scan_roots(
        lambda k: box_wall_mismatch(lat, 1.0, D, D, k).real, 0.5, 20.0, 4001
    )
    assert len(ks) == len(roots)
    assert np.allclose(ks, roots, atol=1e-8)


def test_ring_translation_invariance():
    p1 = make_interaction(1.3, 0.7, (1.3 * 0.8 - 1.0) / 0.7, 0.8, omega_phase=0.4)
    p2 = delta(-1.1)
    lat1 = make_lattice([PlacedInteraction(p1, -1.0), PlacedInteraction(p2, 1.4)])
    lat2 = make_lattice([PlacedInteraction(p1, -0.2), PlacedInteraction(p2, 2.2)])
    r1 = find_eigenvalues(Ring(6.0), lat1, 0.3, 6.0)
    r2 = find_eigenvalues(Ring(6.0), lat2, 0.3, 6.0)
    k1 = [r.k for r in r1.eigen_k]
    k2 = [r.k for r in r2.eigen_k]
    assert len(k1) == len(k2)
    assert np.allclose(k1, k2, atol=1e-8)


def test_attractive_site_lowers_ground_state():
    res0 = find_eigenvalues(Box(np.pi, D, D), EMPTY, 0.2, 3.0)
    lat = make_lattice([PlacedInteraction(delta(-0.5), np.pi / 2)])
    res1 = find_eigenvalues(Box(np.pi, D, D), lat, 0.2, 3.0)
    assert res1.eigen_k[0].k < res0.eigen_k[0].k


def test_delta_prime_in_ring():
    lat = make_lattice([PlacedInteraction(delta_prime(1.4), 0.7)])
    res = find_eigenvalues(Ring(5.0), lat, 0.3, 8.0)
    assert res.eigen_k  # nonempty and winding-consistent (checked internally)
    assert all(r.residual < 1e-8 for r in res.eigen_k)


def test_delta_bound_state_frozen():
    res = find_bound_states(Line(), make_lattice([PlacedInteraction(delta(-2.0), 0.0)]), 5.0)
    assert len(res.bound_k) == 1
    rec = res.bound_k[0]
    assert abs(rec.k - 1j) < 1e-10
    assert abs(rec.E + 1.0) < 1e-10
    # repulsive delta binds nothing
    res = find_bound_states(Line(), make_lattice([PlacedInteraction(delta(2.0), 0.0)]), 5.0)
    assert len(res.bound_k) == 0


def test_delta_prime_bound_state_frozen():
    res = find_bound_states(Line(), make_lattice([PlacedInteraction(delta_prime(-0.8), 0.3)]), 10.0)
    assert len(res.bound_k) == 1
    assert abs(res.bound_k[0].k.imag - 2.5) < 1e-9


def test_two_delta_doublet_vs_oracle():
    lat = make_lattice(
        [PlacedInteraction(delta(-2.0), 0.0), PlacedInteraction(delta(-2.0), 5.0)]
    )
    res = find_bound_states(Line(), lat, 3.0)
    kappas = sorted(r.k.imag for r in res.bound_k)
    assert len(kappas) == 2
    roots = _sign_scan_roots(lambda x: bound_mismatch(Line(), lat, x).real, 0.5, 2.0, 2001)
    assert np.allclose(kappas, sorted(roots), atol=1e-8)
    # weak splitting around the isolated-site kappa = 1
    assert all(abs(kap - 1.0) < 0.02 for kap in kappas)


def test_halfline_bound_vs_oracle():
    lat = make_lattice([PlacedInteraction(delta(-2.0), 3.0)])
    res = find_bound_states(HalfLine(D), lat, 4.0)
    kappas = sorted(r.k.imag for r in res.bound_k)
    roots = _sign_scan_roots(
        lambda x: bound_mismatch(HalfLine(D), lat, x).real, 0.01, 4.0, 4001
    )
    assert len(kappas) == len(roots)
    assert np.allclose(kappas, sorted(roots), atol=1e-8)


def test_mixed_lattice_bound_vs_oracle():
    lat = make_lattice(
        [
            PlacedInteraction(
                make_interaction(1.2, -0.5, (1.2 * 0.9 - 1.0) / -0.5, 0.9, omega_phase=0.7), -1.0
            ),
            PlacedInteraction(delta(-3.0), 1.0),
        ]
    )
    res = find_bound_states(Line(), lat, 6.0)
    omega = np.prod([item.params.omega for item in lat.interactions])

    def mism(kappa):
        return (bound_mismatch(Line(), lat, kappa) * np.conj(omega)).real

    roots = _sign_scan_roots(mism, 0.01, 6.0, 6001)
    kappas = sorted(r.k.imag for r in res.bound_k)
    assert len(kappas) == len(roots)
    assert np.allclose(kappas, sorted(roots), atol=1e-7)


def test_bound_residuals_small():
    lat = make_lattice(
        [PlacedInteraction(delta(-1.5), -0.7), PlacedInteraction(delta_prime(-1.1), 0.9)]
    )
    res = find_bound_states(Line(), lat, 8.0)
    assert res.bound_k
    assert all(r.residual < 1e-9 for r in res.bound_k)
    assert all(r.E == pytest.approx(-r.k.imag ** 2, rel=1e-12) for r in res.bound_k)


def test_dos_free_line():
    rho = density_of_states(Line(), EMPTY, [4.0], 1e-6, (0.0, 1.0))
    # per unit length: rho(E) = 1/(2 pi sqrt(E)) x (window length)
    assert abs(rho[0] - 1.0 / (4.0 * np.pi)) < 1e-6


def test_dos_box_level_weight():
    # a Lorentzian of half-width eta integrates to the level count inside
    # the window; the E grid must resolve eta (spacing <= eta/5)
    E_grid = np.linspace(0.5, 1.5, 5001)
    rho = density_of_states(Box(np.pi, D, D), EMPTY, list(E_grid), 1e-3, (1e-3, np.pi - 1e-3))
    weight = np.trapezoid(rho, E_grid)
    assert abs(weight - 1.0) < 0.02


def test_dos_bound_state_peak():
    E_grid = np.linspace(-1.3, -0.7, 121)
    lat = make_lattice([PlacedInteraction(delta(-2.0), 0.0)])
    rho = density_of_states(Line(), lat, list(E_grid), 1e-3, (-20.0, 20.0))
    peak = E_grid[int(np.argmax(rho))]
    assert abs(peak + 1.0) < 0.01
    assert all(r >= -1e-9 for r in rho)


def test_spectrum_validation():
    with pytest.raises(ValidationError):
        find_eigenvalues(Line(), EMPTY, 0.5, 2.0)
    with pytest.raises(ValidationError):
        find_eigenvalues(Box(np.pi, D, D), EMPTY, -1.0, 2.0)
    with pytest.raises(ValidationError):
        find_bound_states(Box(np.pi, D, D), EMPTY, 2.0)
    with pytest.raises(ValidationError):
        find_bound_states(Line(), EMPTY, -1.0)
    with pytest.raises(ValidationError):
        density_of_states(Line(), EMPTY, [1.0], -1e-3, (0.0, 1.0))
    with pytest.raises(ValidationError):
        density_of_states(Line(), EMPTY, [1.0], 1e-3, (1.0, 0.0))
