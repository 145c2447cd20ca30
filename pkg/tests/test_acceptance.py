"""Acceptance gate: nine criteria, each printing one pass/fail line with
its measured figure and runtime budget.  Run with -s (or read the captured
stdout) to see the lines."""

import cmath
import time

import numpy as np

from pointscatter.amplitudes import bare_amplitudes, conjugation_residuals, unitarity_residuals
from pointscatter.composition import compose_block
from pointscatter.dynamics import GaussianPacket, evolve
from pointscatter.greens import green, green_derivative, green_single
from pointscatter.model import (
    Box,
    HalfLine,
    Line,
    PlacedInteraction,
    Ring,
    WallCondition,
    delta,
    delta_prime,
    domain_interval,
    make_lattice,
)
from pointscatter.oracle import oracle_block_amplitudes, oracle_green, site_matrix
from pointscatter.spectrum import density_of_states, find_bound_states, find_eigenvalues

from helpers import far_from, random_interaction, random_lattice

D = WallCondition.DIRICHLET
N = WallCondition.NEUMANN
EMPTY = make_lattice(())


def _report(num: int, label: str, ok: bool, metric: str, elapsed: float, budget: float) -> None:
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(
        f"{status} criterion {num}: {label} ({metric}) [{elapsed:.2f}s < {budget:.0f}s]",
        flush=True,
    )
    assert ok, f"criterion {num}: {label}: {metric}"
    assert elapsed < budget, f"criterion {num} exceeded {budget}s budget ({elapsed:.2f}s)"


def test_criterion_1_unitarity_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(10_000):
        p = random_interaction(rng)
        k = float(rng.uniform(0.1, 10.0))
        worst = max(worst, *unitarity_residuals(bare_amplitudes(p, k)))
        worst = max(worst, *conjugation_residuals(p, k))
    elapsed = time.perf_counter() - t0
    _report(1, "unitarity suite, 1e4 interactions", worst < 1e-12,
            f"max residual {worst:.2e}", elapsed, 5.0)


def test_criterion_2_single_site_closed_forms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(102)
    worst = 0.0
    count = 0
    while count < 100:
        gamma = float(rng.uniform(-4.0, 4.0))
        is_delta = count % 2 == 0
        p = delta(gamma) if is_delta else delta_prime(gamma)
        k = float(rng.uniform(0.2, 8.0))
        y = float(rng.uniform(-2.0, 2.0))
        x_f = float(rng.uniform(-5.0, 5.0))
        x_i = float(rng.uniform(-5.0, 5.0))
        if not far_from((y,), x_f, x_i, gap=1e-2):
            continue
        count += 1
        got = green_single(p, y, x_f, x_i, k).value
        # closed forms: both-side reflection with dressed phases, or bare
        # transmission across the site
        den = -p.c + 1j * k * (p.d + p.a) + p.b * k * k
        s0 = 1.0 / (2j * k)
        free = cmath.exp(1j * k * abs(x_f - x_i)) * s0
        if x_f < y and x_i < y:
            r = (p.c + p.b * k * k) / den
            want = free + r * cmath.exp(1j * k * (2 * y - x_f - x_i)) * s0
        elif x_f > y and x_i > y:
            r = (p.c + p.b * k * k) / den
            want = free + r * cmath.exp(1j * k * (x_f + x_i - 2 * y)) * s0
        else:
            want = 2j * k / den * cmath.exp(1j * k * abs(x_f - x_i)) * s0
        worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - t0
    _report(2, "delta/delta-prime closed forms", worst < 1e-12,
            f"max rel err {worst:.2e}", elapsed, 1.0)


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(103)
    worst = 0.0
    for case in range(50):
        n = int(rng.integers(0, 7))
        L = float(rng.uniform(3.0, 6.0))
        geoms = [Line(), HalfLine(D if case % 2 else N),
                 Box(L, D if case % 2 else N, N if case % 3 else D), Ring(L)]
        for geom in geoms:
            lo, hi = domain_interval(geom)
            lo = max(lo, -4.0) + 0.15
            hi = min(hi, 4.0) - 0.15
            lat = random_lattice(rng, n, lo + 0.1, hi - 0.1)
            k = float(rng.uniform(0.2, 6.0))
            hits = 0
            while hits < 10:
                x_f = float(rng.uniform(lo, hi))
                x_i = float(rng.uniform(lo, hi))
                if not far_from(lat.positions, x_f, x_i, gap=1e-2):
                    continue
                hits += 1
                g = green(geom, lat, x_f, x_i, k).value
                go = oracle_green(geom, lat, x_f, x_i, k)
                worst = max(worst, abs(g - go) / abs(go))
    elapsed = time.perf_counter() - t0
    _report(3, "Green functions vs oracle, 4 geometries", worst <= 1e-10,
            f"max rel err {worst:.2e}", elapsed, 30.0)


def test_criterion_4_composition_vs_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        lat = random_lattice(rng, n, -4.0, 4.0, min_gap=5e-3)
        k = float(rng.uniform(0.2, 8.0))
        l = int(rng.integers(1, n + 1))
        m = int(rng.integers(l - 1, n + 1))
        mine = compose_block(lat, l, m, k)
        orc = oracle_block_amplitudes(lat, l, m, k)
        for f in ("r_plus", "r_minus", "t_plus", "t_minus"):
            worst = max(worst, abs(getattr(mine, f) - getattr(orc, f)))
    elapsed = time.perf_counter() - t0
    _report(4, "compose_block vs oracle, N <= 8, 200 cases", worst <= 1e-10,
            f"max abs err {worst:.2e}", elapsed, 5.0)


def test_criterion_5_spectra():
    t0 = time.perf_counter()
    ok = True
    metrics = []
    res = find_eigenvalues(Box(np.pi, D, D), EMPTY, 0.5, 10.5)
    err_dd = max(abs(r.k - n) for r, n in zip(res.eigen_k, range(1, 11)))
    ok &= len(res.eigen_k) == 10 and err_dd < 1e-8
    ok &= sum(r.multiplicity for r in res.eigen_k) == 10
    metrics.append(f"DD {err_dd:.1e}")
    res = find_eigenvalues(Box(np.pi, D, N), EMPTY, 0.1, 10.0)
    err_dn = max(abs(r.k - (n - 0.5)) for r, n in zip(res.eigen_k, range(1, 11)))
    ok &= len(res.eigen_k) == 10 and err_dn < 1e-8
    metrics.append(f"DN {err_dn:.1e}")
    res = find_eigenvalues(Ring(2 * np.pi), EMPTY, 0.5, 10.5)
    err_ring = max(abs(r.k - n) for r, n in zip(res.eigen_k, range(1, 11)))
    ok &= len(res.eigen_k) == 10 and err_ring < 1e-8
    ok &= all(r.multiplicity == 2 for r in res.eigen_k)
    metrics.append(f"ring {err_ring:.1e} mult2")
    elapsed = time.perf_counter() - t0
    _report(5, "box and ring spectra with winding counts", ok,
            ", ".join(metrics), elapsed, 10.0)


def test_criterion_6_bound_state():
    t0 = time.perf_counter()
    lat = make_lattice([PlacedInteraction(delta(-2.0), 0.0)])
    res = find_bound_states(Line(), lat, 5.0)
    ok = len(res.bound_k) == 1
    err = abs(res.bound_k[0].E + 1.0) if ok else float("inf")
    elapsed = time.perf_counter() - t0
    _report(6, "delta gamma=-2 bound state E=-1", ok and err < 1e-10,
            f"|E+1| = {err:.2e}", elapsed, 1.0)


def test_criterion_7_density_of_states():
    t0 = time.perf_counter()
    rho = density_of_states(Line(), EMPTY, [4.0], 1e-6, (0.0, 1.0))
    err_free = abs(rho[0] - 1.0 / (4.0 * np.pi))
    E_grid = np.linspace(0.5, 1.5, 5001)
    rho_box = density_of_states(Box(np.pi, D, D), EMPTY, list(E_grid), 1e-3,
                                (1e-3, np.pi - 1e-3))
    weight = float(np.trapezoid(rho_box, E_grid))
    ok = err_free < 1e-6 and abs(weight - 1.0) < 0.02
    elapsed = time.perf_counter() - t0
    _report(7, "free-line value and box level weight", ok,
            f"|rho-1/4pi| = {err_free:.1e}, weight = {weight:.4f}", elapsed, 10.0)


def test_criterion_8_dynamics():
    t0 = time.perf_counter()
    pkt = GaussianPacket(x0=0.0, k0=2.0, sigma=1.0)
    grid = np.linspace(-12.0, 16.0, 1401)
    res = evolve(Line(), EMPTY, pkt, [0.0, 0.5, 1.0], grid)
    l2_worst = 0.0
    for i, t in enumerate(res.times):
        diff = res.values[i] - pkt.free_evolution(grid, t)
        l2_worst = max(l2_worst, float(np.sqrt(np.trapezoid(np.abs(diff) ** 2, grid))))
    drift = max(abs(n - 1.0) for n in res.norms)
    L = np.pi
    pkt_box = GaussianPacket(x0=L / 2.0, k0=0.0, sigma=0.2)
    grid_box = np.linspace(0.0, L, 901)
    t_rev = 2.0 * L**2 / np.pi
    res_box = evolve(Box(L, D, D), EMPTY, pkt_box, [0.0, t_rev], grid_box)
    fidelity = abs(np.trapezoid(np.conj(res_box.values[0]) * res_box.values[1], grid_box))
    ok = l2_worst <= 1e-4 and drift <= 1e-4 and fidelity >= 0.99
    elapsed = time.perf_counter() - t0
    _report(8, "free Gaussian and box revival", ok,
            f"L2 {l2_worst:.1e}, drift {drift:.1e}, fidelity {fidelity:.4f}",
            elapsed, 60.0)


def test_criterion_9_pde_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(109)
    worst = {"pde": 0.0, "jump": 0.0, "matching": 0.0, "boundary": 0.0}
    evaluations = 0
    eps = 1e-9
    while evaluations < 500:
        pick = int(rng.integers(0, 4))
        L = float(rng.uniform(3.0, 6.0))
        geom = (Line(), HalfLine(D if evaluations % 2 else N),
                Box(L, D, N), Ring(L))[pick]
        lo, hi = domain_interval(geom)
        lo = max(lo, -4.0)
        hi = min(hi, 4.0)
        n = int(rng.integers(0, 4))
        lat = random_lattice(rng, n, lo + 0.4, hi - 0.4, min_gap=0.15)
        k = float(rng.uniform(0.3, 5.0))
        x_i = float(rng.uniform(lo + 0.15, hi - 0.15))
        if not far_from(lat.positions, x_i, gap=0.1):
            continue
        evaluations += 1
        # (a) PDE defect off the source by 5-point differences; h balances
        # the O(h^4) truncation against roundoff in the stencil
        x = x_i + (0.35 if x_i + 0.45 < hi else -0.35)
        if far_from(lat.positions, x, gap=0.1) and lo + 0.01 < x < hi - 0.01:
            h = 1e-3
            vals = [green(geom, lat, x + j * h, x_i, k).value for j in (-2, -1, 0, 1, 2)]
            d2 = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (
                12 * h * h
            )
            scale = max(1.0, abs(vals[2]) * k * k)
            worst["pde"] = max(worst["pde"], abs(d2 + k * k * vals[2]) / scale)
        # (b) derivative jump at the source
        dp = green_derivative(geom, lat, x_i + eps, x_i, k)
        dm = green_derivative(geom, lat, x_i - eps, x_i, k)
        worst["jump"] = max(worst["jump"], abs(dp - dm - 1.0))
        # (c) matching at each site: (G, G')(y+) = omega M (G, G')(y-)
        for item in lat.interactions:
            y = item.position
            if abs(y - x_i) < 0.1:
                continue
            gm_ = green(geom, lat, y - eps, x_i, k).value
            dgm = green_derivative(geom, lat, y - eps, x_i, k)
            gp_ = green(geom, lat, y + eps, x_i, k).value
            dgp = green_derivative(geom, lat, y + eps, x_i, k)
            m = site_matrix(item.params)
            pred = m @ np.array([gm_, dgm])
            scale = max(1.0, abs(gp_), abs(dgp))
            worst["matching"] = max(
                worst["matching"],
                max(abs(pred[0] - gp_), abs(pred[1] - dgp)) / scale,
            )
        # (d) boundary conditions
        if isinstance(geom, HalfLine):
            if geom.wall is D:
                worst["boundary"] = max(
                    worst["boundary"], abs(green(geom, lat, eps, x_i, k).value)
                )
            else:
                worst["boundary"] = max(
                    worst["boundary"], abs(green_derivative(geom, lat, eps, x_i, k))
                )
        elif isinstance(geom, Box):
            worst["boundary"] = max(
                worst["boundary"],
                abs(green(geom, lat, eps, x_i, k).value),
                abs(green_derivative(geom, lat, geom.L - eps, x_i, k)),
            )
        elif isinstance(geom, Ring):
            half = geom.L / 2.0
            gp_ = green(geom, lat, half - eps, x_i, k).value
            gm_ = green(geom, lat, -half + eps, x_i, k).value
            worst["boundary"] = max(worst["boundary"], abs(gp_ - gm_) / max(1.0, abs(gp_)))
    ok = all(val < 1e-6 for val in worst.values())
    elapsed = time.perf_counter() - t0
    _report(
        9,
        "PDE defect, jump, matching, boundaries on 500 evaluations",
        ok,
        ", ".join(f"{name} {val:.1e}" for name, val in worst.items()),
        elapsed,
        30.0,
    )
