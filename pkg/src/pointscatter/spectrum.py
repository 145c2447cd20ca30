"""Spectra of point-interaction lattices.

Eigenvalues of the closed geometries are the real-k zeros of the secular
denominator D: for the box D = 1 - r_left rho_R with rho_R the dressed
reflection of the lattice-plus-right-wall stack seen from the leftmost
cell, for the ring D = (1 - T P)(1 - T' P) - R R' P^2 with P = e^{ikL}
built from the full-lattice dressed block.  Bound states on the open
geometries are the positive-imaginary-axis poles of the transmission
(zeros of 1/T at k = i kappa), where the secular function is real.  The
density of states follows from the diagonal Green function at complex
energy E + i eta, integrated in closed form per cell.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import oracle
from .composition import (
    EMPTY_DRESSED,
    DressedBlock,
    compose_dressed,
    dressed_site,
    wall_block,
)
from .errors import (
    EtaTooSmall,
    NumericalError,
    PoleHit,
    ResonanceDenominator,
    ScanTooCoarse,
    SpectralPole,
    ValidationError,
)
from .greens import diagonal_integral
from .model import (
    Box,
    Geometry,
    HalfLine,
    Lattice,
    Line,
    Ring,
    Wavenumber,
    validate_geometry_lattice,
)
from .amplitudes import single_bound_poles

RESIDUAL_TOL = 1e-10
RECT_HALF_WIDTH = 1e-4
KAPPA_MIN = 1e-9


@dataclass(frozen=True)
class EigenvalueRecord:
    """One positive-energy eigenvalue: E = k^2."""

    k: float
    multiplicity: int
    residual: float


@dataclass(frozen=True)
class BoundStateRecord:
    """One negative-energy bound state at k = i kappa, E = -kappa^2."""

    k: complex
    E: float
    residual: float


@dataclass(frozen=True)
class SpectrumResult:
    eigen_k: tuple[EigenvalueRecord, ...] = ()
    bound_k: tuple[BoundStateRecord, ...] = ()


# ---------------------------------------------------------------------------
# Secular functions.  Each returns (value, scale) so residuals can be
# reported relative to the natural magnitude of the expression.
# ---------------------------------------------------------------------------


def _lattice_dressed(lat: Lattice, kn: Wavenumber) -> DressedBlock:
    block = EMPTY_DRESSED
    for item in lat:
        block = compose_dressed(block, dressed_site(item, kn))
    return block


def box_secular(lat: Lattice, L: float, left, right) -> Callable[[complex], tuple[complex, float]]:
    def dfun(k: complex) -> tuple[complex, float]:
        kn = Wavenumber(k)
        r_left = wall_block(left, 0.0, kn).r_minus
        stack = compose_dressed(_lattice_dressed(lat, kn), wall_block(right, L, kn))
        prod = r_left * stack.r_plus
        return 1.0 - prod, max(1.0, abs(prod))

    return dfun


def ring_secular(lat: Lattice, L: float) -> Callable[[complex], tuple[complex, float]]:
    def dfun(k: complex) -> tuple[complex, float]:
        kn = Wavenumber(k)
        blk = _lattice_dressed(lat, kn)
        p = cmath.exp(1j * kn.k * L)
        value = (1.0 - blk.t_plus * p) * (1.0 - blk.t_minus * p) - blk.r_plus * blk.r_minus * p * p
        scale = max(
            1.0,
            abs(blk.t_plus * p) + abs(blk.t_minus * p) + abs(blk.t_plus * blk.t_minus * p * p)
            + abs(blk.r_plus * blk.r_minus * p * p),
        )
        return value, scale

    return dfun


def _eval_secular(dfun, k: complex) -> tuple[complex, float]:
    """Evaluate, stepping off isolated internal resonances of sub-blocks."""
    try:
        return dfun(k)
    except ResonanceDenominator:
        return dfun(k + 1e-9 * (1.0 + 1j))


# ---------------------------------------------------------------------------
# Winding numbers by adaptive phase tracking.
# ---------------------------------------------------------------------------


def _winding_number(
    dfun,
    vertices: Sequence[complex],
    base_step: float,
    seeds: Sequence[float] = (),
    max_depth: int = 40,
) -> int:
    """Zeros (minus poles) of D inside the closed polygon, by tracking the
    continuous argument of D along it.

    Edges are pre-partitioned at base_step (the same resolution as the
    root scan, so the Fabry-Perot phase advances by well under pi/2 per
    segment), with extra sample points clustered around each seed (known
    roots near the contour, where a double zero would otherwise alias a
    +/-2pi wind into nothing).  Each segment is then bisected until its
    phase increment is below pi/2."""

    def phase_change(z0: complex, f0: complex, z1: complex, f1: complex, depth: int) -> float:
        d = cmath.phase(f1 / f0)
        if abs(d) < 0.5 * math.pi:
            return d
        if depth >= max_depth:
            raise ScanTooCoarse(
                f"cannot track the secular phase between k={z0!r} and k={z1!r}"
            )
        zm = 0.5 * (z0 + z1)
        fm, _ = _eval_secular(dfun, zm)
        if fm == 0:
            zm += 1e-13 * (1.0 + 1j)
            fm, _ = _eval_secular(dfun, zm)
        return phase_change(z0, f0, zm, fm, depth + 1) + phase_change(zm, fm, z1, f1, depth + 1)

    offsets = (-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0)
    pts: list[complex] = []
    n_edges = len(vertices)
    for i in range(n_edges):
        z0 = vertices[i]
        z1 = vertices[(i + 1) % n_edges]
        length = abs(z1 - z0)
        n_seg = max(8, int(math.ceil(length / base_step)))
        ts = set(float(j) / n_seg for j in range(n_seg))
        if z1.real != z0.real:
            for s in seeds:
                for off in offsets:
                    t = (s + off * RECT_HALF_WIDTH - z0.real) / (z1.real - z0.real)
                    if 1e-9 < t < 1.0 - 1e-9:
                        ts.add(t)
        pts.extend(z0 + t * (z1 - z0) for t in sorted(ts))
    pts.append(pts[0])

    vals = []
    for z in pts:
        f, _ = _eval_secular(dfun, z)
        if f == 0:
            raise ScanTooCoarse(f"secular function vanishes exactly on the contour at k={z!r}")
        vals.append(f)
    total = 0.0
    for i in range(len(pts) - 1):
        total += phase_change(pts[i], vals[i], pts[i + 1], vals[i + 1], 0)
    winding = total / (2.0 * math.pi)
    rounded = int(round(winding))
    if abs(winding - rounded) > 0.25:
        raise ScanTooCoarse(f"non-integer winding {winding!r} along the contour")
    return rounded


def _rectangle(k_lo: float, k_hi: float, h: float) -> list[complex]:
    return [k_lo - 1j * h, k_hi - 1j * h, k_hi + 1j * h, k_lo + 1j * h]


# ---------------------------------------------------------------------------
# Eigenvalues.
# ---------------------------------------------------------------------------


def _newton_real(dfun, k0: float, k_lo: float, k_hi: float, step_cap: float) -> Optional[float]:
    """Damped Newton iteration on the real axis.  Linear-rate convergence at
    double roots is expected, so the iteration budget is generous."""
    k = k0
    h = 1e-7
    for _ in range(200):
        f, scale = _eval_secular(dfun, k)
        if abs(f) < 1e-16 * scale:
            break
        fp, _ = _eval_secular(dfun, k + h)
        fm, _ = _eval_secular(dfun, k - h)
        deriv = (fp - fm) / (2.0 * h)
        if deriv == 0:
            return None
        step = -(f / deriv)
        move = step.real
        if abs(move) > step_cap:
            move = math.copysign(step_cap, move)
        k_new = k + move
        if k_new < k_lo or k_new > k_hi:
            k_new = min(max(k_new, k_lo), k_hi)
        if abs(k_new - k) < 1e-15 * max(1.0, abs(k)):
            k = k_new
            break
        k = k_new
    return k


def find_eigenvalues(geom: Geometry, lat: Lattice, k_min: float, k_max: float) -> SpectrumResult:
    """All zeros of the secular denominator on (k_min, k_max) for a box or
    ring, with argument-principle multiplicities."""
    if not isinstance(geom, (Box, Ring)):
        raise ValidationError("find_eigenvalues requires a Box or Ring geometry")
    validate_geometry_lattice(geom, lat)
    if not (0 < k_min < k_max):
        raise ValidationError(f"need 0 < k_min < k_max, got ({k_min!r}, {k_max!r})")
    if k_min <= KAPPA_MIN:
        raise ValidationError(f"k_min must exceed {KAPPA_MIN:g}")

    if isinstance(geom, Box):
        dfun = box_secular(lat, geom.L, geom.left, geom.right)
        l_total = geom.L
    else:
        dfun = ring_secular(lat, geom.L)
        l_total = geom.L

    base = min(math.pi / (4.0 * l_total), (k_max - k_min) / 2000.0)
    # A near-degenerate pair (a site splits each ring level by ~1/(kL)) can
    # hide between scan points, so on a winding mismatch rescan denser.
    records: list[EigenvalueRecord] = []
    total = found = 0
    for refine in (1.0, 4.0, 16.0):
        step = base / refine
        n_pts = max(64, int(math.ceil((k_max - k_min) / step)) + 1)
        grid = np.linspace(k_min, k_max, n_pts)
        mags = np.empty(n_pts)
        for i, kk in enumerate(grid):
            val, _ = _eval_secular(dfun, float(kk))
            mags[i] = abs(val)

        candidates = []
        for i in range(1, n_pts - 1):
            if mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]:
                candidates.append(float(grid[i]))
        if mags[0] < mags[1]:
            candidates.append(float(grid[0]))
        if mags[-1] < mags[-2]:
            candidates.append(float(grid[-1]))

        roots: list[float] = []
        for k0 in candidates:
            k_root = _newton_real(dfun, k0, k_min, k_max, step_cap=4.0 * step)
            if k_root is None or not (k_min < k_root < k_max):
                continue
            val, scale = _eval_secular(dfun, k_root)
            if abs(val) >= RESIDUAL_TOL * scale:
                continue
            if any(abs(k_root - r) < 4.0 * RECT_HALF_WIDTH for r in roots):
                continue
            roots.append(k_root)
        roots.sort()

        records = []
        for k_root in roots:
            h = RECT_HALF_WIDTH
            lo = max(k_min, k_root - h)
            hi = min(k_max, k_root + h)
            mult = _winding_number(dfun, _rectangle(lo, hi, h), base_step=h / 4.0, seeds=[k_root])
            if mult < 1:
                continue
            val, scale = _eval_secular(dfun, k_root)
            records.append(EigenvalueRecord(k=k_root, multiplicity=mult, residual=abs(val) / scale))

        total = _winding_number(
            dfun, _rectangle(k_min, k_max, RECT_HALF_WIDTH), base_step=step, seeds=roots
        )
        found = sum(r.multiplicity for r in records)
        if total == found:
            break
    if total != found:
        raise ScanTooCoarse(
            f"argument principle counts {total} zeros on ({k_min:g}, {k_max:g}) "
            f"but the scan found {found}"
        )

    if isinstance(geom, Ring):
        for rec in records:
            defect = oracle.ring_closure_defect(lat, geom.L, rec.k)
            if defect > 1e-6:
                raise NumericalError(
                    f"ring eigenvalue candidate k={rec.k!r} fails the independent "
                    f"closure check (defect {defect:g}); possible spurious zero"
                )

    return SpectrumResult(eigen_k=tuple(records))


# ---------------------------------------------------------------------------
# Bound states.
# ---------------------------------------------------------------------------


def bound_secular(geom: Geometry, lat: Lattice) -> Callable[[float], tuple[float, float, float]]:
    """The real secular function F(kappa) on the positive imaginary axis.

    Line: F = Omega / T(i kappa) with Omega the product of the omega
    phases, which makes F real and entire in kappa.  Half-line: the wall
    replaces the transmission channel, and the pole condition becomes
    F = 1 - r_wall * R(i kappa) of the lattice stack, again real.
    Returns (F, |secular|, scale) where |secular| is the reported
    residual magnitude."""
    omega_total = 1.0 + 0.0j
    for item in lat:
        omega_total *= item.params.omega

    if isinstance(geom, Line):

        def ffun(kappa: float) -> tuple[float, float, float]:
            kn = Wavenumber(1j * kappa)
            blk = _lattice_dressed(lat, kn)
            inv_t = 1.0 / blk.t_plus
            value = omega_total * inv_t
            return value.real, abs(inv_t), max(1.0, abs(inv_t))

        return ffun

    if isinstance(geom, HalfLine):
        r_wall = geom.wall.reflection

        def ffun(kappa: float) -> tuple[float, float, float]:
            kn = Wavenumber(1j * kappa)
            blk = _lattice_dressed(lat, kn)
            value = 1.0 - r_wall * blk.r_plus
            return value.real, abs(value), max(1.0, abs(r_wall * blk.r_plus))

        return ffun

    raise ValidationError("bound states: geometry must be Line or HalfLine")


def _eval_bound(ffun, kappa: float) -> tuple[float, float, float]:
    # An exact pole of the bare amplitudes at k = i kappa is a bound state
    # itself (1/T vanishes there); nudge off it to keep the scan smooth.
    try:
        return ffun(kappa)
    except (PoleHit, ResonanceDenominator):
        return ffun(kappa + 1e-9)


def find_bound_states(geom: Geometry, lat: Lattice, kappa_max: float) -> SpectrumResult:
    """Bound states E = -kappa^2 for kappa in (1e-9, kappa_max]."""
    if not isinstance(geom, (Line, HalfLine)):
        raise ValidationError("find_bound_states requires a Line or HalfLine geometry")
    validate_geometry_lattice(geom, lat)
    if not kappa_max > 0:
        raise ValidationError(f"kappa_max must be > 0, got {kappa_max!r}")

    ffun = bound_secular(geom, lat)
    lo = max(KAPPA_MIN * 10.0, 1e-8)
    if kappa_max <= lo:
        return SpectrumResult()
    n_pts = max(800, 200 * max(1, len(lat)))
    grid = np.linspace(lo, kappa_max, n_pts)
    vals = np.array([_eval_bound(ffun, float(x))[0] for x in grid])

    roots: list[float] = []

    def polish(k0: float) -> Optional[float]:
        k = k0
        h = 1e-7
        for _ in range(100):
            f, _, scale = _eval_bound(ffun, k)
            if abs(f) < 1e-16 * scale:
                return k
            fp = _eval_bound(ffun, k + h)[0]
            fm = _eval_bound(ffun, max(k - h, lo / 2))[0]
            deriv = (fp - fm) / (2.0 * h)
            if deriv == 0:
                return None
            k_new = k - f / deriv
            if not (lo / 2 <= k_new <= kappa_max * 1.001):
                return None
            if abs(k_new - k) < 1e-15 * max(1.0, k):
                return k_new
            k = k_new
        return k

    from scipy.optimize import brentq

    for i in range(n_pts - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0:
            roots.append(float(brentq(lambda x: _eval_bound(ffun, x)[0], a, b, xtol=1e-14)))
    # |F| minima that do not change sign (even-order touching zeros).
    absvals = np.abs(vals)
    for i in range(1, n_pts - 1):
        if absvals[i] <= absvals[i - 1] and absvals[i] <= absvals[i + 1]:
            k_root = polish(float(grid[i]))
            if k_root is None:
                continue
            f, res, scale = _eval_bound(ffun, k_root)
            if abs(f) < RESIDUAL_TOL * scale:
                roots.append(k_root)

    roots = sorted(roots)
    merged: list[float] = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-7 * max(1.0, r):
            merged.append(r)

    records = []
    for kappa in merged:
        _, res, scale = _eval_bound(ffun, kappa)
        if res >= RESIDUAL_TOL * scale:
            continue
        records.append(BoundStateRecord(k=1j * kappa, E=-(kappa * kappa), residual=res))

    if isinstance(geom, Line) and len(lat) == 1:
        closed = [
            z.imag for z in single_bound_poles(lat.interactions[0].params)
            if lo < z.imag <= kappa_max
        ]
        closed.sort()
        found = [rec.k.imag for rec in records]
        if len(closed) != len(found) or any(
            abs(a - b) > 1e-8 * max(1.0, abs(b)) for a, b in zip(found, closed)
        ):
            raise NumericalError(
                f"single-interaction bound states {found!r} disagree with the "
                f"closed-form poles {closed!r}"
            )

    return SpectrumResult(bound_k=tuple(records))


# ---------------------------------------------------------------------------
# Density of states.
# ---------------------------------------------------------------------------


def density_of_states(
    geom: Geometry,
    lat: Lattice,
    E_grid: Sequence[float],
    eta: float,
    x_window: tuple[float, float],
) -> list[float]:
    """rho(E) = -(1/pi) Im integral over x_window of G(x, x; sqrt(E + i eta)),
    with the x integral done in closed form per lattice cell."""
    if not eta > 0:
        raise ValidationError(f"eta must be > 0, got {eta!r}")
    a, b = float(x_window[0]), float(x_window[1])
    if not a < b:
        raise ValidationError(f"x_window must be increasing, got {x_window!r}")
    out = []
    for energy in E_grid:
        k = cmath.sqrt(complex(energy) + 1j * eta)
        if k.imag < 0:
            k = -k
        try:
            total = diagonal_integral(geom, lat, a, b, k)
        except (SpectralPole, ResonanceDenominator) as exc:
            raise EtaTooSmall(
                f"spectral pole within the broadening width at E={energy!r}, eta={eta!r}"
            ) from exc
        out.append(-total.imag / math.pi)
    return out
