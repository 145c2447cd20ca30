"""Exact Green functions for point-interaction lattices in four geometries.

One engine covers the line family (line, half-line, box): for a source in
cell m the left and right stacks act as composite mirrors with dressed
reflections rho_L, rho_R, giving the two-mirror form in the source cell
and transmitted interior fields everywhere else.  Walls enter as
transmissionless pseudo-blocks, so the half-line and box are corollaries
of the line machinery.  The ring is solved by cutting the circle at the
source and imposing continuity plus the unit derivative jump across the
seam.  The single-interaction and single-site-ring closed forms are kept
as separate literal code paths and cross-checked against the engine.

Green functions are retarded: G ~ e^{ik|x|}/(2ik) outgoing on open
geometries, with Im k > 0 selecting decay.
"""

from __future__ import annotations

import bisect
import cmath
import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .amplitudes import bare_amplitudes
from .composition import (
    EMPTY_DRESSED,
    DressedBlock,
    compose_dressed,
    dressed_site,
    wall_block,
)
from .errors import OnInteractionPoint, SpectralPole, ValidationError
from .model import (
    Box,
    Geometry,
    HalfLine,
    InteractionParams,
    Lattice,
    Line,
    PlacedInteraction,
    Ring,
    WallCondition,
    Wavenumber,
    as_wavenumber,
    validate_geometry_lattice,
)

ON_POINT_TOL = 1e-12
POLE_TOL = 1e-14


class GreenBranch(enum.Enum):
    """Which closed-form family produced the value."""

    SAME_CELL = "SameCell"
    CROSS_CELL = "CrossCell"
    HALF_LINE = "HalfLine"
    BOX = "Box"
    RING_SINGLE = "RingSingle"
    RING_LATTICE = "RingLattice"


@dataclass(frozen=True)
class GreenEvaluation:
    """A single Green-function value with its evaluation context."""

    value: complex
    x_f: float
    x_i: float
    k: Wavenumber
    branch: GreenBranch


@dataclass(frozen=True)
class WaveField:
    """Piecewise plane-wave field: in cell c the value is
    coef_plus[c] e^{ikx} + coef_minus[c] e^{-ikx}, plus (inside the source
    cell only) the free kernel source_amp e^{ik|x - source_x|}."""

    k: complex
    edges: tuple[float, ...]
    coef_plus: tuple[complex, ...]
    coef_minus: tuple[complex, ...]
    source_x: Optional[float] = None
    source_amp: complex = 0.0
    source_cell: int = -1

    def cell_index(self, x: float) -> int:
        return bisect.bisect_left(self.edges, x)

    def value(self, x: float) -> complex:
        c = self.cell_index(x)
        e = cmath.exp(1j * self.k * x)
        out = self.coef_plus[c] * e + self.coef_minus[c] / e
        if self.source_x is not None and c == self.source_cell:
            out += self.source_amp * cmath.exp(1j * self.k * abs(x - self.source_x))
        return out

    def derivative(self, x: float) -> complex:
        c = self.cell_index(x)
        e = cmath.exp(1j * self.k * x)
        out = 1j * self.k * (self.coef_plus[c] * e - self.coef_minus[c] / e)
        if self.source_x is not None and c == self.source_cell:
            sign = 1.0 if x >= self.source_x else -1.0
            out += sign * 1j * self.k * self.source_amp * cmath.exp(
                1j * self.k * abs(x - self.source_x)
            )
        return out

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        cells = np.searchsorted(self.edges, xs, side="left")
        a = np.asarray(self.coef_plus)[cells]
        b = np.asarray(self.coef_minus)[cells]
        e = np.exp(1j * self.k * xs)
        out = a * e + b / e
        if self.source_x is not None:
            mask = cells == self.source_cell
            if np.any(mask):
                out[mask] += self.source_amp * np.exp(
                    1j * self.k * np.abs(xs[mask] - self.source_x)
                )
        return out


def _pole_check(den: complex, scale: float, what: str) -> None:
    if abs(den) < POLE_TOL * max(1.0, scale):
        raise SpectralPole(f"{what} = {den!r} vanishes: evaluation at a spectral pole")


def _check_off_sites_line(lat: Lattice, points: Sequence[float]) -> None:
    for x in points:
        for item in lat:
            if abs(x - item.position) < ON_POINT_TOL:
                raise OnInteractionPoint(
                    f"x={x!r} coincides with the interaction at y={item.position!r}"
                )


def _check_off_sites_ring(lat: Lattice, L: float, points: Sequence[float]) -> None:
    half = L / 2.0
    for x in points:
        for item in lat:
            d = abs((x - item.position + half) % L - half)
            if d < ON_POINT_TOL:
                raise OnInteractionPoint(
                    f"x={x!r} coincides with the interaction at y={item.position!r} (ring)"
                )


def _check_interval(name: str, x: float, lo: float, hi: float) -> None:
    if not (lo < x < hi):
        raise ValidationError(f"{name}={x!r} outside the open domain ({lo!r}, {hi!r})")


# ---------------------------------------------------------------------------
# Line family: line, half-line, box.
# ---------------------------------------------------------------------------


def _line_family_field(
    lat: Lattice,
    kn: Wavenumber,
    x_i: float,
    left: Optional[tuple[WallCondition, float]],
    right: Optional[tuple[WallCondition, float]],
) -> WaveField:
    """All cell coefficients of G(., x_i) for the line/half-line/box."""
    kv = kn.k
    positions = lat.positions
    n = len(lat)
    cells = [dressed_site(item, kn) for item in lat]

    lefts = [wall_block(left[0], left[1], kn) if left else EMPTY_DRESSED]
    for cell in cells:
        lefts.append(compose_dressed(lefts[-1], cell))
    rights = [wall_block(right[0], right[1], kn) if right else EMPTY_DRESSED]
    for cell in reversed(cells):
        rights.append(compose_dressed(cell, rights[-1]))
    rights.reverse()  # rights[j] = sites j+1..N (+ right wall)

    m = bisect.bisect_left(positions, x_i)
    rho_l = lefts[m].r_minus
    rho_r = rights[m].r_plus
    den = 1.0 - rho_l * rho_r
    _pole_check(den, abs(rho_l * rho_r), "D_cell = 1 - rho_L rho_R")

    s0 = 1.0 / (2j * kv)
    ei = cmath.exp(1j * kv * x_i)
    a = [0j] * (n + 1)
    b = [0j] * (n + 1)
    a[m] = s0 * rho_l * (ei + rho_r / ei) / den
    b[m] = s0 * rho_r * (1.0 / ei + rho_l * ei) / den
    out_right = s0 * (1.0 / ei + rho_l * ei) / den  # total e^{+ikx} amplitude fed rightward
    out_left = s0 * (ei + rho_r / ei) / den  # total e^{-ikx} amplitude fed leftward

    acc = EMPTY_DRESSED
    for j in range(m + 1, n + 1):
        acc = compose_dressed(acc, cells[j - 1])
        q = 1.0 - acc.r_minus * rights[j].r_plus
        _pole_check(q, abs(acc.r_minus * rights[j].r_plus), "interior denominator")
        a[j] = out_right * acc.t_plus / q
        b[j] = rights[j].r_plus * a[j]

    acc = EMPTY_DRESSED
    for j in range(m - 1, -1, -1):
        acc = compose_dressed(cells[j], acc)
        q = 1.0 - lefts[j].r_minus * acc.r_plus
        _pole_check(q, abs(lefts[j].r_minus * acc.r_plus), "interior denominator")
        b[j] = out_left * acc.t_minus / q
        a[j] = lefts[j].r_minus * b[j]

    return WaveField(
        k=kv,
        edges=tuple(positions),
        coef_plus=tuple(a),
        coef_minus=tuple(b),
        source_x=x_i,
        source_amp=s0,
        source_cell=m,
    )


# ---------------------------------------------------------------------------
# Ring: cut the circle at the source and close the seam.
# ---------------------------------------------------------------------------


def _ring_field(lat: Lattice, L: float, kn: Wavenumber, x_i: float) -> WaveField:
    """All cell coefficients of G(., x_i) on the ring x in (-L/2, L/2).

    Working coordinate u = (x - x_i) mod L puts the source at the seam
    u = 0 == L; continuity and the +1 derivative jump there close the
    system for the outer coefficients, interior gaps follow from the
    two-stack formula."""
    kv = kn.k
    half = L / 2.0
    s0 = 1.0 / (2j * kv)
    p = cmath.exp(1j * kv * L)

    shifted = sorted(
        (PlacedInteraction(item.params, (item.position - x_i) % L) for item in lat),
        key=lambda it: it.position,
    )
    m = len(shifted)
    cells = [dressed_site(item, kn) for item in shifted]
    prefixes = [EMPTY_DRESSED]
    for cell in cells:
        prefixes.append(compose_dressed(prefixes[-1], cell))
    suffixes = [EMPTY_DRESSED]
    for cell in reversed(cells):
        suffixes.append(compose_dressed(cell, suffixes[-1]))
    suffixes.reverse()  # suffixes[j] = u-sites j+1..M

    blk = prefixes[m]
    rp, rm, tp, tm = blk.r_plus, blk.r_minus, blk.t_plus, blk.t_minus
    d_ring = (1.0 - tp * p) * (1.0 - tm * p) - rp * rm * p * p
    scale = abs(tp * p) + abs(tm * p) + abs(tp * tm * p * p) + abs(rp * rm * p * p)
    _pole_check(d_ring, scale, "ring denominator")

    kf = blk.k_factor
    alpha = s0 * (1.0 - tm * p + rm * p * p) / d_ring
    beta = s0 * (rp + tm * p + kf * p * p) / d_ring
    gamma = s0 * (tp * (1.0 - tm * p) + rm * p * (1.0 + rp)) / d_ring
    delta = s0 * p * (1.0 + rp - tp * p) / d_ring

    sector_plus = [alpha]
    sector_minus = [beta]
    for j in range(1, m):
        lblk = prefixes[j]
        rblk = suffixes[j]
        q = 1.0 - lblk.r_minus * rblk.r_plus
        _pole_check(q, abs(lblk.r_minus * rblk.r_plus), "ring interior denominator")
        sector_plus.append((lblk.t_plus * alpha + lblk.r_minus * rblk.t_minus * delta) / q)
        sector_minus.append((rblk.t_minus * delta + rblk.r_plus * lblk.t_plus * alpha) / q)
    if m > 0:
        sector_plus.append(gamma)
        sector_minus.append(delta)

    u_edges = [item.position for item in shifted]

    # Translate u-sector coefficients to x cells on (-L/2, L/2).
    edges = sorted([item.position for item in lat] + [x_i])
    a_x = []
    b_x = []
    bounds = [-half] + edges + [half]
    ei = cmath.exp(1j * kv * x_i)
    for c in range(len(edges) + 1):
        mid = 0.5 * (bounds[c] + bounds[c + 1])
        u_mid = (mid - x_i) % L
        s = bisect.bisect_left(u_edges, u_mid)
        wrap_p = p if mid < x_i else 1.0
        a_x.append(sector_plus[s] / ei * wrap_p)
        b_x.append(sector_minus[s] * ei / wrap_p)

    return WaveField(
        k=kv,
        edges=tuple(edges),
        coef_plus=tuple(a_x),
        coef_minus=tuple(b_x),
    )


# ---------------------------------------------------------------------------
# Public operations.
# ---------------------------------------------------------------------------


def green_single(p: InteractionParams, y: float, x_f: float, x_i: float, k) -> GreenEvaluation:
    """Single interaction at y on the line, by the literal one-scatterer
    closed form after shifting the interaction to the origin.

    With xi = x - y: opposite sides give G = T^{(+/-)} e^{ik|dx|}/(2ik)
    (+ when the field point is on the right); equal sides give
    G = [e^{ik|dx|} + R e^{ik(|xi_f| + |xi_i|)}]/(2ik) with R = R^{(+)}
    for both points left and R = R^{(-)} for both points right (the
    reflection is off the side the points share)."""
    kn = as_wavenumber(k)
    kv = kn.k
    xf = x_f - y
    xi = x_i - y
    for name, val in (("x_f", x_f), ("x_i", x_i)):
        if abs(val - y) < ON_POINT_TOL:
            raise OnInteractionPoint(f"{name}={val!r} coincides with the interaction at y={y!r}")
    amp = bare_amplitudes(p, kn)
    s0 = 1.0 / (2j * kv)
    dist = cmath.exp(1j * kv * abs(xf - xi))
    if xf * xi < 0:
        t = amp.t_plus if xf > 0 else amp.t_minus
        value = s0 * t * dist
        branch = GreenBranch.CROSS_CELL
    else:
        r = amp.r_minus if xf > 0 else amp.r_plus
        value = s0 * (dist + r * cmath.exp(1j * kv * (abs(xf) + abs(xi))))
        branch = GreenBranch.SAME_CELL
    return GreenEvaluation(value, x_f, x_i, kn, branch)


def _line_family_eval(
    lat: Lattice,
    kn: Wavenumber,
    x_f: float,
    x_i: float,
    left: Optional[tuple[WallCondition, float]],
    right: Optional[tuple[WallCondition, float]],
) -> tuple[complex, bool]:
    field = _line_family_field(lat, kn, x_i, left, right)
    same = field.cell_index(x_f) == field.source_cell
    return field.value(x_f), same


def green_line(lat: Lattice, x_f: float, x_i: float, k) -> GreenEvaluation:
    """N interactions on the infinite line."""
    kn = as_wavenumber(k)
    _check_off_sites_line(lat, (x_f, x_i))
    value, same = _line_family_eval(lat, kn, x_f, x_i, None, None)
    branch = GreenBranch.SAME_CELL if same else GreenBranch.CROSS_CELL
    return GreenEvaluation(value, x_f, x_i, kn, branch)


def green_halfline(lat: Lattice, wall: WallCondition, x_f: float, x_i: float, k) -> GreenEvaluation:
    """N interactions on x > 0 with a Dirichlet or Neumann wall at 0."""
    kn = as_wavenumber(k)
    geom = HalfLine(wall)
    validate_geometry_lattice(geom, lat)
    _check_off_sites_line(lat, (x_f, x_i))
    for name, val in (("x_f", x_f), ("x_i", x_i)):
        if val <= 0.0:
            raise ValidationError(f"{name}={val!r} must be > 0 on the half-line")
    value, _ = _line_family_eval(lat, kn, x_f, x_i, (wall, 0.0), None)
    return GreenEvaluation(value, x_f, x_i, kn, GreenBranch.HALF_LINE)


def green_box(
    lat: Lattice,
    L: float,
    left: WallCondition,
    right: WallCondition,
    x_f: float,
    x_i: float,
    k,
) -> GreenEvaluation:
    """N interactions inside a box (0, L) with walls at both ends."""
    kn = as_wavenumber(k)
    geom = Box(L, left, right)
    validate_geometry_lattice(geom, lat)
    _check_off_sites_line(lat, (x_f, x_i))
    _check_interval("x_f", x_f, 0.0, L)
    _check_interval("x_i", x_i, 0.0, L)
    value, _ = _line_family_eval(lat, kn, x_f, x_i, (left, 0.0), (right, L))
    return GreenEvaluation(value, x_f, x_i, kn, GreenBranch.BOX)


def _ring_single_literal(
    amp_plus: complex,
    amp_minus: complex,
    t_plus: complex,
    t_minus: complex,
    L: float,
    kv: complex,
    big_x_f: float,
    big_x_i: float,
) -> complex:
    """The one-scatterer ring closed form, site at the origin, literal."""
    s0 = 1.0 / (2j * kv)
    p = cmath.exp(1j * kv * L)
    d_circle = (1.0 - t_plus * p) * (1.0 - t_minus * p) - amp_plus * amp_minus * p * p
    scale = abs(t_plus * p) + abs(t_minus * p) + abs(amp_plus * amp_minus * p * p)
    _pole_check(d_circle, scale, "ring denominator")
    diff = big_x_f - big_x_i
    summ = big_x_f + big_x_i
    kfac = amp_plus * amp_minus - t_plus * t_minus
    return (
        s0
        / d_circle
        * (
            (t_plus + kfac * p) * cmath.exp(1j * kv * diff)
            + (1.0 - t_plus * p) * cmath.exp(1j * kv * (L - diff))
            + amp_plus * cmath.exp(1j * kv * (L - summ))
            + amp_minus * cmath.exp(1j * kv * (L + summ))
        )
    )


def _mirror_params(p: InteractionParams) -> InteractionParams:
    """Parameters of the spatially mirrored interaction (x -> -x)."""
    return InteractionParams(p.d, p.b, p.c, p.a, -p.omega_phase)


def green_ring(lat: Lattice, L: float, x_f: float, x_i: float, k) -> GreenEvaluation:
    """N interactions on a ring of circumference L, periodic at +/-L/2."""
    kn = as_wavenumber(k)
    geom = Ring(L)
    validate_geometry_lattice(geom, lat)
    _check_off_sites_ring(lat, L, (x_f, x_i))
    half = L / 2.0
    for name, val in (("x_f", x_f), ("x_i", x_i)):
        if not (-half <= val <= half):
            raise ValidationError(f"{name}={val!r} outside the ring domain [{-half!r}, {half!r}]")
    kv = kn.k

    if len(lat) == 0:
        s0 = 1.0 / (2j * kv)
        p = cmath.exp(1j * kv * L)
        _pole_check(1.0 - p, abs(p), "ring denominator")
        u = (x_f - x_i) % L
        value = s0 * (cmath.exp(1j * kv * u) + p * cmath.exp(-1j * kv * u)) / (1.0 - p)
        return GreenEvaluation(value, x_f, x_i, kn, GreenBranch.RING_SINGLE)

    if len(lat) == 1:
        item = lat.interactions[0]
        u_f = (x_f - item.position) % L
        u_i = (x_i - item.position) % L
        if u_f <= u_i:
            amp = bare_amplitudes(item.params, kn)
            value = _ring_single_literal(
                amp.r_plus, amp.r_minus, amp.t_plus, amp.t_minus, L, kv, u_f, u_i - L
            )
        else:
            amp = bare_amplitudes(_mirror_params(item.params), kn)
            value = _ring_single_literal(
                amp.r_plus, amp.r_minus, amp.t_plus, amp.t_minus, L, kv, L - u_f, -u_i
            )
        return GreenEvaluation(value, x_f, x_i, kn, GreenBranch.RING_SINGLE)

    field = _ring_field(lat, L, kn, x_i)
    return GreenEvaluation(field.value(x_f), x_f, x_i, kn, GreenBranch.RING_LATTICE)


def green(geom: Geometry, lat: Lattice, x_f: float, x_i: float, k) -> GreenEvaluation:
    """Geometry dispatcher for the four green_* operations."""
    if isinstance(geom, Line):
        return green_line(lat, x_f, x_i, k)
    if isinstance(geom, HalfLine):
        return green_halfline(lat, geom.wall, x_f, x_i, k)
    if isinstance(geom, Box):
        return green_box(lat, geom.L, geom.left, geom.right, x_f, x_i, k)
    if isinstance(geom, Ring):
        return green_ring(lat, geom.L, x_f, x_i, k)
    raise ValidationError(f"unknown geometry {geom!r}")


def green_field(geom: Geometry, lat: Lattice, x_i: float, k) -> WaveField:
    """The full piecewise representation of G(., x_i), exact in every cell;
    supports analytic values and x_f-derivatives on grids."""
    kn = as_wavenumber(k)
    validate_geometry_lattice(geom, lat)
    if isinstance(geom, Ring):
        _check_off_sites_ring(lat, geom.L, (x_i,))
        return _ring_field(lat, geom.L, kn, x_i)
    _check_off_sites_line(lat, (x_i,))
    if isinstance(geom, Line):
        return _line_family_field(lat, kn, x_i, None, None)
    if isinstance(geom, HalfLine):
        if x_i <= 0.0:
            raise ValidationError(f"x_i={x_i!r} must be > 0 on the half-line")
        return _line_family_field(lat, kn, x_i, (geom.wall, 0.0), None)
    if isinstance(geom, Box):
        _check_interval("x_i", x_i, 0.0, geom.L)
        return _line_family_field(lat, kn, x_i, (geom.left, 0.0), (geom.right, geom.L))
    raise ValidationError(f"unknown geometry {geom!r}")


def green_derivative(geom: Geometry, lat: Lattice, x_f: float, x_i: float, k) -> complex:
    """Analytic d/dx_f of the Green function."""
    field = green_field(geom, lat, x_i, k)
    if isinstance(geom, Ring):
        _check_off_sites_ring(lat, geom.L, (x_f,))
    else:
        _check_off_sites_line(lat, (x_f,))
    return field.derivative(x_f)


# ---------------------------------------------------------------------------
# Piecewise-analytic diagonal integrals (for the density of states).
# ---------------------------------------------------------------------------


def _shift_dressed(block: DressedBlock, s: float, kv: complex) -> DressedBlock:
    phase = cmath.exp(2j * kv * s)
    return DressedBlock(block.r_plus * phase, block.r_minus / phase, block.t_plus, block.t_minus)


def _segment_breaks(a: float, b: float, positions: Sequence[float]) -> list[tuple[float, float]]:
    pts = [a] + [y for y in positions if a < y < b] + [b]
    return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1) if pts[i + 1] > pts[i]]


def diagonal_integral(geom: Geometry, lat: Lattice, a: float, b: float, k) -> complex:
    """Integral of G(x, x; k) over [a, b], done exactly per cell (the
    diagonal is a sum of exponentials in x within each cell)."""
    kn = as_wavenumber(k)
    kv = kn.k
    validate_geometry_lattice(geom, lat)
    if b < a:
        raise ValidationError(f"window [{a!r}, {b!r}] is reversed")
    s0 = 1.0 / (2j * kv)

    if isinstance(geom, Ring):
        half = geom.L / 2.0
        if a < -half or b > half:
            raise ValidationError(f"window [{a!r}, {b!r}] outside the ring domain")
        return _diagonal_integral_ring(lat, geom.L, kv, s0, a, b)

    if isinstance(geom, HalfLine) and a <= 0.0:
        raise ValidationError(f"window [{a!r}, {b!r}] must lie in x > 0")
    if isinstance(geom, Box) and (a <= 0.0 or b >= geom.L):
        raise ValidationError(f"window [{a!r}, {b!r}] must lie inside (0, {geom.L!r})")

    left = None
    right = None
    if isinstance(geom, HalfLine):
        left = (geom.wall, 0.0)
    elif isinstance(geom, Box):
        left = (geom.left, 0.0)
        right = (geom.right, geom.L)

    cells = [dressed_site(item, kn) for item in lat]
    lefts = [wall_block(left[0], left[1], kn) if left else EMPTY_DRESSED]
    for cell in cells:
        lefts.append(compose_dressed(lefts[-1], cell))
    rights = [wall_block(right[0], right[1], kn) if right else EMPTY_DRESSED]
    for cell in reversed(cells):
        rights.append(compose_dressed(cell, rights[-1]))
    rights.reverse()

    positions = lat.positions
    total = 0.0 + 0.0j
    for xa, xb in _segment_breaks(a, b, positions):
        j = bisect.bisect_left(positions, 0.5 * (xa + xb))
        rho_l = lefts[j].r_minus
        rho_r = rights[j].r_plus
        den = 1.0 - rho_l * rho_r
        if abs(den) < 1e-13 * max(1.0, abs(rho_l * rho_r)):
            raise SpectralPole(f"diagonal denominator {den!r} vanishes in cell {j}")
        e2b = cmath.exp(2j * kv * xb)
        e2a = cmath.exp(2j * kv * xa)
        piece = (1.0 + rho_l * rho_r) * (xb - xa)
        piece += rho_l * (e2b - e2a) / (2j * kv)
        piece -= rho_r * (1.0 / e2b - 1.0 / e2a) / (2j * kv)
        total += s0 * piece / den
    return total


def _diagonal_integral_ring(lat: Lattice, L: float, kv: complex, s0: complex, a: float, b: float) -> complex:
    kn = Wavenumber(kv)
    p = cmath.exp(1j * kv * L)
    cells = [dressed_site(item, kn) for item in lat]
    prefixes = [EMPTY_DRESSED]
    for cell in cells:
        prefixes.append(compose_dressed(prefixes[-1], cell))
    suffixes = [EMPTY_DRESSED]
    for cell in reversed(cells):
        suffixes.append(compose_dressed(cell, suffixes[-1]))
    suffixes.reverse()

    positions = lat.positions
    total = 0.0 + 0.0j
    for xa, xb in _segment_breaks(a, b, positions):
        m = bisect.bisect_left(positions, 0.5 * (xa + xb))
        if m == 0:
            blk = suffixes[0]
        else:
            blk = compose_dressed(suffixes[m], _shift_dressed(prefixes[m], L, kv))
        d_ring = (1.0 - blk.t_plus * p) * (1.0 - blk.t_minus * p) - blk.r_plus * blk.r_minus * p * p
        scale = abs(blk.t_plus * p) + abs(blk.t_minus * p) + abs(blk.r_plus * blk.r_minus * p * p)
        if abs(d_ring) < 1e-13 * max(1.0, scale):
            raise SpectralPole(f"ring diagonal denominator {d_ring!r} vanishes")
        kf = blk.k_factor
        e2b = cmath.exp(2j * kv * xb)
        e2a = cmath.exp(2j * kv * xa)
        piece = (1.0 + kf * p * p) * (xb - xa)
        piece -= blk.r_plus * (1.0 / e2b - 1.0 / e2a) / (2j * kv)
        piece += blk.r_minus * p * p * (e2b - e2a) / (2j * kv)
        total += s0 * piece / d_ring
    return total
