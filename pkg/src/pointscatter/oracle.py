"""Independent ground truth for every closed form in the package.

Wavefunctions are built by threading the 2x2 boundary map

    (psi, psi')(y+) = omega [[a, b], [c, d]] (psi, psi')(y-)

interleaved with free plane-wave propagation, and Green functions come
from the classical two-solution construction G = u_left(x<) u_right(x>) / W
with the Wronskian evaluated at the source point.  Nothing in this module
calls the amplitudes, composition or greens code paths; only inert model
containers are shared, so agreement between the two routes is evidence,
not tautology.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import OnInteractionPoint, ValidationError, WronskianVanishes
from .model import (
    Box,
    Geometry,
    HalfLine,
    InteractionParams,
    Lattice,
    Line,
    Ring,
    WallCondition,
    as_wavenumber,
    validate_geometry_lattice,
)

ON_POINT_TOL = 1e-12
RING_RANK_TOL = 1e-10


@dataclass(frozen=True)
class TransferState:
    """Wavefunction value and derivative at a point."""

    psi: complex
    dpsi: complex


def transfer_step(p: InteractionParams, state: TransferState) -> TransferState:
    """Apply the boundary map across one interaction (left to right)."""
    omega = p.omega
    return TransferState(
        omega * (p.a * state.psi + p.b * state.dpsi),
        omega * (p.c * state.psi + p.d * state.dpsi),
    )


def inverse_transfer_step(p: InteractionParams, state: TransferState) -> TransferState:
    """Apply the inverse boundary map (right to left)."""
    omega = p.omega
    return TransferState(
        (p.d * state.psi - p.b * state.dpsi) / omega,
        (-p.c * state.psi + p.a * state.dpsi) / omega,
    )


def free_propagate(state: TransferState, dx: float, k) -> TransferState:
    """Propagate (psi, psi') through field-free space by dx (signed)."""
    kv = as_wavenumber(k).k
    cos_ = cmath.cos(kv * dx)
    sin_ = cmath.sin(kv * dx)
    return TransferState(
        cos_ * state.psi + sin_ / kv * state.dpsi,
        -kv * sin_ * state.psi + cos_ * state.dpsi,
    )


def site_matrix(p: InteractionParams) -> np.ndarray:
    """The 2x2 boundary map omega [[a, b], [c, d]]."""
    return p.omega * np.array([[p.a, p.b], [p.c, p.d]], dtype=complex)


def free_matrix(dx: float, k) -> np.ndarray:
    """The 2x2 free propagation map over a signed distance dx."""
    kv = as_wavenumber(k).k
    cos_ = cmath.cos(kv * dx)
    sin_ = cmath.sin(kv * dx)
    return np.array([[cos_, sin_ / kv], [-kv * sin_, cos_]], dtype=complex)


def _check_off_sites(lat: Lattice, points, what: str) -> None:
    for x in points:
        for item in lat:
            if abs(x - item.position) < ON_POINT_TOL:
                raise OnInteractionPoint(
                    f"{what}={x!r} coincides with the interaction at y={item.position!r}"
                )


def _thread(lat: Lattice, state: TransferState, x_from: float, x_to: float, k) -> TransferState:
    """Carry (psi, psi') from x_from to x_to across every interaction in
    between.  Works in both directions; endpoints must be off sites."""
    if x_to == x_from:
        return state
    if x_to > x_from:
        cur = x_from
        for item in lat:
            if x_from < item.position < x_to:
                state = free_propagate(state, item.position - cur, k)
                state = transfer_step(item.params, state)
                cur = item.position
        return free_propagate(state, x_to - cur, k)
    cur = x_from
    for item in reversed(lat.interactions):
        if x_to < item.position < x_from:
            state = free_propagate(state, item.position - cur, k)
            state = inverse_transfer_step(item.params, state)
            cur = item.position
    return free_propagate(state, x_to - cur, k)


def _wall_seed(wall: WallCondition) -> TransferState:
    if wall is WallCondition.DIRICHLET:
        return TransferState(0.0, 1.0)
    return TransferState(1.0, 0.0)


def _line_solutions(geom: Geometry, lat: Lattice, x_lo: float, x_hi: float, k):
    """Return callables evaluating u_left (satisfies the left boundary
    condition) and u_right (right condition) as TransferStates."""
    kv = as_wavenumber(k).k
    positions = lat.positions

    if isinstance(geom, Line):
        x_start = min((positions[0] if positions else x_lo), x_lo) - 1.0
        seed_l = TransferState(cmath.exp(-1j * kv * x_start), -1j * kv * cmath.exp(-1j * kv * x_start))
    else:
        wall = geom.wall if isinstance(geom, HalfLine) else geom.left
        x_start = 0.0
        seed_l = _wall_seed(wall)

    if isinstance(geom, Box):
        x_end = geom.L
        seed_r = _wall_seed(geom.right)
    else:
        x_end = max((positions[-1] if positions else x_hi), x_hi) + 1.0
        seed_r = TransferState(cmath.exp(1j * kv * x_end), 1j * kv * cmath.exp(1j * kv * x_end))

    def u_left(x: float) -> TransferState:
        return _thread(lat, seed_l, x_start, x, k)

    def u_right(x: float) -> TransferState:
        return _thread(lat, seed_r, x_end, x, k)

    return u_left, u_right


def _ring_closure_matrix(lat: Lattice, L: float, k) -> np.ndarray:
    """Monodromy of one full turn, from -L/2 through all sites to L/2."""
    half = L / 2.0
    m = np.eye(2, dtype=complex)
    cur = -half
    for item in lat:
        m = free_matrix(item.position - cur, k) @ m
        m = site_matrix(item.params) @ m
        cur = item.position
    return free_matrix(half - cur, k) @ m


def ring_closure_defect(lat: Lattice, L: float, k) -> float:
    """Relative smallest singular value of I - M(k); the periodicity system
    is solvable exactly when this is nonzero, and ring eigenvalues are the
    k where it (numerically) vanishes."""
    m = _ring_closure_matrix(lat, L, k)
    sv = np.linalg.svd(np.eye(2, dtype=complex) - m, compute_uv=False)
    # Normalize by max(1, sv_max), not sv_max alone: at a doubly degenerate
    # eigenvalue I - M vanishes entirely and both singular values go to 0.
    return float(sv[-1] / max(1.0, sv[0]))


def box_wall_mismatch(lat: Lattice, L: float, left: WallCondition, right: WallCondition, k) -> complex:
    """Shooting residual for box eigenvalues: thread the left-wall seed to
    x = L and report the violated right-wall component (psi for Dirichlet,
    psi' for Neumann).  Zero exactly at eigenvalues."""
    kv = as_wavenumber(k).k
    state = _thread(lat, _wall_seed(left), 0.0, L, kv)
    return state.psi if right is WallCondition.DIRICHLET else state.dpsi


def bound_mismatch(geom: Geometry, lat: Lattice, kappa: float) -> complex:
    """Shooting residual for bound states at k = i kappa on the open
    geometries: thread the solution satisfying the left condition (decay
    as x -> -infinity, or the wall seed) past the lattice and report the
    coefficient of the growing exponential e^{+kappa x}.  Zero exactly at
    bound states."""
    if kappa <= 0:
        raise ValidationError(f"kappa must be > 0, got {kappa!r}")
    kv = 1j * kappa
    if isinstance(geom, HalfLine):
        seed = _wall_seed(geom.wall)
        x_from = 0.0
    elif isinstance(geom, Line):
        x_from = (lat.positions[0] if len(lat) else 0.0) - 1.0
        e = cmath.exp(kappa * x_from)
        seed = TransferState(e, kappa * e)
    else:
        raise ValidationError("bound_mismatch requires a Line or HalfLine geometry")
    x_to = (lat.positions[-1] if len(lat) else 0.0) + 1.0
    state = _thread(lat, seed, x_from, x_to, kv)
    return (kappa * state.psi + state.dpsi) / (2.0 * kappa * cmath.exp(kappa * x_to))


def oracle_green(geom: Geometry, lat: Lattice, x_f: float, x_i: float, k) -> complex:
    """Green function by the two-solution Wronskian construction (line,
    half-line, box) or by solving the periodic closure (ring)."""
    kn = as_wavenumber(k)
    kv = kn.k
    validate_geometry_lattice(geom, lat)
    _check_off_sites(lat, (x_f, x_i), "x")

    if isinstance(geom, (HalfLine, Box)):
        lo = 0.0
        hi = geom.L if isinstance(geom, Box) else None
        for name, x in (("x_f", x_f), ("x_i", x_i)):
            if x <= lo or (hi is not None and x >= hi):
                raise ValidationError(f"{name}={x!r} outside the open domain")

    if isinstance(geom, Ring):
        return _oracle_green_ring(geom, lat, x_f, x_i, kv)

    u_left, u_right = _line_solutions(geom, lat, min(x_f, x_i), max(x_f, x_i), kv)
    ul_i = u_left(x_i)
    ur_i = u_right(x_i)
    wronskian = ul_i.psi * ur_i.dpsi - ul_i.dpsi * ur_i.psi
    scale = abs(ul_i.psi * ur_i.dpsi) + abs(ul_i.dpsi * ur_i.psi) + 1e-300
    if abs(wronskian) < 1e-12 * scale:
        raise WronskianVanishes(
            f"Wronskian {wronskian!r} vanishes at k={kv!r}: evaluation at an eigenvalue"
        )
    if x_f <= x_i:
        return u_left(x_f).psi * ur_i.psi / wronskian
    return ul_i.psi * u_right(x_f).psi / wronskian


def _oracle_green_ring(geom: Ring, lat: Lattice, x_f: float, x_i: float, kv: complex) -> complex:
    half = geom.L / 2.0
    for name, x in (("x_f", x_f), ("x_i", x_i)):
        if not (-half < x < half):
            raise ValidationError(f"{name}={x!r} outside the open ring domain")

    # v(L/2) = M2 (M1 v(-L/2) + (0, 1)^T) with periodicity v(-L/2) = v(L/2):
    # (I - M2 M1) v = M2 (0, 1)^T, the unit vector being the derivative jump
    # of G at the source.
    m1 = np.eye(2, dtype=complex)
    cur = -half
    for item in lat:
        if item.position < x_i:
            m1 = free_matrix(item.position - cur, kv) @ m1
            m1 = site_matrix(item.params) @ m1
            cur = item.position
    m1 = free_matrix(x_i - cur, kv) @ m1

    m2 = np.eye(2, dtype=complex)
    cur = x_i
    for item in lat:
        if item.position > x_i:
            m2 = free_matrix(item.position - cur, kv) @ m2
            m2 = site_matrix(item.params) @ m2
            cur = item.position
    m2 = free_matrix(half - cur, kv) @ m2

    a_mat = np.eye(2, dtype=complex) - m2 @ m1
    rhs = m2 @ np.array([0.0, 1.0], dtype=complex)
    sv = np.linalg.svd(a_mat, compute_uv=False)
    if sv[-1] < RING_RANK_TOL * max(sv[0], 1e-300):
        raise WronskianVanishes(
            f"ring periodicity system rank-deficient at k={kv!r}: evaluation at an eigenvalue"
        )
    v_seam = np.linalg.solve(a_mat, rhs)

    state = TransferState(v_seam[0], v_seam[1])
    if x_f < x_i:
        state = _thread(lat, state, -half, x_f, kv)
    else:
        state = _thread(lat, state, -half, x_i, kv)
        state = TransferState(state.psi, state.dpsi + 1.0)
        state = _thread(lat, state, x_i, x_f, kv)
    return state.psi


def oracle_block_amplitudes(lat: Lattice, l: int, n: int, k):
    """Block R/T extracted from the product of boundary maps and free
    propagators, converted to the scattering basis.  Indices are 1-based
    with l = n + 1 denoting the empty block (R = 0, T = 1)."""
    from .model import BlockAmplitudes  # inert container shared via model

    kn = as_wavenumber(k)
    kv = kn.k
    n_sites = len(lat)
    if not (1 <= l <= n_sites and 1 <= n <= n_sites and l <= n) and not (l == n + 1):
        raise ValidationError(
            f"block indices must satisfy 1 <= l <= n <= N or l == n + 1, got l={l}, n={n}, N={n_sites}"
        )
    if l == n + 1:
        return BlockAmplitudes(0.0, 0.0, 1.0, 1.0, l, n, 0.0, 0.0, kn)

    items = lat.interactions[l - 1 : n]
    y_l = items[0].position
    y_n = items[-1].position

    m = site_matrix(items[0].params)
    cur = items[0].position
    for item in items[1:]:
        m = free_matrix(item.position - cur, kv) @ m
        m = site_matrix(item.params) @ m
        cur = item.position

    def basis(x: float) -> np.ndarray:
        e = cmath.exp(1j * kv * x)
        return np.array([[e, 1.0 / e], [1j * kv * e, -1j * kv / e]], dtype=complex)

    c = np.linalg.solve(basis(y_n), m @ basis(y_l))
    r_plus_dressed = -c[1, 0] / c[1, 1]
    t_minus_dressed = 1.0 / c[1, 1]
    t_plus_dressed = (c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]) / c[1, 1]
    r_minus_dressed = c[0, 1] / c[1, 1]

    # Convert to the block convention where endpoint phases are explicit.
    span = cmath.exp(1j * kv * (y_n - y_l))
    return BlockAmplitudes(
        r_plus=r_plus_dressed * cmath.exp(-2j * kv * y_l),
        r_minus=r_minus_dressed * cmath.exp(2j * kv * y_n),
        t_plus=t_plus_dressed * span,
        t_minus=t_minus_dressed * span,
        first_index=l,
        last_index=n,
        leftmost_position=y_l,
        rightmost_position=y_n,
        at_k=kn,
    )
