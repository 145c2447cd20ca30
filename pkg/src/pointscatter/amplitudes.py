"""Scattering amplitudes of a single point interaction.

For a plane wave of wavenumber k incident from the left (+) or right (-)
on an interaction at the origin,

    R(+-) = (c +- ik(d - a) + b k^2) / (-c + ik(d + a) + b k^2)
    T(+-) = 2ik omega^(+-1) theta(+-) / (-c + ik(d + a) + b k^2)

with theta(+) = ad - bc and theta(-) = 1.  theta(+) is computed from the
stored parameters rather than hard-coded to its constrained value 1, so a
corrupted parameter set fails loudly.  Shifting the interaction to y
multiplies R(+-) by exp(+-2iky) and leaves T unchanged.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .errors import PoleHit
from .model import InteractionParams, Wavenumber, as_wavenumber

POLE_TOL = 1e-14


@dataclass(frozen=True)
class Amplitudes:
    """The four complex scattering coefficients at a given wavenumber."""

    r_plus: complex
    r_minus: complex
    t_plus: complex
    t_minus: complex
    at_k: Wavenumber


def _denominator(p: InteractionParams, k: complex) -> complex:
    return -p.c + 1j * k * (p.d + p.a) + p.b * k * k


def bare_amplitudes(p: InteractionParams, k) -> Amplitudes:
    """Scattering coefficients of the interaction placed at the origin.

    Raises PoleHit if k sits on a zero of the common denominator (these
    zeros lie off the real axis and mark bound/antibound states).
    """
    kn = as_wavenumber(k)
    kv = kn.k
    den = _denominator(p, kv)
    scale = max(abs(p.c), abs(kv) * (abs(p.d) + abs(p.a)), abs(p.b) * abs(kv) ** 2, 1.0)
    if abs(den) < POLE_TOL * scale:
        raise PoleHit(
            f"amplitude denominator -c + ik(d+a) + bk^2 = {den!r} vanishes at k={kv!r}"
        )
    omega = p.omega
    r_plus = (p.c + 1j * kv * (p.d - p.a) + p.b * kv * kv) / den
    r_minus = (p.c - 1j * kv * (p.d - p.a) + p.b * kv * kv) / den
    t_plus = 2j * kv * omega * p.theta_plus / den
    t_minus = 2j * kv * p.theta_minus / omega / den
    return Amplitudes(r_plus, r_minus, t_plus, t_minus, kn)


def dressed_reflections(p: InteractionParams, y: float, k) -> Amplitudes:
    """Amplitudes of the interaction shifted to position y:
    R(+-)(y) = R(+-) exp(+-2iky), T unchanged."""
    bare = bare_amplitudes(p, k)
    kv = bare.at_k.k
    phase = cmath.exp(2j * kv * y)
    return Amplitudes(
        bare.r_plus * phase,
        bare.r_minus / phase,
        bare.t_plus,
        bare.t_minus,
        bare.at_k,
    )


def unitarity_residuals(amp: Amplitudes) -> tuple[float, float, float]:
    """Probability-conservation residuals at real k:

    | |R+|^2 + |T+|^2 - 1 |,  | |R-|^2 + |T-|^2 - 1 |,
    | conj(R+) T+ + conj(T-) R- |.
    """
    res_plus = abs(abs(amp.r_plus) ** 2 + abs(amp.t_plus) ** 2 - 1.0)
    res_minus = abs(abs(amp.r_minus) ** 2 + abs(amp.t_minus) ** 2 - 1.0)
    res_cross = abs(amp.r_plus.conjugate() * amp.t_plus + amp.t_minus.conjugate() * amp.r_minus)
    return (res_plus, res_minus, res_cross)


def conjugation_residuals(p: InteractionParams, k: float) -> tuple[float, float]:
    """Residuals of conj(R(k)) = R(-k) and conj(T(+-)(k)) = T(-+)(-k),
    each maximized over the two superscripts.  k must be real."""
    fwd = bare_amplitudes(p, float(k))
    bwd = bare_amplitudes(p, -float(k))
    res_r = max(
        abs(fwd.r_plus.conjugate() - bwd.r_plus),
        abs(fwd.r_minus.conjugate() - bwd.r_minus),
    )
    res_t = max(
        abs(fwd.t_plus.conjugate() - bwd.t_minus),
        abs(fwd.t_minus.conjugate() - bwd.t_plus),
    )
    return (res_r, res_t)


def single_bound_poles(p: InteractionParams) -> list[complex]:
    """Upper-half-plane zeros of the amplitude denominator,
    b k^2 + ik(d + a) - c = 0, solved in closed form.

    Each returned k satisfies Im k > 1e-12 and corresponds to a bound
    state of energy E = k^2 (real and negative for k on the positive
    imaginary axis).  Empty list when no upper-half roots exist.
    """
    trace = p.d + p.a
    roots: list[complex]
    if p.b == 0.0:
        # Linear case i k (d+a) = c.  d + a cannot vanish here: b = 0
        # forces ad = 1, and d = -a would give -a^2 = 1.
        roots = [complex(0.0, -p.c / trace)]
    else:
        disc = cmath.sqrt(complex(-trace * trace + 4.0 * p.b * p.c))
        roots = [
            (-1j * trace + disc) / (2.0 * p.b),
            (-1j * trace - disc) / (2.0 * p.b),
        ]
    found = [k for k in roots if k.imag > 1e-12]
    found.sort(key=lambda k: (k.imag, k.real))
    return found
