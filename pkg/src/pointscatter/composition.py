"""Composition of contiguous blocks of interactions into block amplitudes.

Two equivalent routes are provided on purpose.  ``compose_block`` runs the
published left-to-right recurrences on the convention-carrying amplitudes
(endpoint phases explicit).  The ``DressedBlock`` engine absorbs all
position phases into the amplitudes, where composition is the plain
two-interface Fabry-Perot rule; the Green-function, spectrum and dynamics
modules are built on it.  The two are related by

    Rt+ = r_plus e^{2ik y_l},   Rt- = r_minus e^{-2ik y_n},
    Tt+/- = t_plus/minus e^{-ik (y_n - y_l)},

and tests pin their agreement.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .amplitudes import bare_amplitudes
from .errors import ResonanceDenominator, ValidationError
from .model import (
    BlockAmplitudes,
    Lattice,
    PlacedInteraction,
    WallCondition,
    as_wavenumber,
)

RESONANCE_TOL = 1e-14


def single_site_block(item: PlacedInteraction, index: int, k) -> BlockAmplitudes:
    """The one-site block (index..index) from the bare amplitudes."""
    kn = as_wavenumber(k)
    amp = bare_amplitudes(item.params, kn)
    return BlockAmplitudes(
        r_plus=amp.r_plus,
        r_minus=amp.r_minus,
        t_plus=amp.t_plus,
        t_minus=amp.t_minus,
        first_index=index,
        last_index=index,
        leftmost_position=item.position,
        rightmost_position=item.position,
        at_k=kn,
    )


def empty_block(l: int, k) -> BlockAmplitudes:
    """The empty block (l..l-1): R = 0, T = 1."""
    return BlockAmplitudes(0.0, 0.0, 1.0, 1.0, l, l - 1, 0.0, 0.0, as_wavenumber(k))


def _resonance_check(q: complex, scale: float, where: str) -> None:
    if abs(q) < RESONANCE_TOL * max(1.0, scale):
        raise ResonanceDenominator(
            f"multiple-scattering denominator 1 - R_a R_b = {q!r} vanishes in {where}"
        )


def compose_pair(a: BlockAmplitudes, b: BlockAmplitudes) -> BlockAmplitudes:
    """Compose two adjacent blocks (a strictly left of b).

    With d = y_{b,first} - y_{a,last} > 0 the composite amplitudes are

        q  = 1 - R_a^- R_b^+ e^{2ikd}
        R+ = R_a^+ + T_a^+ T_a^- R_b^+ e^{2ikd} / q
        R- = R_b^- + T_b^+ T_b^- R_a^- e^{2ikd} / q
        T+/- = T_a^{+/-} T_b^{+/-} e^{ikd} / q
    """
    if a.at_k.k != b.at_k.k:
        raise ValidationError(
            f"cannot compose blocks at different wavenumbers {a.at_k.k!r} and {b.at_k.k!r}"
        )
    if a.is_empty:
        return b
    if b.is_empty:
        return a
    if b.first_index != a.last_index + 1:
        raise ValidationError(
            f"blocks are not adjacent: ..{a.last_index} followed by {b.first_index}.."
        )
    if a.rightmost_position >= b.leftmost_position:
        raise ValidationError(
            f"left block ends at y={a.rightmost_position!r} at/after the right "
            f"block start y={b.leftmost_position!r}"
        )
    kv = a.at_k.k
    gap = b.leftmost_position - a.rightmost_position
    half_phase = cmath.exp(1j * kv * gap)
    phase = half_phase * half_phase
    feedback = a.r_minus * b.r_plus * phase
    q = 1.0 - feedback
    _resonance_check(q, abs(feedback), f"compose_pair({a.first_index}..{b.last_index})")
    return BlockAmplitudes(
        r_plus=a.r_plus + a.t_plus * a.t_minus * b.r_plus * phase / q,
        r_minus=b.r_minus + b.t_plus * b.t_minus * a.r_minus * phase / q,
        t_plus=a.t_plus * b.t_plus * half_phase / q,
        t_minus=a.t_minus * b.t_minus * half_phase / q,
        first_index=a.first_index,
        last_index=b.last_index,
        leftmost_position=a.leftmost_position,
        rightmost_position=b.rightmost_position,
        at_k=a.at_k,
    )


def compose_block(lat: Lattice, l: int, n: int, k) -> BlockAmplitudes:
    """Amplitudes of the block of sites l..n (1-based, inclusive) built by
    the left-to-right recurrence, one site at a time."""
    n_sites = len(lat)
    if l == n + 1 and 1 <= l <= n_sites + 1:
        return empty_block(l, k)
    if not (1 <= l <= n <= n_sites):
        raise ValidationError(
            f"block indices must satisfy 1 <= l <= n <= {n_sites} (or l == n + 1), "
            f"got l={l}, n={n}"
        )
    acc = single_site_block(lat.interactions[l - 1], l, k)
    for j in range(l + 1, n + 1):
        acc = compose_pair(acc, single_site_block(lat.interactions[j - 1], j, k))
    return acc


def k_factor(block: BlockAmplitudes) -> complex:
    """The combination K = (R+ R- - T+ T-) e^{-2ik(y_n - y_l)}.

    It is invariant under dressing and equals -1 for the empty block and
    for any single unitary site at real k.
    """
    kv = block.at_k.k
    span = block.rightmost_position - block.leftmost_position
    phase = cmath.exp(-2j * kv * span)
    return (block.r_plus * block.r_minus - block.t_plus * block.t_minus) * phase


# ---------------------------------------------------------------------------
# Dressed engine.  All position phases live inside the amplitudes, so blocks
# compose without reference to coordinates and walls become transmissionless
# pseudo-blocks.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DressedBlock:
    """Position-dressed block amplitudes (phases absorbed)."""

    r_plus: complex
    r_minus: complex
    t_plus: complex
    t_minus: complex

    @property
    def k_factor(self) -> complex:
        return self.r_plus * self.r_minus - self.t_plus * self.t_minus


EMPTY_DRESSED = DressedBlock(0.0, 0.0, 1.0, 1.0)


def dress(block: BlockAmplitudes) -> DressedBlock:
    """Absorb the endpoint phases of a convention-carrying block."""
    if block.is_empty:
        return EMPTY_DRESSED
    kv = block.at_k.k
    y_l = block.leftmost_position
    y_n = block.rightmost_position
    span = cmath.exp(-1j * kv * (y_n - y_l))
    return DressedBlock(
        block.r_plus * cmath.exp(2j * kv * y_l),
        block.r_minus * cmath.exp(-2j * kv * y_n),
        block.t_plus * span,
        block.t_minus * span,
    )


def dressed_site(item: PlacedInteraction, k) -> DressedBlock:
    """Single site at its position, dressed."""
    amp = bare_amplitudes(item.params, k)
    kv = as_wavenumber(k).k
    phase = cmath.exp(2j * kv * item.position)
    return DressedBlock(amp.r_plus * phase, amp.r_minus / phase, amp.t_plus, amp.t_minus)


def wall_block(wall: WallCondition, position: float, k) -> DressedBlock:
    """A perfect mirror at the given position as a transmissionless block
    (Dirichlet R = -1, Neumann R = +1, dressed with the position phase)."""
    kv = as_wavenumber(k).k
    r = float(wall.reflection)
    phase = cmath.exp(2j * kv * position)
    return DressedBlock(r * phase, r / phase, 0.0, 0.0)


def compose_dressed(a: DressedBlock, b: DressedBlock, where: str = "compose_dressed") -> DressedBlock:
    """Fabry-Perot composition of dressed blocks (a strictly left of b)."""
    feedback = a.r_minus * b.r_plus
    q = 1.0 - feedback
    _resonance_check(q, abs(feedback), where)
    return DressedBlock(
        a.r_plus + a.t_plus * a.t_minus * b.r_plus / q,
        b.r_minus + b.t_plus * b.t_minus * a.r_minus / q,
        a.t_plus * b.t_plus / q,
        a.t_minus * b.t_minus / q,
    )


def dressed_block(lat: Lattice, l: int, n: int, k) -> DressedBlock:
    """Dressed amplitudes of sites l..n (1-based; l = n + 1 gives empty)."""
    acc = EMPTY_DRESSED
    for j in range(l, n + 1):
        acc = compose_dressed(acc, dressed_site(lat.interactions[j - 1], k))
    return acc


def scan_prefixes(cells: list[DressedBlock]) -> list[DressedBlock]:
    """prefix[j] = cells[0] o ... o cells[j-1]; prefix[0] is empty."""
    out = [EMPTY_DRESSED]
    for cell in cells:
        out.append(compose_dressed(out[-1], cell))
    return out


def scan_suffixes(cells: list[DressedBlock]) -> list[DressedBlock]:
    """suffix[j] = cells[j] o ... o cells[-1]; suffix[len] is empty."""
    out = [EMPTY_DRESSED]
    for cell in reversed(cells):
        out.append(compose_dressed(cell, out[-1]))
    out.reverse()
    return out
