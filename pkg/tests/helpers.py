"""Shared samplers for the test suite.

All randomness flows through explicitly seeded generators so every test is
reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from pointscatter.model import (
    InteractionParams,
    Lattice,
    PlacedInteraction,
    make_interaction,
    make_lattice,
)


def random_interaction(rng: np.random.Generator, allow_b_zero: bool = True) -> InteractionParams:
    """A random unit-determinant interaction, sometimes with b = 0 (the
    delta-like family) and with omega drawn from {1, -1, generic phase}."""
    while True:
        a = rng.uniform(-3.0, 3.0)
        d = rng.uniform(-3.0, 3.0)
        b = rng.uniform(-2.0, 2.0)
        if abs(b) < 0.1:
            if not allow_b_zero:
                continue
            b = 0.0
            if abs(a * d - 1.0) > 1e-8:
                continue
            c = rng.uniform(-3.0, 3.0)
        else:
            c = (a * d - 1.0) / b
        u = rng.random()
        phase = 0.0 if u < 0.25 else (np.pi if u < 0.5 else float(rng.uniform(-np.pi, np.pi)))
        return make_interaction(a, b, c, d, omega_phase=phase)


def random_lattice(
    rng: np.random.Generator,
    n: int,
    lo: float,
    hi: float,
    min_gap: float = 1e-3,
    allow_b_zero: bool = True,
) -> Lattice:
    """n random interactions at distinct positions in (lo, hi)."""
    pos = np.sort(rng.uniform(lo, hi, size=n))
    while n > 1 and np.min(np.diff(pos)) < min_gap:
        pos = np.sort(rng.uniform(lo, hi, size=n))
    return make_lattice(
        [PlacedInteraction(random_interaction(rng, allow_b_zero), float(p)) for p in pos]
    )


def far_from(points, *values, gap: float = 1e-3) -> bool:
    """True when every value keeps at least gap distance from points and
    from the other values."""
    vals = list(values)
    for i, v in enumerate(vals):
        if any(abs(v - p) < gap for p in points):
            return False
        if any(abs(v - w) < gap for w in vals[i + 1 :]):
            return False
    return True
