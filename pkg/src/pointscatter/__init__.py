"""Exact Green functions, spectra and wave-packet dynamics for 1D
generalized point interactions.

Units: hbar = 1, mass m = 1/2, so E = k^2 and the free propagator carries
s0 = 1/(2ik).  Each interaction is a matching matrix [[a, b], [c, d]] with
ad - bc = 1 and a unimodular phase omega acting on (psi, psi') across the
point.  Every closed-form quantity has an independent transfer-matrix
cross-check in :mod:`pointscatter.oracle`.
"""

from .amplitudes import (
    Amplitudes,
    bare_amplitudes,
    conjugation_residuals,
    dressed_reflections,
    single_bound_poles,
    unitarity_residuals,
)
from .composition import (
    DressedBlock,
    compose_block,
    compose_dressed,
    compose_pair,
    dress,
    dressed_block,
    dressed_site,
    empty_block,
    k_factor,
    scan_prefixes,
    scan_suffixes,
    single_site_block,
    wall_block,
)
from .dynamics import EvolutionResult, GaussianPacket, evolve
from .errors import (
    ConfigError,
    ConstraintViolation,
    DuplicatePosition,
    EtaTooSmall,
    KTooSmall,
    NonFinite,
    NumericalError,
    OnInteractionPoint,
    PacketTooWideForDomain,
    PointScatterError,
    PoleHit,
    QuadratureUnderResolved,
    ResonanceDenominator,
    ScanTooCoarse,
    SpectralPole,
    ValidationError,
    WronskianVanishes,
)
from .greens import (
    GreenBranch,
    GreenEvaluation,
    WaveField,
    diagonal_integral,
    green,
    green_box,
    green_derivative,
    green_field,
    green_halfline,
    green_line,
    green_ring,
    green_single,
)
from .model import (
    BlockAmplitudes,
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
from .spectrum import (
    BoundStateRecord,
    EigenvalueRecord,
    SpectrumResult,
    bound_secular,
    box_secular,
    density_of_states,
    find_bound_states,
    find_eigenvalues,
    ring_secular,
)

__version__ = "0.1.0"

__all__ = [
    "Amplitudes",
    "BlockAmplitudes",
    "BoundStateRecord",
    "Box",
    "ConfigError",
    "ConstraintViolation",
    "DressedBlock",
    "DuplicatePosition",
    "EigenvalueRecord",
    "EtaTooSmall",
    "EvolutionResult",
    "GaussianPacket",
    "Geometry",
    "GreenBranch",
    "GreenEvaluation",
    "HalfLine",
    "InteractionParams",
    "KTooSmall",
    "Lattice",
    "Line",
    "NonFinite",
    "NumericalError",
    "OnInteractionPoint",
    "PacketTooWideForDomain",
    "PlacedInteraction",
    "PointScatterError",
    "PoleHit",
    "QuadratureUnderResolved",
    "ResonanceDenominator",
    "Ring",
    "ScanTooCoarse",
    "SpectralPole",
    "SpectrumResult",
    "ValidationError",
    "WallCondition",
    "WaveField",
    "Wavenumber",
    "WronskianVanishes",
    "as_wavenumber",
    "bare_amplitudes",
    "bound_secular",
    "box_secular",
    "compose_block",
    "compose_dressed",
    "compose_pair",
    "conjugation_residuals",
    "delta",
    "delta_prime",
    "density_of_states",
    "diagonal_integral",
    "domain_interval",
    "dress",
    "dressed_block",
    "dressed_reflections",
    "dressed_site",
    "empty_block",
    "evolve",
    "find_bound_states",
    "find_eigenvalues",
    "geometry_from_dict",
    "geometry_to_dict",
    "green",
    "green_box",
    "green_derivative",
    "green_field",
    "green_halfline",
    "green_line",
    "green_ring",
    "green_single",
    "k_factor",
    "lattice_from_list",
    "lattice_to_list",
    "make_interaction",
    "make_lattice",
    "ring_secular",
    "scan_prefixes",
    "scan_suffixes",
    "single_bound_poles",
    "single_site_block",
    "unitarity_residuals",
    "validate_geometry_lattice",
    "wall_block",
]
