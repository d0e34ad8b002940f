"""Almost-unimodular disjoint-spectrum systems on compact groups.

Constructs, for a trigonometric polynomial ``f0`` on the circle, a torus or
SU(2), functions ``f_1, f_2, ...`` with pairwise disjoint spectra that track
``|f0|`` within ``eps_m`` from above everywhere and from below on large sets,
and certifies the result numerically.
"""

from .groups import (
    GroupDescriptor,
    IrrepLabel,
    enumerate_irreps,
    haar_grid,
    irrep_matrix,
    label,
    parse_group,
    sweep_coordinate,
)
from .spectral import GridFunction, SpectralCoeffs, analyze, synthesize, trace_norm
from .dyadic import DyadicTree, build_tree, pushforward_cdf
from .rademacher import eval_delta, eval_psi
from .constructor import (
    CapError,
    ConstructionParams,
    SystemBundle,
    approximate_uniformly,
    compute_delta_m,
    construct_system,
    find_cutoff_M,
)
from .verifier import VerificationReport, corrupt_bundle, verify_bundle

__version__ = "0.1.0"

__all__ = [
    "CapError",
    "ConstructionParams",
    "DyadicTree",
    "GridFunction",
    "GroupDescriptor",
    "IrrepLabel",
    "SpectralCoeffs",
    "SystemBundle",
    "VerificationReport",
    "analyze",
    "approximate_uniformly",
    "build_tree",
    "compute_delta_m",
    "construct_system",
    "corrupt_bundle",
    "enumerate_irreps",
    "eval_delta",
    "eval_psi",
    "find_cutoff_M",
    "haar_grid",
    "irrep_matrix",
    "label",
    "parse_group",
    "pushforward_cdf",
    "synthesize",
    "sweep_coordinate",
    "trace_norm",
    "verify_bundle",
]
