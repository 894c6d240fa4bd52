"""Spectra of the Kohn Laplacian on quotients of the 3-sphere by finite subgroups of SU(2)."""

from .groups import FiniteSubgroup, GroupSpec, SU2Element, dim_invariant, dims_invariant, make_group
from .harmonics import Poly, apply_box_t, apply_L, apply_Lbar, oracle_matrix
from .hearing import HearingReport, calibrate_even_constant, hear_order
from .matrices import Enclosure, ScalingConvention, build_V_matrix, build_W_matrix, eigen_enclosures, symmetrize
from .scalars import GaussianRational, PerturbationParam
from .spectrum import SpectrumTable, classify_embeddability, rossi_spectrum, standard_spectrum

__version__ = "0.1.0"

__all__ = [
    "FiniteSubgroup",
    "GroupSpec",
    "SU2Element",
    "dim_invariant",
    "dims_invariant",
    "make_group",
    "Poly",
    "apply_box_t",
    "apply_L",
    "apply_Lbar",
    "oracle_matrix",
    "HearingReport",
    "calibrate_even_constant",
    "hear_order",
    "Enclosure",
    "ScalingConvention",
    "build_V_matrix",
    "build_W_matrix",
    "eigen_enclosures",
    "symmetrize",
    "GaussianRational",
    "PerturbationParam",
    "SpectrumTable",
    "classify_embeddability",
    "rossi_spectrum",
    "standard_spectrum",
]
