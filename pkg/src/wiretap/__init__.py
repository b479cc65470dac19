"""Explicit wiretap coding: invertible extractors on top of linear codes,
their secrecy bounds and exhaustive checks of those bounds."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    achievable_length,
    aep_iid_bound,
    avwtc_length,
    bsc_simple_bound,
    bsc_smoothed_bound,
    curve,
    general_aep_bound,
    optimize_delta,
    simple_bound,
    unseeded_compose,
    wiretap2_bound,
)
from .channels import AvcSpec, TransitionMatrix, bec, bsc, classify_symmetry, restricted_symmetry_check, z_channel
from .coremath import GF2m, PrimeField, ProbVector, binary_entropy, gf_inv, gf_mul
from .ecc import LinearCode, hamming_7_4, identity_code, random_linear_code, repetition_code, standard_code
from .estimator import WiretapCoder
from .extractors import FiniteFieldExtractor, ModifiedToeplitzExtractor, make_extractor
from .oracle import cut_distribution, exact_dU, exact_pguess
from .protocol import Memoryless, SchemeConfig, TypeConstrainedAvc, WiretapII, exact_secrecy, run_seeded_trials

__all__ = [
    "AvcSpec",
    "BoundReport",
    "FiniteFieldExtractor",
    "GF2m",
    "LinearCode",
    "Memoryless",
    "ModifiedToeplitzExtractor",
    "PrimeField",
    "ProbVector",
    "SchemeConfig",
    "TransitionMatrix",
    "TypeConstrainedAvc",
    "WiretapCoder",
    "WiretapII",
    "achievable_length",
    "aep_iid_bound",
    "avwtc_length",
    "bec",
    "binary_entropy",
    "bsc",
    "bsc_simple_bound",
    "bsc_smoothed_bound",
    "classify_symmetry",
    "curve",
    "cut_distribution",
    "exact_dU",
    "exact_pguess",
    "exact_secrecy",
    "general_aep_bound",
    "gf_inv",
    "gf_mul",
    "hamming_7_4",
    "identity_code",
    "make_extractor",
    "optimize_delta",
    "random_linear_code",
    "repetition_code",
    "restricted_symmetry_check",
    "run_seeded_trials",
    "simple_bound",
    "standard_code",
    "unseeded_compose",
    "wiretap2_bound",
    "z_channel",
]
