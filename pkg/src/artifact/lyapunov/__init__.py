"""Lyapunov spectra, joint splittings, compactness indices and covering exponents."""

from .indices import (CoveringReport, IndexReport, alpha_rate_check, covering_exponent,
                      kuratowski_index, lattice_cover_count, tail_norm)
from .spectrum import LyapunovSpectrum, group_exponents, lyapunov_spectrum, random_lyapunov_spectrum
from .splitting import (DeterminantRate, JointBlock, JointSplitting, block_invariance_check,
                        composite_spectrum_check, exponent_invariance_check, joint_splitting,
                        projection_growth, spectral_groups, unstable_determinant_rate,
                        vector_exponent, verify_weighted_exponents)

__all__ = [
    "CoveringReport", "DeterminantRate", "IndexReport", "JointBlock", "JointSplitting",
    "LyapunovSpectrum", "alpha_rate_check", "block_invariance_check", "composite_spectrum_check",
    "covering_exponent", "exponent_invariance_check", "group_exponents", "joint_splitting",
    "kuratowski_index", "lattice_cover_count", "lyapunov_spectrum", "projection_growth",
    "random_lyapunov_spectrum", "spectral_groups", "tail_norm", "unstable_determinant_rate",
    "vector_exponent", "verify_weighted_exponents",
]
