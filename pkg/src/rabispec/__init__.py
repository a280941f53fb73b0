"""Quantum Rabi model spectra and the JC/AJC ladders they are often mistaken for."""

__version__ = "0.1.0"

from .model import ModelParams, Parity, Truncation, build_full, build_parity_block, build_jc, build_ajc
from .eigensolve import converge_spectrum, eigs_dense, eigs_tridiag, sturm_count
from .analytic import enumerate_zhang, invert_level, nearest_zhang, zhang_level
from .recurrence import classify_energy, forward_trail, miller_defect
from .bargmann import PolyExp, bargmann_norm, judd_candidate, judd_cross_check, ode_residual

__all__ = [
    "ModelParams", "Parity", "Truncation",
    "build_full", "build_parity_block", "build_jc", "build_ajc",
    "converge_spectrum", "eigs_dense", "eigs_tridiag", "sturm_count",
    "enumerate_zhang", "invert_level", "nearest_zhang", "zhang_level",
    "classify_energy", "forward_trail", "miller_defect",
    "PolyExp", "bargmann_norm", "judd_candidate", "judd_cross_check", "ode_residual",
]
