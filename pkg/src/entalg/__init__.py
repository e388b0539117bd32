"""Entangled (collective) operator algebra with exact verification tools.

Symbolic engine for products of system flip matrices with quantum white
noise operators, the entangled Fock-module checks built on it, and an
independent truncated-Fock numeric oracle that cross-validates every
identity.
"""

from .exact import CRat, Scalar, SystemMatrix
from .system import (
    BohrFrequency,
    GenericSystem,
    RejectionReport,
    Spectrum,
    enumerate_bohr_frequencies,
    force_system,
    sigma_minus,
    sigma_plus,
    validate_generic,
)
from .algebra import (
    CCRRules,
    LabelSpace,
    NoiseFactor,
    NoiseLabel,
    Polynomial,
    adjoint,
    entangled_annihilate,
    entangled_create,
    free_reduce,
    multiply,
    vacuum_expectation,
    wick_normal_order,
)

__all__ = [
    "BohrFrequency",
    "CCRRules",
    "CRat",
    "GenericSystem",
    "LabelSpace",
    "NoiseFactor",
    "NoiseLabel",
    "Polynomial",
    "RejectionReport",
    "Scalar",
    "Spectrum",
    "SystemMatrix",
    "adjoint",
    "enumerate_bohr_frequencies",
    "entangled_annihilate",
    "entangled_create",
    "force_system",
    "free_reduce",
    "multiply",
    "sigma_minus",
    "sigma_plus",
    "validate_generic",
    "vacuum_expectation",
    "wick_normal_order",
]

__version__ = "0.1.0"
