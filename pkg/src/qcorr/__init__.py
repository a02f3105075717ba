"""Quantum discord, super-quantum discord, one-way deficit and weak one-way deficit of two-qubit states."""
from .correlations import (
    MeasureKind,
    MeasureResult,
    OptimizerOptions,
    bell_measure,
    conditional_entropy_weak,
    measure_at_basis,
    measure_numeric,
    werner_measure,
)
from .measurements import PROJECTIVE
from .states import BellDiagonalParams, TwoQubitState, WernerParams, bell_diagonal, werner

__all__ = [
    "PROJECTIVE",
    "BellDiagonalParams",
    "MeasureKind",
    "MeasureResult",
    "OptimizerOptions",
    "TwoQubitState",
    "WernerParams",
    "bell_diagonal",
    "bell_measure",
    "conditional_entropy_weak",
    "measure_at_basis",
    "measure_numeric",
    "werner",
    "werner_measure",
]
