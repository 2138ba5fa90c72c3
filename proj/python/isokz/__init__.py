"""Stokes data of irregular connections and their quantum counterparts."""

from ._isokz import (
    InvalidInput,
    NumericalFailure,
    conjecture_probe,
    conventions,
    iso_flow,
    magnus,
    quantum_drift,
    quantum_stokes,
    scl_check,
    stokes_drift,
    stokes_matrices,
    verify,
)

__all__ = [
    "InvalidInput",
    "NumericalFailure",
    "conjecture_probe",
    "conventions",
    "iso_flow",
    "magnus",
    "quantum_drift",
    "quantum_stokes",
    "scl_check",
    "stokes_drift",
    "stokes_matrices",
    "verify",
]
