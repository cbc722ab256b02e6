"""Randomized linear gate set tomography in the Pauli transfer-matrix picture."""

from .channels import (
    SpamModel,
    amplitude_damping,
    noise_1q,
    noise_2q,
    pauli2_channel,
    pauli_channel,
    rotation,
)
from .circuits import Circuit, ProbabilityTable, random_circuits, simulate, simulate_table
from .design import ColumnLayout, DesignSystem, assemble, predict_linear, row_coefficients
from .estimate import NoiseVector, bootstrap, gauge_membership, gauge_vector, null_space_audit, solve
from .exceptions import DegenerateSystemError, RLGSTError, SchemaError, ValidationError
from .gateset import GateSet, calibrated_noise, completeness_check, standard_gateset
from .metrics import agsi, avg_fidelity, goodness_of_fit, stat_distance
from .pauli import Superop, pauli_basis, unitary_to_superop, vectorize

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "ColumnLayout",
    "DegenerateSystemError",
    "DesignSystem",
    "GateSet",
    "NoiseVector",
    "ProbabilityTable",
    "RLGSTError",
    "SchemaError",
    "SpamModel",
    "Superop",
    "ValidationError",
    "agsi",
    "amplitude_damping",
    "assemble",
    "avg_fidelity",
    "bootstrap",
    "calibrated_noise",
    "completeness_check",
    "gauge_membership",
    "gauge_vector",
    "goodness_of_fit",
    "noise_1q",
    "noise_2q",
    "null_space_audit",
    "pauli2_channel",
    "pauli_basis",
    "pauli_channel",
    "predict_linear",
    "random_circuits",
    "rotation",
    "row_coefficients",
    "simulate",
    "simulate_table",
    "solve",
    "standard_gateset",
    "stat_distance",
    "unitary_to_superop",
    "vectorize",
]
