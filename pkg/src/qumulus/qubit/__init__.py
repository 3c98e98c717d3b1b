"""Qubit circuits on batched state vectors and density matrices."""

from .circuit import Channel, Gradient, Observable, QubitCircuit, adjoint_differentiate
from .gates import GATES, PAULI, Gate, UnitaryGate, gate_spec
from .state import (
    CHANNELS,
    apply_kraus,
    apply_matrix,
    pauli_expectation,
    probabilities,
    sample_counts,
    zero_state,
)

__all__ = [
    "CHANNELS",
    "GATES",
    "PAULI",
    "Channel",
    "Gate",
    "Gradient",
    "Observable",
    "UnitaryGate",
    "QubitCircuit",
    "adjoint_differentiate",
    "apply_kraus",
    "apply_matrix",
    "gate_spec",
    "pauli_expectation",
    "probabilities",
    "sample_counts",
    "zero_state",
]
