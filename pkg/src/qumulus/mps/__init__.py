"""Matrix-product-state simulation with bond-dimension truncation."""

from .circuits import (
    average_x,
    chain_bs_circuit,
    expectation_paulis,
    run_fock_mps,
    run_qubit_mps,
    tfim_dense_magnetization,
    tfim_gate_sequence,
    tfim_quench,
    tfim_trotter_step,
)
from .state import CHECKPOINT_VERSION, MPO, MPSState

__all__ = [
    "CHECKPOINT_VERSION",
    "MPO",
    "MPSState",
    "average_x",
    "chain_bs_circuit",
    "expectation_paulis",
    "run_fock_mps",
    "run_qubit_mps",
    "tfim_dense_magnetization",
    "tfim_gate_sequence",
    "tfim_quench",
    "tfim_trotter_step",
]
