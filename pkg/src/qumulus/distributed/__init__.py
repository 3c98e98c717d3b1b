"""Multi-rank state-vector and Fock-tensor simulation.

Ranks communicate through a :class:`Transport`: in-process threads by
default, or spawned processes over sockets.  Results gathered at rank 0
match the single-rank simulators.
"""

from .circuits import DistributedQubitCircuit, DistributedQumodeCircuit, RankReport, qft_circuit
from .engine import MAX_GATHER_QUBITS, RankContext, check_world, setup, teardown
from .transport import (
    InProcessTransport,
    SocketTransport,
    Transport,
    launch,
    ordered_partners,
    run_processes,
    run_threads,
)

__all__ = [
    "DistributedQubitCircuit",
    "DistributedQumodeCircuit",
    "InProcessTransport",
    "MAX_GATHER_QUBITS",
    "RankContext",
    "RankReport",
    "SocketTransport",
    "Transport",
    "check_world",
    "launch",
    "ordered_partners",
    "qft_circuit",
    "run_processes",
    "run_threads",
    "setup",
    "teardown",
]
