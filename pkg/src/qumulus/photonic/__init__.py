"""Photonic backends.

fock
    Basis-mode (permanent) and cutoff-tensor Fock simulation.
gaussian
    Covariance-matrix simulation with PNRD, threshold and homodyne detection.
bosonic
    Linear combinations of Gaussians (cat and GKP states).
tdm
    Time-domain multiplexed programs with delay loops.
"""

from .bosonic import BosonicCircuit, BosonicState, GKPSpec, breeding_demo, cat, coherent, gkp, squeezed
from .fock import FockTensorState, QumodeCircuit, ket, postselect, postselect_distribution
from .fockmath import fock_amplitude, fock_prob_distribution
from .gaussian import (
    GaussianCircuit,
    GaussianState,
    SymplecticOp,
    gbs,
    gbs_from_graph,
    measure_homodyne,
    prob_pnrd,
    prob_threshold,
    sample_detection,
)
from .tdm import TDMProgram, cluster_program, epr_program, run_tdm, unroll
from .wigner import wigner_fock

__all__ = [
    "BosonicCircuit",
    "BosonicState",
    "FockTensorState",
    "GKPSpec",
    "GaussianCircuit",
    "GaussianState",
    "QumodeCircuit",
    "SymplecticOp",
    "TDMProgram",
    "breeding_demo",
    "cat",
    "cluster_program",
    "coherent",
    "epr_program",
    "fock_amplitude",
    "fock_prob_distribution",
    "gbs",
    "gbs_from_graph",
    "gkp",
    "ket",
    "measure_homodyne",
    "postselect",
    "postselect_distribution",
    "prob_pnrd",
    "prob_threshold",
    "run_tdm",
    "sample_detection",
    "squeezed",
    "unroll",
    "wigner_fock",
]
