"""Linear-algebra core: matrix functions, interferometer and Takagi decompositions."""

from .clements import MZI, ClementsMesh, clements_decompose, clements_reconstruct, mzi_matrix
from .kernels import BACKEND, batched, hafnian, implementations, permanent, torontonian
from .symplectic import (
    beamsplitter_unitary,
    expand,
    interferometer,
    is_symplectic,
    omega,
    rotation,
    squeezing,
    xxpp_to_xpxp,
)
from .takagi import takagi

__all__ = [
    "BACKEND",
    "MZI",
    "ClementsMesh",
    "batched",
    "beamsplitter_unitary",
    "clements_decompose",
    "clements_reconstruct",
    "expand",
    "hafnian",
    "implementations",
    "interferometer",
    "is_symplectic",
    "mzi_matrix",
    "omega",
    "permanent",
    "rotation",
    "squeezing",
    "takagi",
    "torontonian",
    "xxpp_to_xpxp",
]
