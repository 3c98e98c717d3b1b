"""Qubit gate definitions: matrices and their parameter derivatives.

Controlled gates are represented as a base gate plus control wires; e.g. CNOT
is ``x`` with one control and CP is ``p`` with one control.  Every gate
reports its matrix and, for parametric gates, the derivative of that matrix
with respect to each parameter, which the adjoint differentiator uses.

Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import UnsupportedGateError

_I2 = np.eye(2, dtype=complex)
PAULI = {
    "i": _I2,
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rot(pauli: np.ndarray) -> tuple[Callable, Callable]:
    def mat(p):
        t = p[0]
        return np.cos(t / 2) * np.eye(pauli.shape[0]) - 1j * np.sin(t / 2) * pauli

    def der(p, k):
        return -0.5j * pauli @ mat(p)

    return mat, der


def _fixed(m: np.ndarray) -> tuple[Callable, None]:
    m = np.asarray(m, dtype=complex)
    return (lambda p: m), None


def _phase_mat(p):
    return np.diag([1.0, np.exp(1j * p[0])]).astype(complex)


def _phase_der(p, k):
    return np.diag([0.0, 1j * np.exp(1j * p[0])]).astype(complex)


def _u3_mat(p):
    th, ph, lam = p
    c, s = np.cos(th / 2), np.sin(th / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * ph) * s, np.exp(1j * (ph + lam)) * c],
        ],
        dtype=complex,
    )


def _u3_der(p, k):
    th, ph, lam = p
    c, s = np.cos(th / 2), np.sin(th / 2)
    if k == 0:
        return 0.5 * np.array(
            [
                [-s, -np.exp(1j * lam) * c],
                [np.exp(1j * ph) * c, -np.exp(1j * (ph + lam)) * s],
            ],
            dtype=complex,
        )
    if k == 1:
        return np.array([[0, 0], [1j * np.exp(1j * ph) * s, 1j * np.exp(1j * (ph + lam)) * c]], dtype=complex)
    return np.array([[0, -1j * np.exp(1j * lam) * s], [0, 1j * np.exp(1j * (ph + lam)) * c]], dtype=complex)


_SQ2 = 1 / np.sqrt(2)


@dataclass(frozen=True)
class GateSpec:
    """Static description of a base gate."""

    name: str
    ntarget: int
    nparam: int
    matrix: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray, int], np.ndarray] | None = None
    diagonal: bool = False


def _spec(name, ntarget, nparam, pair, diagonal=False):
    return GateSpec(name, ntarget, nparam, pair[0], pair[1], diagonal)


GATES: dict[str, GateSpec] = {
    "id": _spec("id", 1, 0, _fixed(_I2), diagonal=True),
    "x": _spec("x", 1, 0, _fixed(PAULI["x"])),
    "y": _spec("y", 1, 0, _fixed(PAULI["y"])),
    "z": _spec("z", 1, 0, _fixed(PAULI["z"]), diagonal=True),
    "h": _spec("h", 1, 0, _fixed([[_SQ2, _SQ2], [_SQ2, -_SQ2]])),
    "s": _spec("s", 1, 0, _fixed(np.diag([1, 1j])), diagonal=True),
    "sdg": _spec("sdg", 1, 0, _fixed(np.diag([1, -1j])), diagonal=True),
    "t": _spec("t", 1, 0, _fixed(np.diag([1, np.exp(1j * np.pi / 4)])), diagonal=True),
    "tdg": _spec("tdg", 1, 0, _fixed(np.diag([1, np.exp(-1j * np.pi / 4)])), diagonal=True),
    "rx": _spec("rx", 1, 1, _rot(PAULI["x"])),
    "ry": _spec("ry", 1, 1, _rot(PAULI["y"])),
    "rz": _spec("rz", 1, 1, _rot(PAULI["z"]), diagonal=True),
    "p": GateSpec("p", 1, 1, _phase_mat, _phase_der, True),
    "u3": GateSpec("u3", 1, 3, _u3_mat, _u3_der),
    "swap": _spec(
        "swap", 2, 0, _fixed([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    ),
    "rxx": _spec("rxx", 2, 1, _rot(np.kron(PAULI["x"], PAULI["x"]))),
    "ryy": _spec("ryy", 2, 1, _rot(np.kron(PAULI["y"], PAULI["y"]))),
    "rzz": _spec("rzz", 2, 1, _rot(np.kron(PAULI["z"], PAULI["z"])), diagonal=True),
}


def gate_spec(name: str) -> GateSpec:
    """Look up a base gate by name."""
    try:
        return GATES[name]
    except KeyError:
        raise UnsupportedGateError(f"unknown gate {name!r}") from None


@dataclass
class Gate:
    """A gate instance placed in a circuit.

    Attributes
    ----------
    name : str
        Base gate name (key of :data:`GATES`).
    wires : tuple of int
        Target wires, most significant first.
    controls : tuple of int
        Control wires (active on ``|1>``).
    params : ndarray
        Current parameter values; for encoded gates these are overwritten by
        the data row at run time.
    encode : bool
        Parameters come from the data vector.
    trainable : bool
        Parameters are variational (differentiable) circuit parameters.
    """

    name: str
    wires: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    encode: bool = False
    trainable: bool = False

    def __post_init__(self):
        spec = gate_spec(self.name)
        self.wires = tuple(int(w) for w in self.wires)
        self.controls = tuple(int(c) for c in self.controls)
        if len(self.wires) != spec.ntarget:
            raise ValueError(f"gate {self.name} acts on {spec.ntarget} wire(s), got {self.wires}")
        touched = self.wires + self.controls
        if len(set(touched)) != len(touched):
            raise ValueError(f"gate {self.name} has repeated wires {touched}")
        self.params = np.atleast_1d(np.asarray(self.params, dtype=float)).copy()
        if self.params.size == 0 and spec.nparam:
            self.params = np.zeros(spec.nparam)
        if self.params.size != spec.nparam:
            raise ValueError(f"gate {self.name} takes {spec.nparam} parameter(s), got {self.params.size}")

    @property
    def spec(self) -> GateSpec:
        return gate_spec(self.name)

    @property
    def nparam(self) -> int:
        return self.spec.nparam

    def matrix(self, params=None) -> np.ndarray:
        """Base (uncontrolled) matrix."""
        return self.spec.matrix(self.params if params is None else np.asarray(params, dtype=float))

    def derivative(self, k: int, params=None) -> np.ndarray:
        """Derivative of the base matrix with respect to parameter ``k``."""
        spec = self.spec
        if spec.derivative is None:
            raise ValueError(f"gate {self.name} has no parameters")
        return spec.derivative(self.params if params is None else np.asarray(params, dtype=float), k)

    def full_matrix(self, params=None) -> np.ndarray:
        """Matrix on ``controls + wires`` (controls most significant)."""
        base = self.matrix(params)
        nc = len(self.controls)
        dim = base.shape[0] * 2**nc
        out = np.eye(dim, dtype=complex)
        out[dim - base.shape[0] :, dim - base.shape[0] :] = base
        return out

    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.wires


#: Unitarity tolerance for user-supplied gate matrices.
UNITARY_TOL = 1e-10


@dataclass
class UnitaryGate(Gate):
    """Fixed user-supplied ``2^k x 2^k`` unitary on ``k`` target wires.

    The matrix is checked for unitarity (``max |U^dag U - I| <= 1e-10``)
    when the gate is created.  It carries no parameters.
    """

    name: str = "unitary"
    wires: tuple[int, ...] = ()
    unitary: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        self.wires = tuple(int(w) for w in self.wires)
        self.controls = tuple(int(c) for c in self.controls)
        k = len(self.wires)
        if k < 1 or u.shape != (2**k, 2**k):
            raise ValueError(f"unitary of shape {u.shape} does not act on {k} wire(s)")
        if not np.all(np.isfinite(u)):
            raise ValueError("unitary contains non-finite entries")
        err = float(np.max(np.abs(u.conj().T @ u - np.eye(2**k))))
        if err > UNITARY_TOL:
            raise ValueError(f"gate matrix is not unitary (max |U^dag U - I| = {err:.3e})")
        touched = self.wires + self.controls
        if len(set(touched)) != len(touched):
            raise ValueError(f"unitary gate has repeated wires {touched}")
        self.unitary = u
        self.name = "unitary"
        self.params = np.zeros(0)
        self.encode = False
        self.trainable = False

    @property
    def spec(self) -> GateSpec:
        u = self.unitary
        return GateSpec("unitary", len(self.wires), 0, lambda p: u)
