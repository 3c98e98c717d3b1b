"""Gate-by-gate translation of qubit circuits into measurement patterns.

The building blocks are

``J(a) = H P(a)``
    realised on input node ``i`` with a fresh node ``j`` by
    ``N_j  E_ij  M_i(XY, -a)  X_j^{s_i}``;
``CZ``
    a bare ``E`` between the two current nodes of the wires.

Every single-qubit gate is reduced to ``J`` blocks (``H = J(0)``, diagonal
gates ``P(a) = J(0) J(a)``, ``Rx(a) ~ J(a) J(0)``, and a generic unitary via
``U ~ Rz(a) Rx(b) Rz(c) = J(0) J(a) J(b) J(c)``).  Two-qubit gates go through
CZ/CNOT identities, singly-controlled single-qubit gates through the ``ABC``
construction, and Toffoli through its standard Clifford+T circuit.  The
result is a *wild* pattern: corrections stay where the blocks put them.
Global phases are dropped throughout.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import UnsupportedGateError
from .pattern import Pattern

_ATOL = 1e-12


def _rz(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def _ry(a):
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _su2(u: np.ndarray) -> np.ndarray:
    det = np.linalg.det(u)
    return u / np.sqrt(det)


def zxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """``(a, b, c)`` with ``u = e^{ig} Rz(a) Rx(b) Rz(c)``."""
    v = _su2(np.asarray(u, dtype=complex))
    b = 2 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    plus = 2 * np.angle(v[1, 1]) if abs(v[1, 1]) > _ATOL else 0.0
    minus = 2 * np.angle(1j * v[1, 0]) if abs(v[1, 0]) > _ATOL else 0.0
    return (plus + minus) / 2, float(b), (plus - minus) / 2


def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """``(alpha, beta, gamma, delta)`` with ``u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)`` exactly."""
    u = np.asarray(u, dtype=complex)
    alpha = float(np.angle(np.linalg.det(u)) / 2)
    v = u * np.exp(-1j * alpha)
    gamma = 2 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    plus = 2 * np.angle(v[1, 1]) if abs(v[1, 1]) > _ATOL else 0.0
    minus = 2 * np.angle(v[1, 0]) if abs(v[1, 0]) > _ATOL else 0.0
    return alpha, (plus + minus) / 2, float(gamma), (plus - minus) / 2


class _Builder:
    """Tracks the current node of each wire while emitting commands."""

    def __init__(self, nqubit: int):
        self.pattern = Pattern(range(nqubit))
        self.cur = list(range(nqubit))
        self.next = nqubit

    # -------------------------------------------------------- primitives
    def j(self, wire: int, a: float) -> None:
        i, k = self.cur[wire], self.next
        self.next += 1
        p = self.pattern
        p.n(k)
        p.e(i, k)
        p.m(i, angle=-a if a else 0.0)
        p.x(k, [i])
        self.cur[wire] = k

    def cz(self, w1: int, w2: int) -> None:
        self.pattern.e(self.cur[w1], self.cur[w2])

    # ---------------------------------------------------------- one qubit
    def h(self, w: int) -> None:
        self.j(w, 0.0)

    def phase(self, w: int, a: float) -> None:
        if abs(a) > _ATOL:
            self.j(w, a)
            self.j(w, 0.0)

    def rx(self, w: int, a: float) -> None:
        if abs(a) > _ATOL:
            self.j(w, 0.0)
            self.j(w, a)

    def unitary(self, w: int, u: np.ndarray) -> None:
        a, b, c = zxz_angles(u)
        if abs(b) <= _ATOL:
            self.phase(w, a + c)
            return
        self.j(w, c)
        self.j(w, b)
        self.j(w, a)
        self.j(w, 0.0)

    # ---------------------------------------------------------- two qubit
    def cnot(self, c: int, t: int) -> None:
        self.h(t)
        self.cz(c, t)
        self.h(t)

    def controlled(self, c: int, t: int, u: np.ndarray) -> None:
        alpha, beta, gamma, delta = zyz_angles(u)
        a = _rz(beta) @ _ry(gamma / 2)
        b = _ry(-gamma / 2) @ _rz(-(delta + beta) / 2)
        cc = _rz((delta - beta) / 2)
        self.unitary(t, cc)
        self.cnot(c, t)
        self.unitary(t, b)
        self.cnot(c, t)
        self.unitary(t, a)
        self.phase(c, alpha)

    def rzz(self, w1: int, w2: int, a: float) -> None:
        self.cnot(w1, w2)
        self.phase(w2, a)  # Rz(a) up to a global phase
        self.cnot(w1, w2)

    def toffoli(self, a: int, b: int, t: int) -> None:
        tq, tdg = np.pi / 4, -np.pi / 4
        self.h(t)
        self.cnot(b, t)
        self.phase(t, tdg)
        self.cnot(a, t)
        self.phase(t, tq)
        self.cnot(b, t)
        self.phase(t, tdg)
        self.cnot(a, t)
        self.phase(b, tq)
        self.phase(t, tq)
        self.h(t)
        self.cnot(a, b)
        self.phase(a, tq)
        self.phase(b, tdg)
        self.cnot(a, b)


_DIAGONAL = {"z": np.pi, "s": np.pi / 2, "sdg": -np.pi / 2, "t": np.pi / 4, "tdg": -np.pi / 4}


def _emit(b: _Builder, gate, params: np.ndarray) -> None:
    name, wires, controls = gate.name, gate.wires, gate.controls
    if not controls:
        if name == "id":
            return
        if name == "h":
            b.h(wires[0])
        elif name in _DIAGONAL:
            b.phase(wires[0], _DIAGONAL[name])
        elif name in ("rz", "p"):
            b.phase(wires[0], float(params[0]))
        elif name == "x":
            b.rx(wires[0], np.pi)
        elif name == "rx":
            b.rx(wires[0], float(params[0]))
        elif gate.spec.ntarget == 1:
            b.unitary(wires[0], gate.matrix(params))
        elif name == "swap":
            w1, w2 = wires
            b.cnot(w1, w2)
            b.cnot(w2, w1)
            b.cnot(w1, w2)
        elif name == "rzz":
            b.rzz(wires[0], wires[1], float(params[0]))
        elif name == "rxx":
            for w in wires:
                b.h(w)
            b.rzz(wires[0], wires[1], float(params[0]))
            for w in wires:
                b.h(w)
        elif name == "ryy":
            for w in wires:
                b.phase(w, -np.pi / 2)
                b.h(w)
            b.rzz(wires[0], wires[1], float(params[0]))
            for w in wires:
                b.h(w)
                b.phase(w, np.pi / 2)
        else:
            raise UnsupportedGateError(f"no pattern decomposition for gate {name!r}")
        return
    if len(controls) == 1 and gate.spec.ntarget == 1:
        c, t = controls[0], wires[0]
        if name == "z":
            b.cz(c, t)
        elif name == "x":
            b.cnot(c, t)
        else:
            b.controlled(c, t, gate.matrix(params))
        return
    if len(controls) == 2 and name == "x":
        b.toffoli(controls[0], controls[1], wires[0])
        return
    raise UnsupportedGateError(
        f"no pattern decomposition for {name!r} with {len(controls)} control(s) on {len(wires)} target(s)"
    )


def transpile(circuit, data=None) -> Pattern:
    """Translate a :class:`~qumulus.qubit.QubitCircuit` into a pattern.

    Parameters
    ----------
    circuit : QubitCircuit
        Pure circuit; noise channels are rejected.
    data : array_like, optional
        One data row for encoded gates.

    Returns
    -------
    Pattern
        Inputs are nodes ``0 .. n-1`` (wire order) and the outputs are the
        final node of each wire, in wire order.  Executing the pattern on
        the circuit's input state reproduces the circuit's output state up
        to a global phase.

    Raises
    ------
    UnsupportedGateError
        For channels, multi-controlled gates other than Toffoli, and
        controlled two-qubit gates.
    """
    from ..qubit.circuit import Gate

    rows = circuit._data_rows(data)
    b = _Builder(circuit.nqubit)
    for op, params in circuit.resolved(None if rows is None else rows[0]):
        if not isinstance(op, Gate):
            raise UnsupportedGateError(f"noise channel {type(op).__name__} has no pattern form")
        _emit(b, op, params)
    b.pattern.set_outputs(b.cur)
    return b.pattern


def transpile_gates(nqubit: int, gates: Sequence) -> Pattern:
    """Translate a bare list of :class:`~qumulus.qubit.Gate` objects."""
    from ..qubit.circuit import QubitCircuit

    cir = QubitCircuit(nqubit)
    for g in gates:
        cir.add(g)
    return transpile(cir)
