"""Running qubit and photonic circuits on the MPS backend, plus the TFIM quench."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import UnsupportedGateError
from ..qubit.gates import PAULI, Gate
from .state import MPSState


def run_qubit_mps(circuit, chi: int | None = None, data=None, cutoff: float = 0.0, state: MPSState | None = None) -> MPSState:
    """Execute a pure :class:`~qumulus.qubit.QubitCircuit` as an MPS.

    Parameters
    ----------
    circuit : QubitCircuit
    chi : int, optional
        Maximum bond dimension.
    data : array_like, optional
        One data row for encoded gates.
    cutoff : float
        Relative singular-value cutoff; ``0`` keeps every singular value up
        to ``chi``.
    state : MPSState, optional
        Initial state (default ``|0...0>``); it is copied.
    """
    if circuit.mixed:
        raise ValueError("the MPS backend simulates pure states only")
    rows = circuit._data_rows(data)
    if state is None:
        psi = MPSState.basis([0] * circuit.nqubit, 2, chi, cutoff)
    else:
        psi = state.copy()
        psi.chi_max, psi.cutoff = chi, float(cutoff)
    for op, params in circuit.resolved(None if rows is None else rows[0]):
        if not isinstance(op, Gate):
            raise UnsupportedGateError("noise channels are not supported by the MPS backend")
        psi.apply_gate(op.full_matrix(params), op.qubits())
    return psi


def run_fock_mps(circuit, chi: int | None = None, cutoff: float = 0.0) -> MPSState:
    """Execute a :class:`~qumulus.photonic.fock.QumodeCircuit` (tensor mode) as an MPS.

    Each mode is one site of local dimension ``circuit.cutoff``.  The initial
    state must be a single occupation pattern.  Two-mode passive gates use
    their truncated Fock matrix, so norm that would leave the cutoff is lost
    (as in the dense tensor backend).
    """
    from ..photonic import fockmath as fm

    d = circuit.cutoff
    if d is None:
        raise ValueError("the MPS backend needs a Fock cutoff")
    if len(circuit.init) != 1:
        raise UnsupportedGateError("the MPS backend needs a single initial occupation pattern")
    (pattern,) = circuit.init
    psi = MPSState.basis(pattern, d, chi, cutoff)
    for op in circuit.ops:
        if op.name == "loss":
            raise UnsupportedGateError("loss channels are not supported by the MPS backend")
        if op.passive:
            if len(op.wires) == 1:
                m = fm.phase_matrix(np.angle(op.matrix[0, 0]), d)
            elif len(op.wires) == 2:
                m = fm.passive_two_mode_matrix(op.matrix, d)
            else:
                raise UnsupportedGateError("the MPS backend applies one- and two-mode gates only")
        elif op.name == "s":
            m = fm.squeezing_matrix(op.params[0], op.params[1], d)
        elif op.name == "d":
            m = fm.displacement_matrix(op.params[0] * np.exp(1j * op.params[1]), d)
        elif op.name == "kerr":
            m = fm.kerr_matrix(op.params[0], d)
        else:
            raise UnsupportedGateError(f"unknown Fock operation {op.name!r}")
        psi.apply_gate(m, op.wires)
    return psi


def expectation_paulis(psi: MPSState, observables) -> np.ndarray:
    """Expectations of :class:`~qumulus.qubit.Observable` terms on one or two adjacent sites."""
    vals = []
    for o in observables:
        active = [(w, c) for w, c in zip(o.wires, o.basis) if c != "i"]
        if not active:
            vals.append(1.0)
            continue
        op = PAULI[active[0][1]]
        for _, c in active[1:]:
            op = np.kron(op, PAULI[c])
        vals.append(psi.expectation_local(op, [w for w, _ in active]))
    return np.asarray(vals)


# ---------------------------------------------------------------------- TFIM
def _rx(a: float) -> np.ndarray:
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _rzz(a: float) -> np.ndarray:
    return np.diag(np.exp(-0.5j * a * np.array([1, -1, -1, 1])))


def tfim_gate_sequence(n: int, J: float, h: float, dt: float) -> list[tuple[str, tuple[int, ...], float]]:
    """One Trotter step as ``(name, wires, angle)`` triples.

    ``Rx(h dt)`` on every site, ``Rzz(2 J dt)`` on even then odd bonds, the
    ring-closing ``Rzz`` on ``(n - 1, 0)``, and a final ``Rx(h dt)`` layer.
    """
    seq: list[tuple[str, tuple[int, ...], float]] = [("rx", (i,), h * dt) for i in range(n)]
    seq += [("rzz", (i, i + 1), 2 * J * dt) for i in range(0, n - 1, 2)]
    seq += [("rzz", (i, i + 1), 2 * J * dt) for i in range(1, n - 1, 2)]
    if n > 2:
        seq.append(("rzz", (n - 1, 0), 2 * J * dt))
    seq += [("rx", (i,), h * dt) for i in range(n)]
    return seq


def tfim_trotter_step(psi: MPSState, J: float, h: float, dt: float) -> MPSState:
    """Apply one Trotter step in place (and return the state)."""
    for name, wires, a in tfim_gate_sequence(psi.nsite, J, h, dt):
        if a == 0.0:
            continue
        psi.apply_gate(_rx(a) if name == "rx" else _rzz(a), wires)
    return psi


def average_x(psi: MPSState) -> float:
    x = PAULI["x"]
    return float(np.mean([psi.expectation_local(x, k) for k in range(psi.nsite)]))


def tfim_quench(
    n: int, J: float = 1.0, h: float = 1.2, dt: float = 0.1, steps: int = 20, chi: int = 64, cutoff: float = 1e-12
) -> dict[str, list[float]]:
    """Average X magnetisation after ``0 .. steps`` Trotter steps from ``|+>^n``.

    Returns
    -------
    dict
        ``steps``, ``times``, ``magnetization`` and ``truncation_error``
        lists (one entry per step count).
    """
    plus = np.ones(2) / np.sqrt(2)
    psi = MPSState.product([plus] * n, chi, cutoff)
    out: dict[str, list[float]] = {"steps": [], "times": [], "magnetization": [], "truncation_error": []}
    for step in range(steps + 1):
        if step:
            tfim_trotter_step(psi, J, h, dt)
        out["steps"].append(step)
        out["times"].append(step * dt)
        out["magnetization"].append(average_x(psi))
        out["truncation_error"].append(psi.truncation_error)
    return out


def tfim_dense_magnetization(n: int, J: float, h: float, dt: float, steps: int) -> list[float]:
    """State-vector oracle for :func:`tfim_quench` (uses the qubit simulator)."""
    from ..qubit import QubitCircuit

    cir = QubitCircuit(n)
    for i in range(n):
        cir.h(i)
    psi = cir.run()
    step = QubitCircuit(n)
    for name, wires, a in tfim_gate_sequence(n, J, h, dt):
        step.gate(name, wires, (), [a], trainable=False)
    from ..qubit.state import pauli_expectation

    mags = []
    for k in range(steps + 1):
        if k:
            psi = step.run(state=psi[0])
        mags.append(float(np.mean([pauli_expectation(psi, [i], "x")[0].real for i in range(n)])))
    return mags


def chain_bs_circuit(nmode: int = 20, cutoff: int = 4, photons: Sequence[int] | None = None):
    """Beam splitters on every neighbouring pair of an ``nmode`` chain."""
    from ..photonic.fock import QumodeCircuit

    cir = QumodeCircuit(nmode, [1] * nmode if photons is None else list(photons), cutoff=cutoff)
    for i in range(nmode - 1):
        cir.bs([i, i + 1])
    return cir
