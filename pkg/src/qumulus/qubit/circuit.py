"""Qubit circuit builder, executor, readout and adjoint differentiation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..rng import as_generator
from . import state as st
from .gates import PAULI, Gate, UnitaryGate, gate_spec


@dataclass
class Observable:
    """Pauli-string observable ``P_{w0} (x) P_{w1} (x) ...``."""

    wires: tuple[int, ...]
    basis: str

    def __post_init__(self):
        self.wires = tuple(int(w) for w in self.wires)
        self.basis = self.basis.lower()
        if len(self.basis) == 1 and len(self.wires) > 1:
            self.basis = self.basis * len(self.wires)
        if len(self.basis) != len(self.wires):
            raise ValueError(f"basis {self.basis!r} does not match wires {self.wires}")
        if any(c not in "ixyz" for c in self.basis):
            raise ValueError(f"unknown Pauli in {self.basis!r}")


@dataclass
class Channel:
    """Kraus channel placed in a circuit."""

    name: str
    wires: tuple[int, ...]
    kraus: list[np.ndarray]


def _as_wires(w) -> tuple[int, ...]:
    if isinstance(w, (int, np.integer)):
        return (int(w),)
    return tuple(int(x) for x in w)


class QubitCircuit:
    """Gate-based qubit circuit.

    Parameters
    ----------
    nqubit : int
    mixed : bool, optional
        Simulate density matrices (required for noise channels).

    Notes
    -----
    Gate parameters are either fixed, *trainable* (collected in
    :attr:`params` in insertion order) or *encoded* (taken from the data row
    passed to :meth:`run`, in insertion order).  The data length must equal
    :attr:`n_encode` exactly.

    Examples
    --------
    >>> cir = QubitCircuit(2)
    >>> cir.h(0); cir.cnot(0, 1)
    >>> cir.observable([0, 1], "zz")
    >>> float(cir.expectation()[0, 0])
    1.0
    """

    def __init__(self, nqubit: int, mixed: bool = False):
        if nqubit < 1:
            raise ValueError("a circuit needs at least one qubit")
        self.nqubit = int(nqubit)
        self.mixed = bool(mixed)
        self.ops: list[Gate | Channel] = []
        self.observables: list[Observable] = []
        self._state: np.ndarray | None = None

    # ------------------------------------------------------------------ build
    def _check_wires(self, wires: Sequence[int]) -> None:
        for w in wires:
            if not 0 <= w < self.nqubit:
                raise ValueError(f"wire {w} out of range for {self.nqubit} qubits")

    def add(self, gate: Gate) -> Gate:
        """Append a :class:`Gate` instance."""
        self._check_wires(gate.qubits())
        self.ops.append(gate)
        return gate

    def gate(self, name, wires, controls=(), params=None, *, encode=False, trainable=None):
        """Append a gate by name.

        ``trainable`` defaults to true for parametric gates that are not encoded.
        """
        spec = gate_spec(name)
        if trainable is None:
            trainable = spec.nparam > 0 and not encode and params is None
        p = np.zeros(spec.nparam) if params is None else params
        return self.add(Gate(name, _as_wires(wires), _as_wires(controls), p, encode, bool(trainable)))

    def x(self, wires, controls=()):
        return self.gate("x", wires, controls)

    def y(self, wires, controls=()):
        return self.gate("y", wires, controls)

    def z(self, wires, controls=()):
        return self.gate("z", wires, controls)

    def h(self, wires, controls=()):
        return self.gate("h", wires, controls)

    def s(self, wires, controls=()):
        return self.gate("s", wires, controls)

    def t(self, wires, controls=()):
        return self.gate("t", wires, controls)

    def rx(self, wires, inputs=None, controls=(), encode=False):
        return self.gate("rx", wires, controls, inputs, encode=encode)

    def ry(self, wires, inputs=None, controls=(), encode=False):
        return self.gate("ry", wires, controls, inputs, encode=encode)

    def rz(self, wires, inputs=None, controls=(), encode=False):
        return self.gate("rz", wires, controls, inputs, encode=encode)

    def p(self, wires, inputs=None, controls=(), encode=False):
        return self.gate("p", wires, controls, inputs, encode=encode)

    def u3(self, wires, inputs=None, controls=(), encode=False):
        return self.gate("u3", wires, controls, inputs, encode=encode)

    def cnot(self, control: int, target: int):
        return self.gate("x", target, control)

    def cz(self, control: int, target: int):
        return self.gate("z", target, control)

    def cp(self, control: int, target: int, inputs=None, encode=False):
        return self.gate("p", target, control, inputs, encode=encode)

    def cry(self, control: int, target: int, inputs=None, encode=False):
        return self.gate("ry", target, control, inputs, encode=encode)

    def swap(self, wires, controls=()):
        return self.gate("swap", wires, controls)

    def rxx(self, wires, inputs=None, encode=False):
        return self.gate("rxx", wires, (), inputs, encode=encode)

    def ryy(self, wires, inputs=None, encode=False):
        return self.gate("ryy", wires, (), inputs, encode=encode)

    def rzz(self, wires, inputs=None, encode=False):
        return self.gate("rzz", wires, (), inputs, encode=encode)

    def any(self, unitary, wires, controls=()):
        """Append a fixed custom unitary on ``wires`` (first wire most significant)."""
        return self.add(UnitaryGate(wires=_as_wires(wires), controls=_as_wires(controls), unitary=unitary))

    def toffoli(self, c0: int, c1: int, target: int):
        return self.gate("x", target, (c0, c1))

    def _layer(self, name, wires, inputs, encode):
        wires = range(self.nqubit) if wires is None else _as_wires(wires)
        wires = list(wires)
        vals = [None] * len(wires) if inputs is None else list(np.atleast_1d(inputs))
        if len(vals) != len(wires):
            raise ValueError("layer inputs must match its wires")
        for w, v in zip(wires, vals):
            self.gate(name, w, (), v, encode=encode)

    def rxlayer(self, wires=None, inputs=None, encode=False):
        self._layer("rx", wires, inputs, encode)

    def rylayer(self, wires=None, inputs=None, encode=False):
        self._layer("ry", wires, inputs, encode)

    def rzlayer(self, wires=None, inputs=None, encode=False):
        self._layer("rz", wires, inputs, encode)

    def hlayer(self, wires=None):
        for w in range(self.nqubit) if wires is None else _as_wires(wires):
            self.h(w)

    def cnot_ring(self, wires=None):
        """CNOT from every wire to its successor, closing the ring."""
        wires = list(range(self.nqubit) if wires is None else _as_wires(wires))
        n = len(wires)
        if n < 2:
            return
        for i in range(n):
            self.cnot(wires[i], wires[(i + 1) % n])

    def channel(self, name: str, wires, *args, kraus=None):
        """Append a noise channel.

        A pure circuit is promoted to density-matrix simulation
        (``mixed=True``) the first time a channel is added.
        """
        if not self.mixed:
            self.mixed = True
            self._state = None
        wires = _as_wires(wires)
        self._check_wires(wires)
        ops = kraus if kraus is not None else st.CHANNELS[name](*args)
        ops = [np.asarray(k, dtype=complex) for k in ops]
        st.check_kraus(ops)
        self.ops.append(Channel(name, wires, ops))

    def observable(self, wires=0, basis: str = "z"):
        """Register a Pauli-string observable for :meth:`expectation`."""
        obs = Observable(_as_wires(wires), basis)
        self._check_wires(obs.wires)
        self.observables.append(obs)
        return obs

    # ------------------------------------------------------------- parameters
    @property
    def gates(self) -> list[Gate]:
        return [op for op in self.ops if isinstance(op, Gate)]

    @property
    def n_encode(self) -> int:
        """Number of data values consumed by encoded gates."""
        return sum(g.nparam for g in self.gates if g.encode)

    @property
    def n_params(self) -> int:
        return sum(g.nparam for g in self.gates if g.trainable and not g.encode)

    @property
    def params(self) -> np.ndarray:
        """Trainable parameters, concatenated in insertion order."""
        vals = [g.params for g in self.gates if g.trainable and not g.encode]
        return np.concatenate(vals) if vals else np.zeros(0)

    @params.setter
    def params(self, values) -> None:
        values = np.asarray(values, dtype=float).ravel()
        if values.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {values.size}")
        i = 0
        for g in self.gates:
            if g.trainable and not g.encode:
                g.params = values[i : i + g.nparam].copy()
                i += g.nparam

    def init_params(self, rng=None, low: float = 0.0, high: float = 2 * np.pi) -> np.ndarray:
        """Draw trainable parameters uniformly from ``[low, high)``."""
        gen = as_generator(rng, "qubit.init")
        self.params = gen.uniform(low, high, self.n_params)
        return self.params

    def _data_rows(self, data) -> np.ndarray | None:
        need = self.n_encode
        if data is None:
            if need:
                raise ValueError(f"circuit encodes {need} value(s) but no data was given")
            return None
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != need:
            raise ValueError(f"data rows must have exactly {need} value(s), got shape {np.shape(data)}")
        return arr

    def resolved(self, data_row=None) -> list[tuple[Gate | Channel, np.ndarray | None]]:
        """Pair every op with its concrete parameters for one data row."""
        out = []
        k = 0
        for op in self.ops:
            if isinstance(op, Gate) and op.encode:
                out.append((op, np.asarray(data_row[k : k + op.nparam], dtype=float)))
                k += op.nparam
            elif isinstance(op, Gate):
                out.append((op, op.params))
            else:
                out.append((op, None))
        return out

    # -------------------------------------------------------------- execution
    def initial_state(self, batch: int, state=None) -> np.ndarray:
        if state is None:
            return st.zero_state(self.nqubit, batch, self.mixed)
        arr = np.asarray(state, dtype=complex)
        dim = 2**self.nqubit
        if self.mixed:
            if arr.ndim == 1:
                arr = np.outer(arr, arr.conj())
            if arr.ndim == 2:
                arr = arr[None]
            if arr.shape[1:] != (dim, dim):
                raise ValueError("initial density matrix has the wrong dimension")
        else:
            if arr.ndim == 1:
                arr = arr[None]
            if arr.shape[1] != dim:
                raise ValueError("initial state has the wrong dimension")
        if arr.shape[0] == 1 and batch > 1:
            arr = np.repeat(arr, batch, axis=0)
        return arr.copy()

    def run(self, data=None, state=None) -> np.ndarray:
        """Execute the circuit.

        Parameters
        ----------
        data : array_like, optional
            One data row ``(n_encode,)`` or a batch ``(B, n_encode)``.
        state : array_like, optional
            Initial state (defaults to ``|0...0>``).

        Returns
        -------
        ndarray
            ``(B, 2**n)`` amplitudes or ``(B, 2**n, 2**n)`` density matrices.
        """
        rows = self._data_rows(data)
        batch = 1 if rows is None else rows.shape[0]
        init = self.initial_state(batch, state)
        if rows is None or not any(g.encode for g in self.gates):
            out = self._evolve(init, self.resolved(None if rows is None else rows[0]))
        else:
            out = np.concatenate(
                [self._evolve(init[b : b + 1], self.resolved(rows[b])) for b in range(batch)]
            )
        self._state = out
        return out

    __call__ = run

    def _evolve(self, psi: np.ndarray, ops) -> np.ndarray:
        for op, params in ops:
            if isinstance(op, Gate):
                psi = st.apply_matrix(psi, op.matrix(params), op.wires, op.controls, mixed=self.mixed)
            else:
                psi = st.apply_kraus(psi, op.kraus, op.wires)
        return psi

    @property
    def state(self) -> np.ndarray:
        if self._state is None:
            self.run()
        return self._state

    def unitary(self, data=None) -> np.ndarray:
        """Dense unitary of a pure, noise-free circuit (testing aid)."""
        if self.mixed:
            raise ValueError("unitary() is defined for pure circuits only")
        dim = 2**self.nqubit
        rows = self._data_rows(data)
        ops = self.resolved(None if rows is None else rows[0])
        return self._evolve(np.eye(dim, dtype=complex), ops).T

    def pattern(self, data=None):
        """Measurement pattern equivalent to this circuit (see :func:`qumulus.mbqc.transpile`)."""
        from ..mbqc.transpile import transpile

        return transpile(self, data)

    # ---------------------------------------------------------------- readout
    def probabilities(self, wires=None) -> np.ndarray:
        return st.probabilities(self.state, None if wires is None else _as_wires(wires), mixed=self.mixed)

    def measure(self, shots: int = 1024, wires=None, with_prob: bool = False, seed=None):
        """Sample computational-basis outcomes.

        Returns a list (one entry per batch row) of ``{bitstring: count}``, or
        ``{bitstring: (count, probability)}`` when ``with_prob`` is set.
        """
        wires = tuple(range(self.nqubit)) if wires is None else _as_wires(wires)
        self._check_wires(wires)
        probs = st.probabilities(self.state, wires, mixed=self.mixed)
        return st.sample_counts(probs, int(shots), len(wires), as_generator(seed, "qubit.measure"), with_prob)

    def expectation(self, observables=None) -> np.ndarray:
        """Expectation values, shape ``(B, n_observables)``."""
        obs = self.observables if observables is None else observables
        if not obs:
            raise ValueError("no observables registered")
        cols = [st.pauli_expectation(self.state, o.wires, o.basis, mixed=self.mixed) for o in obs]
        return np.stack(cols, axis=1)

    # --------------------------------------------------------- differentiation
    def adjoint_gradient(self, data=None, observables=None, state=None) -> "Gradient":
        """Exact gradients by the adjoint method (pure circuits only).

        Returns
        -------
        Gradient
            ``expvals`` with shape ``(B, K)``, ``params`` with shape
            ``(B, K, n_params)`` and ``data`` with shape ``(B, K, n_encode)``.
        """
        if self.mixed:
            raise ValueError("adjoint differentiation requires a pure-state circuit")
        obs = self.observables if observables is None else observables
        if not obs:
            raise ValueError("no observables registered")
        rows = self._data_rows(data)
        batch = 1 if rows is None else rows.shape[0]
        init = self.initial_state(batch, state)
        ev = np.zeros((batch, len(obs)))
        gp = np.zeros((batch, len(obs), self.n_params))
        gd = np.zeros((batch, len(obs), self.n_encode))
        for b in range(batch):
            ops = self.resolved(None if rows is None else rows[b])
            e, p, d = adjoint_differentiate(ops, init[b : b + 1], obs)
            ev[b], gp[b], gd[b] = e, p, d
        return Gradient(ev, gp, gd)


@dataclass
class Gradient:
    """Output of :meth:`QubitCircuit.adjoint_gradient`."""

    expvals: np.ndarray
    params: np.ndarray
    data: np.ndarray


def adjoint_differentiate(ops, psi0: np.ndarray, observables: Sequence[Observable], apply=None, inner=None):
    """Adjoint-method gradients for one initial state.

    Parameters
    ----------
    ops : list of (Gate, params)
        Resolved operations, see :meth:`QubitCircuit.resolved`.
    psi0 : ndarray, shape (1, 2**n)
    observables : sequence of Observable
    apply : callable, optional
        ``apply(psi, matrix, wires, controls, project)``; lets the distributed
        engine substitute its own kernel.
    inner : callable, optional
        ``inner(a, b) -> <a|b>`` (a global reduction in the distributed case).

    Returns
    -------
    expvals : ndarray (K,)
    grad_params : ndarray (K, n_trainable)
    grad_data : ndarray (K, n_encoded)
    """
    if apply is None:
        def apply(psi, m, wires, controls, project=False):
            return st.apply_matrix(psi, m, wires, controls, project=project)
    if inner is None:
        def inner(a, b):
            return complex(np.vdot(a, b))
    pauli_apply = getattr(apply, "pauli", None)

    psi = psi0
    for op, params in ops:
        psi = apply(psi, op.matrix(params), op.wires, op.controls)

    n_train = sum(op.nparam for op, _ in ops if op.trainable and not op.encode)
    n_enc = sum(op.nparam for op, _ in ops if op.encode)
    k = len(observables)
    grad_p = np.zeros((k, n_train))
    grad_d = np.zeros((k, n_enc))
    lams = []
    ev = np.zeros(k)
    for i, o in enumerate(observables):
        lam = psi
        for w, c in zip(o.wires, o.basis):
            if c != "i":
                lam = pauli_apply(lam, c, w) if pauli_apply else apply(lam, PAULI[c], (w,), ())
        ev[i] = inner(psi, lam).real
        lams.append(lam)

    pi = n_train
    di = n_enc
    for op, params in reversed(ops):
        udag = op.matrix(params).conj().T
        psi = apply(psi, udag, op.wires, op.controls)
        if op.nparam and (op.encode or op.trainable):
            if op.encode:
                di -= op.nparam
                base, target = di, grad_d
            else:
                pi -= op.nparam
                base, target = pi, grad_p
            for j in range(op.nparam):
                dpsi = apply(psi, op.derivative(j, params), op.wires, op.controls, True)
                for i in range(k):
                    target[i, base + j] = 2.0 * inner(lams[i], dpsi).real
        lams = [apply(lam, udag, op.wires, op.controls) for lam in lams]
    return ev, grad_p, grad_d
