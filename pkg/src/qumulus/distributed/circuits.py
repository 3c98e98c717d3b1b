"""Distributed qubit and Fock circuits built on :mod:`.engine`.

:class:`DistributedQubitCircuit` has the builder API of
:class:`~qumulus.qubit.QubitCircuit`; its execution methods launch the
ranks, run the same program on each, and return the values aggregated at
rank 0 (which equal the single-rank results).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UnsupportedGateError
from ..qubit.circuit import Gate, QubitCircuit, adjoint_differentiate
from ..qubit import state as st
from ..rng import as_generator
from .engine import RankContext, check_world, setup, teardown
from .transport import launch


@dataclass
class RankReport:
    """What one rank hands back after a job."""

    rank: int
    state: np.ndarray | None = None
    probs: np.ndarray | None = None
    expvals: np.ndarray | None = None
    grad_params: np.ndarray | None = None
    grad_data: np.ndarray | None = None
    messages: int = 0
    bytes: int = 0
    gate_messages: list[int] = field(default_factory=list)


def _forward(ctx: RankContext, ops) -> tuple[np.ndarray, list[int]]:
    psi = ctx.zero_state()
    per_gate = []
    for op, params in ops:
        if not isinstance(op, Gate):
            raise UnsupportedGateError("noise channels are not supported by the distributed backend")
        before = ctx.transport.stats["messages"]
        psi = ctx.apply(psi, op.matrix(params), op.wires, op.controls)
        per_gate.append(ctx.transport.stats["messages"] - before)
        if ctx.debug and ctx.is_global_gate(op.wires):
            ctx.check_norm(psi)
    return psi, per_gate


def _rank_job(transport, circuit: QubitCircuit, row, jobs: tuple[str, ...], threads: int, debug) -> RankReport:
    ctx = setup(transport, circuit.nqubit, threads, debug)
    try:
        ops = circuit.resolved(row)
        rep = RankReport(ctx.rank)
        psi, rep.gate_messages = _forward(ctx, ops)
        if "state" in jobs:
            rep.state = ctx.gather(psi)
        if "probs" in jobs:
            rep.probs = ctx.probabilities(psi)
        if "expectation" in jobs:
            rep.expvals = np.array([ctx.expectation(psi, o.wires, o.basis) for o in circuit.observables])
        if "gradient" in jobs:
            psi0 = ctx.zero_state()
            e, gp, gd = adjoint_differentiate(ops, psi0, circuit.observables, apply=ctx.apply, inner=ctx.inner)
            rep.expvals, rep.grad_params, rep.grad_data = e, gp, gd
        teardown(ctx)
    finally:
        ctx.close()
    rep.messages = transport.stats["messages"]
    rep.bytes = transport.stats["bytes"]
    return rep


class DistributedQubitCircuit(QubitCircuit):
    """Qubit circuit simulated on ``world_size`` ranks.

    Parameters
    ----------
    nqubit : int
    world_size : int
        Number of ranks (power of two, at most ``2**nqubit``).
    threads_per_rank : int
        Intra-rank worker threads for local kernels.
    transport : {"thread", "process"}
        In-process ranks (default) or spawned processes over sockets.
    debug : bool, optional
        Allreduce norm check after every global-qubit gate.

    Examples
    --------
    >>> cir = DistributedQubitCircuit(2, world_size=2)
    >>> _ = cir.h(0); _ = cir.cnot(0, 1)
    >>> np.round(cir.run()[0].real, 6).tolist()
    [0.707107, 0.0, 0.0, 0.707107]
    """

    def __init__(self, nqubit: int, world_size: int = 2, threads_per_rank: int = 1, transport: str = "thread",
                 debug: bool | None = None):
        super().__init__(nqubit)
        check_world(world_size, nqubit)
        self.world_size = int(world_size)
        self.threads_per_rank = int(threads_per_rank)
        self.transport = transport
        self.debug = debug
        self.last_reports: list[RankReport] = []

    def _launch(self, row, jobs) -> RankReport:
        reps = launch(self.world_size, _rank_job, self.as_qubit_circuit(), row, tuple(jobs), self.threads_per_rank,
                      self.debug, transport=self.transport)
        self.last_reports = reps
        return reps[0]

    def as_qubit_circuit(self) -> QubitCircuit:
        """A plain single-rank copy (used as the oracle and for pickling)."""
        c = QubitCircuit(self.nqubit)
        c.ops = list(self.ops)
        c.observables = list(self.observables)
        return c

    def _rows(self, data):
        rows = self._data_rows(data)
        return [None] if rows is None else list(rows)

    def run(self, data=None, state=None) -> np.ndarray:
        if state is not None:
            raise ValueError("the distributed backend starts from |0...0>")
        out = np.stack([self._launch(r, ("state",)).state for r in self._rows(data)])
        self._state = out
        return out

    __call__ = run

    @property
    def amps(self) -> np.ndarray:
        return self.state

    def probabilities(self, wires=None) -> np.ndarray:
        rep = self._launch(self._rows(None)[0], ("probs",))
        p = rep.probs
        if wires is None:
            return p[None]
        return st.probabilities(np.sqrt(p)[None].astype(complex), list(wires))

    def measure(self, shots: int = 1024, wires=None, with_prob: bool = False, seed=None, data=None):
        """Sample counts from probabilities aggregated at rank 0.

        Uses the same random stream as :meth:`QubitCircuit.measure`, so the
        histogram for a given seed matches a single-rank run.
        """
        wires = tuple(range(self.nqubit)) if wires is None else tuple(wires)
        out = []
        for row in self._rows(data):
            rep = self._launch(row, ("probs",))
            full = rep.probs
            probs = st.probabilities(np.sqrt(full)[None].astype(complex), list(wires))
            out.extend(st.sample_counts(probs, int(shots), len(wires), as_generator(seed, "qubit.measure"), with_prob))
        return out

    def expectation(self, observables=None, data=None) -> np.ndarray:
        if observables is not None:
            self.observables = list(observables)
        if not self.observables:
            raise ValueError("no observables registered")
        return np.stack([self._launch(r, ("expectation",)).expvals for r in self._rows(data)])

    def adjoint_gradient(self, data=None, observables=None, state=None):
        from ..qubit.circuit import Gradient

        if observables is not None:
            self.observables = list(observables)
        if not self.observables:
            raise ValueError("no observables registered")
        reps = [self._launch(r, ("gradient",)) for r in self._rows(data)]
        return Gradient(
            np.stack([r.expvals for r in reps]),
            np.stack([r.grad_params for r in reps]),
            np.stack([r.grad_data for r in reps]),
        )

    def message_counts(self) -> list[int]:
        """Messages sent per rank during the last job."""
        return [r.messages for r in self.last_reports]


def qft_circuit(nqubit: int, world_size: int | None = None, **kwargs) -> QubitCircuit:
    """QFT without final swaps: on each wire ``n``, ``H`` then ``CP(pi / 2**(k-1))`` from wires ``n+1 ...``.

    Returns a :class:`DistributedQubitCircuit` when ``world_size`` is given.
    """
    cir = QubitCircuit(nqubit) if world_size is None else DistributedQubitCircuit(nqubit, world_size, **kwargs)
    for n in range(nqubit):
        cir.h(n)
        k = 2
        for i in range(n, nqubit - 1):
            cir.cp(i + 1, n, np.pi / 2 ** (k - 1))
            k += 1
    return cir


# ------------------------------------------------------------------ Fock
def _fock_rank_job(transport, circuit, threads, debug):
    from ..photonic.fock import apply_fock_op

    d = circuit.cutoff
    R = transport.world_size
    block = -(-d // R)
    lo, hi = min(d, transport.rank * block), min(d, (transport.rank + 1) * block)
    full = circuit.initial_tensor()
    t = full[lo:hi].copy()
    per_op = []
    for op in circuit.ops:
        before = transport.stats["messages"]
        if op.name == "loss":
            raise UnsupportedGateError("loss channels are not supported by the distributed Fock backend")
        if 0 in op.wires:
            parts = {transport.rank: t}
            for peer in range(R):
                if peer != transport.rank:
                    parts[peer] = transport.exchange(peer, t)
            whole = np.concatenate([parts[r] for r in range(R)], axis=0)
            whole = apply_fock_op(whole, op, d)
            t = whole[lo:hi].copy()
        elif t.shape[0]:
            t = apply_fock_op(t, op, d)
        per_op.append(transport.stats["messages"] - before)
    parts = transport.gather(t)
    transport.barrier()
    result = None if parts is None else np.concatenate(parts, axis=0)
    return result, per_op, transport.stats["messages"]


class DistributedQumodeCircuit:
    """Fock-tensor circuit partitioned over the photon number of mode 0.

    Rank ``r`` owns a contiguous block of ``ceil(cutoff / R)`` values of the
    first mode's index.  Gates that avoid mode 0 are local; gates on mode 0
    swap blocks pairwise with every other rank first.

    Parameters
    ----------
    circuit : QumodeCircuit
        A tensor-mode circuit (``cutoff`` set) without loss.
    world_size : int
        At most ``cutoff`` ranks.
    """

    def __init__(self, circuit, world_size: int = 2, transport: str = "thread"):
        if circuit.cutoff is None:
            raise ValueError("the distributed Fock backend needs a cutoff")
        if not 1 <= world_size <= circuit.cutoff:
            raise ValueError("world size must lie between 1 and the cutoff")
        self.circuit = circuit
        self.world_size = int(world_size)
        self.transport = transport
        self.op_messages: list[int] = []
        self.messages: list[int] = []

    def run(self):
        """Gathered :class:`~qumulus.photonic.fock.FockTensorState`."""
        from ..photonic.fock import FockTensorState

        reps = launch(self.world_size, _fock_rank_job, self.circuit, 1, None, transport=self.transport)
        t, self.op_messages, _ = reps[0]
        self.messages = [r[2] for r in reps]
        loss = max(0.0, 1.0 - float(np.sum(np.abs(t) ** 2)))
        return FockTensorState(t, loss)

    __call__ = run
