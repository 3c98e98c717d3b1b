"""Partitioned state-vector kernels.

With ``R = 2**g`` ranks the top ``g`` wires (wires ``0 .. g-1``, the most
significant bits) are *global*: rank ``r`` owns the ``2**(n-g)`` amplitudes
whose top bits spell ``r``.  The remaining wires are local.

* Gates whose targets are all local run on the slice with no communication.
  A control on a global wire is resolved from the rank id: ranks where it is
  ``0`` skip the gate, the others drop the control.
* A gate with ``k`` global targets needs the ``2**k`` slices that differ only
  in those bits; the group swaps slices pairwise (ascending partner order,
  lower rank sends first), every member applies the gate to the assembled
  block, and keeps its own part.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Sequence

import numpy as np

from ..errors import NumericalGuardError, TransportError
from ..qubit import state as st
from ..qubit.gates import PAULI
from .transport import Transport, ordered_partners

ENV_DEBUG = "QUMULUS_DIST_DEBUG"
MAX_GATHER_QUBITS = 26


class RankContext:
    """One rank's view: id, world size, transport and intra-rank threads.

    Parameters
    ----------
    transport : Transport
    nqubit : int
    threads : int
        Worker threads for local gate kernels.
    debug : bool, optional
        Have the circuit runners check the global norm after every
        global-qubit gate; defaults to the ``QUMULUS_DIST_DEBUG`` environment
        variable.
    """

    def __init__(self, transport: Transport, nqubit: int, threads: int = 1, debug: bool | None = None):
        R = transport.world_size
        if R & (R - 1):
            raise ValueError(f"world size must be a power of two, got {R}")
        g = R.bit_length() - 1
        if g > nqubit:
            raise ValueError(f"{R} ranks need at least {g} qubits")
        self.transport = transport
        self.rank = transport.rank
        self.world_size = R
        self.nqubit = int(nqubit)
        self.nglobal = g
        self.nlocal = self.nqubit - g
        self.threads = max(1, int(threads))
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        if debug is None:
            debug = os.environ.get(ENV_DEBUG, "") not in ("", "0")
        self.debug = bool(debug)
        self.global_gates = 0

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    # ------------------------------------------------------------ layout
    def bit(self, wire: int, rank: int | None = None) -> int:
        """Value of global ``wire`` on ``rank`` (default: this rank)."""
        r = self.rank if rank is None else rank
        return (r >> (self.nglobal - 1 - wire)) & 1

    def with_bits(self, wires: Sequence[int], bits: Sequence[int]) -> int:
        r = self.rank
        for w, b in zip(wires, bits):
            shift = self.nglobal - 1 - w
            r = (r & ~(1 << shift)) | (int(b) << shift)
        return r

    def zero_state(self) -> np.ndarray:
        psi = np.zeros((1, 2**self.nlocal), dtype=complex)
        if self.rank == 0:
            psi[0, 0] = 1.0
        return psi

    def scatter(self, dense: np.ndarray) -> np.ndarray:
        """This rank's slice of a full state vector."""
        dense = np.asarray(dense, dtype=complex).reshape(-1)
        L = 2**self.nlocal
        return dense[self.rank * L : (self.rank + 1) * L].reshape(1, L).copy()

    # ------------------------------------------------------------ kernels
    def _local(self, psi, m, targets, controls, project):
        if self._pool is None or self.nlocal < 12:
            return st.apply_matrix(psi, m, targets, controls, project=project)
        busy = set(targets) | set(controls)
        free = [a for a in range(self.nlocal) if a not in busy]
        nsplit = min(int(math.log2(self.threads)), len(free))
        if nsplit == 0:
            return st.apply_matrix(psi, m, targets, controls, project=project)
        split = free[:nsplit]
        t = psi.reshape((2,) * self.nlocal)
        out = np.empty_like(t)

        def remap(ax):
            return ax - sum(1 for s in split if s < ax)

        tt = [remap(a) for a in targets]
        cc = [remap(a) for a in controls]

        def work(bits):
            idx = [slice(None)] * self.nlocal
            for a, b in zip(split, bits):
                idx[a] = b
            idx = tuple(idx)
            sub = t[idx].reshape(1, -1)
            out[idx] = st.apply_matrix(sub, m, tt, cc, project=project).reshape(t[idx].shape)

        list(self._pool.map(work, product((0, 1), repeat=nsplit)))
        return out.reshape(psi.shape)

    def apply(self, psi: np.ndarray, m: np.ndarray, wires: Sequence[int], controls: Sequence[int] = (),
              project: bool = False) -> np.ndarray:
        """Apply a (controlled) gate to this rank's slice ``psi`` of shape ``(1, 2**nlocal)``."""
        g = self.nglobal
        local_controls = []
        for c in controls:
            if c < g:
                if self.bit(c) == 0:
                    return np.zeros_like(psi) if project else psi
            else:
                local_controls.append(c - g)
        gt = [w for w in wires if w < g]
        if not gt:
            return self._local(psi, m, [w - g for w in wires], local_controls, project)
        # assemble the block spanned by the global targets
        k = len(gt)
        members = {}
        for bits in product((0, 1), repeat=k):
            members[bits] = self.with_bits(gt, bits)
        mine = tuple(self.bit(w) for w in gt)
        slices = {self.rank: psi}
        for peer in ordered_partners(self.rank, members.values()):
            slices[peer] = np.asarray(self.transport.exchange(peer, psi))
        block = np.concatenate([slices[members[b]] for b in product((0, 1), repeat=k)], axis=1)
        vt = [gt.index(w) if w < g else k + w - g for w in wires]
        vc = [k + c for c in local_controls]
        block = st.apply_matrix(block, m, vt, vc, project=project)
        pos = int("".join(map(str, mine)), 2)
        L = psi.shape[1]
        out = block[:, pos * L : (pos + 1) * L].copy()
        self.global_gates += 1
        return out

    def is_global_gate(self, wires: Sequence[int]) -> bool:
        return any(w < self.nglobal for w in wires)

    def check_norm(self, psi: np.ndarray, tol: float = 1e-10) -> float:
        """Collective norm check (debug mode); every rank must call it."""
        n2 = self.norm2(psi)
        if abs(n2 - 1.0) > tol:
            raise NumericalGuardError(f"rank {self.rank}: norm drifted to {n2!r}")
        return n2

    # ----------------------------------------------------------- reductions
    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        """Global ``<a|b>`` (allreduced in rank order)."""
        return complex(self.transport.allreduce(complex(np.vdot(a, b))))

    def norm2(self, psi: np.ndarray) -> float:
        return float(self.transport.allreduce(float(np.vdot(psi, psi).real)))

    def gather(self, psi: np.ndarray) -> np.ndarray | None:
        """Full state vector at rank 0 (``None`` elsewhere)."""
        if self.nqubit > MAX_GATHER_QUBITS:
            raise NumericalGuardError(f"refusing to gather 2**{self.nqubit} amplitudes on one rank")
        parts = self.transport.gather(np.asarray(psi).reshape(-1))
        if parts is None:
            return None
        return np.concatenate(parts)

    def probabilities(self, psi: np.ndarray, wires: Sequence[int] | None = None) -> np.ndarray | None:
        """Marginal probabilities over ``wires`` (wire order), summed at rank 0."""
        wires = list(range(self.nqubit)) if wires is None else [int(w) for w in wires]
        g = self.nglobal
        p = (np.abs(psi.reshape(-1)) ** 2).reshape((2,) * self.nlocal) if self.nlocal else np.abs(psi.reshape(())) ** 2
        lw = [w - g for w in wires if w >= g]
        drop = tuple(a for a in range(self.nlocal) if a not in lw)
        marg = p.sum(axis=drop) if drop else p
        keep = sorted(lw)
        marg = np.transpose(marg, [keep.index(a) for a in lw]) if lw else marg
        out = np.zeros((2,) * len(wires))
        idx = tuple(self.bit(w) if w < g else slice(None) for w in wires)
        out[idx] = marg
        parts = self.transport.gather(out.reshape(-1))
        if parts is None:
            return None
        acc = parts[0].copy()
        for q in parts[1:]:
            acc = acc + q
        return acc

    def expectation(self, psi: np.ndarray, wires: Sequence[int], basis: str) -> float:
        """Global Pauli-string expectation (identical on every rank)."""
        lam = psi
        for w, c in zip(wires, basis):
            if c != "i":
                lam = self.apply(lam, PAULI[c], (w,), ())
        return self.inner(psi, lam).real


def check_world(world_size: int, nqubit: int) -> None:
    if world_size < 1 or world_size & (world_size - 1):
        raise ValueError(f"world size must be a power of two, got {world_size}")
    if world_size > 2**nqubit:
        raise ValueError(f"world size {world_size} exceeds 2**{nqubit} amplitudes")


def setup(transport: Transport, nqubit: int, threads: int = 1, debug: bool | None = None) -> RankContext:
    """Create the rank context and pass a collective barrier."""
    ctx = RankContext(transport, nqubit, threads, debug)
    try:
        transport.barrier()
    except TransportError:
        ctx.close()
        raise
    return ctx


def teardown(ctx: RankContext) -> None:
    """Final barrier, then release thread pools and sockets."""
    try:
        ctx.transport.barrier()
    finally:
        ctx.close()
