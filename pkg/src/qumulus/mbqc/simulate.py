"""State-vector execution of measurement patterns.

Only the nodes that are currently alive are held in memory.  ``N`` and ``E``
commands are deferred: a node is allocated when it is first needed, and a
pending ``CZ`` is applied just before any non-``E`` command touches one of its
endpoints (``CZ`` gates commute with each other and with everything acting on
other nodes).  For a standard pattern this keeps the live register close to
the width of the simulated circuit instead of the size of the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import NumericalGuardError, PatternError
from ..rng import as_generator
from .pattern import E, M, N, Pattern, X, Z

_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
_PX = np.array([[0, 1], [1, 0]], dtype=complex)
_PZ = np.array([[1, 0], [0, -1]], dtype=complex)


def measurement_basis(plane: str, angle: float) -> np.ndarray:
    """Rows are the bras of outcome 0 and outcome 1."""
    if plane == "XY":
        b0 = np.array([1.0, np.exp(1j * angle)]) / np.sqrt(2)
        b1 = np.array([1.0, -np.exp(1j * angle)]) / np.sqrt(2)
    elif plane == "YZ":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        b0 = np.array([c, 1j * s])
        b1 = np.array([s, -1j * c])
    elif plane == "ZX":
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        b0 = np.array([c, s])
        b1 = np.array([s, -c])
    else:
        raise PatternError(f"unknown measurement plane {plane!r}")
    return np.stack([b0, b1]).conj()


@dataclass
class GraphStateResult:
    """Outcome of executing a pattern.

    Attributes
    ----------
    nodes : tuple of int
        Remaining (output) node labels; axis order of :attr:`full_state`.
    full_state : ndarray
        Normalized amplitudes over ``nodes``; the first node is the most
        significant bit.
    outcomes : dict
        Recorded outcome (0/1) of every measured node, keyed by node.
    probability : float
        Probability of the recorded branch.
    """

    nodes: tuple[int, ...]
    full_state: np.ndarray
    outcomes: dict[int, int] = field(default_factory=dict)
    probability: float = 1.0


class _Register:
    """Dense tensor over a dynamic list of node labels."""

    def __init__(self, nodes: Sequence[int], state: np.ndarray):
        self.labels: list[int] = list(nodes)
        self.t = state.reshape((2,) * len(self.labels)) if self.labels else state.reshape(())

    def axis(self, node: int) -> int:
        return self.labels.index(node)

    def add_plus(self, node: int) -> None:
        self.t = np.multiply.outer(self.t, _PLUS)
        self.labels.append(node)

    def apply1(self, node: int, m: np.ndarray) -> None:
        ax = self.axis(node)
        self.t = np.moveaxis(np.tensordot(m, self.t, axes=([1], [ax])), 0, ax)

    def cz(self, i: int, j: int) -> None:
        a, b = self.axis(i), self.axis(j)
        idx = [slice(None)] * self.t.ndim
        idx[a] = 1
        idx[b] = 1
        self.t = self.t.copy()
        self.t[tuple(idx)] *= -1

    def ordered(self, order: Sequence[int]) -> np.ndarray:
        perm = [self.labels.index(o) for o in order]
        return np.transpose(self.t, perm).reshape(-1) if perm else self.t.reshape(1)


def _parity(dom, outcomes: Mapping[int, int]) -> int:
    return sum(outcomes[d] for d in dom) & 1


def execute(
    pattern: Pattern,
    input_state=None,
    seed=None,
    outcomes: Mapping[int, int] | Sequence[int] | None = None,
) -> GraphStateResult:
    """Run a pattern on a state-vector simulator.

    Parameters
    ----------
    pattern : Pattern
    input_state : array_like, optional
        Amplitudes over ``pattern.inputs`` (first input most significant).
        Defaults to ``|+>`` on every input.
    seed : int or numpy.random.Generator, optional
        Source of Born-rule outcomes.
    outcomes : mapping or sequence, optional
        Forced outcomes, keyed by node or listed in measurement order.  Nodes
        that are not listed are sampled.  Forcing a branch of probability
        zero raises :class:`NumericalGuardError`.

    Returns
    -------
    GraphStateResult
    """
    nin = len(pattern.inputs)
    if input_state is None:
        psi = np.ones(2**nin, dtype=complex) / np.sqrt(2**nin)
    else:
        psi = np.asarray(input_state, dtype=complex).reshape(-1)
        if psi.size != 2**nin:
            raise ValueError(f"input state must have {2**nin} amplitudes, got {psi.size}")
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise NumericalGuardError("input state has zero norm")
        psi = psi / nrm
    if outcomes is not None and not isinstance(outcomes, Mapping):
        outcomes = dict(zip(pattern.measured, outcomes))
    forced = dict(outcomes or {})
    rng = None

    reg = _Register(pattern.inputs, psi)
    deferred_n: set[int] = set()
    pending_e: list[tuple[int, int]] = []
    record: dict[int, int] = {}
    prob = 1.0

    def realize(node: int) -> None:
        if node in deferred_n:
            deferred_n.discard(node)
            reg.add_plus(node)

    def flush(node: int | None) -> None:
        keep = []
        for i, j in pending_e:
            if node is None or node in (i, j):
                realize(i)
                realize(j)
                reg.cz(i, j)
            else:
                keep.append((i, j))
        pending_e[:] = keep

    for cmd in pattern.commands:
        if isinstance(cmd, N):
            deferred_n.add(cmd.node)
        elif isinstance(cmd, E):
            pending_e.append((cmd.i, cmd.j))
        else:
            flush(cmd.node)
            realize(cmd.node)
            if isinstance(cmd, X):
                if _parity(cmd.domain, record):
                    reg.apply1(cmd.node, _PX)
            elif isinstance(cmd, Z):
                if _parity(cmd.domain, record):
                    reg.apply1(cmd.node, _PZ)
            elif isinstance(cmd, M):
                if _parity(cmd.t_domain, record):
                    reg.apply1(cmd.node, _PZ)
                if _parity(cmd.s_domain, record):
                    reg.apply1(cmd.node, _PX)
                bras = measurement_basis(cmd.plane, cmd.angle)
                ax = reg.axis(cmd.node)
                branches = np.tensordot(bras, reg.t, axes=([1], [ax]))
                norm = float(np.sum(np.abs(branches[0]) ** 2))
                total = float(np.sum(np.abs(branches) ** 2))
                p0 = norm / total
                if cmd.node in forced:
                    out = int(forced[cmd.node])
                    if out not in (0, 1):
                        raise ValueError(f"forced outcome for node {cmd.node} must be 0 or 1")
                else:
                    if rng is None:
                        rng = as_generator(seed, "mbqc.execute")
                    out = 0 if rng.random() < p0 else 1
                p = p0 if out == 0 else 1.0 - p0
                if p < 1e-14:
                    raise NumericalGuardError(
                        f"outcome {out} on node {cmd.node} has probability {p:.3g}; branch collapsed"
                    )
                prob *= p
                reg.t = branches[out] / np.sqrt(p * total)
                del reg.labels[ax]
                record[cmd.node] = out
    flush(None)
    for node in sorted(deferred_n):
        realize(node)

    order = pattern.outputs
    state = reg.ordered(order)
    state = state / np.linalg.norm(state)
    return GraphStateResult(tuple(order), state, record, prob)
