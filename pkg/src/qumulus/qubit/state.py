"""Index-striding kernels for batched state vectors and density matrices.

States carry a leading batch axis.  A pure state of ``n`` qubits is an array
of shape ``(B, 2**n)``; a mixed state has shape ``(B, 2**n, 2**n)``.  Wire 0
is the most significant bit of the basis index, so ``|q0 q1 ... q_{n-1}>``
has index ``sum_i q_i 2**(n-1-i)``.

Gates are applied by viewing the state as a rank-``n`` tensor and
contracting only the target axes, restricted to the slice in which every
control axis equals one; the full ``2**n`` matrix is never formed.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .gates import PAULI


def zero_state(nqubit: int, batch: int = 1, mixed: bool = False) -> np.ndarray:
    """``|0...0>`` (or its density matrix) for a batch."""
    dim = 2**nqubit
    if mixed:
        rho = np.zeros((batch, dim, dim), dtype=complex)
        rho[:, 0, 0] = 1.0
        return rho
    psi = np.zeros((batch, dim), dtype=complex)
    psi[:, 0] = 1.0
    return psi


def _apply_tensor(
    t: np.ndarray,
    m: np.ndarray,
    targets: Sequence[int],
    controls: Sequence[int],
    offset: int,
    nqubit: int,
    project: bool = False,
) -> np.ndarray:
    """Apply ``m`` to axes ``offset + targets`` of tensor ``t``.

    Axes ``offset .. offset + nqubit - 1`` of ``t`` are qubit axes.  If
    ``project`` is true, amplitudes outside the control-satisfied slice are set
    to zero instead of being left unchanged (used for derivative operators of
    controlled gates).
    """
    k = len(targets)
    idx: list = [slice(None)] * t.ndim
    for c in controls:
        idx[offset + c] = 1
    idx_t = tuple(idx)
    sub = t[idx_t]
    # positions of the target axes once the control axes are sliced away
    removed = sorted(offset + c for c in controls)

    def shifted(ax: int) -> int:
        return ax - sum(1 for r in removed if r < ax)

    tax = [shifted(offset + w) for w in targets]
    mt = np.asarray(m, dtype=complex).reshape((2,) * (2 * k))
    res = np.tensordot(mt, sub, axes=(list(range(k, 2 * k)), tax))
    res = np.moveaxis(res, list(range(k)), tax)
    out = np.zeros_like(t) if project else t.copy()
    out[idx_t] = res
    return out


def apply_matrix(
    state: np.ndarray,
    m: np.ndarray,
    targets: Sequence[int],
    controls: Sequence[int] = (),
    *,
    mixed: bool = False,
    project: bool = False,
) -> np.ndarray:
    """Apply a (possibly controlled) ``2^k x 2^k`` matrix to a batched state.

    Parameters
    ----------
    state : ndarray
        ``(B, 2**n)`` pure or ``(B, 2**n, 2**n)`` mixed batch.
    m : ndarray
        Matrix on ``targets`` (first target most significant).
    targets, controls : sequence of int
    mixed : bool
        Treat ``state`` as density matrices (``rho -> M rho M^dag``).
    project : bool
        Zero the control-unsatisfied slice (derivative operators).

    Returns
    -------
    ndarray, same shape as ``state``.
    """
    batch = state.shape[0]
    dim = state.shape[1]
    n = dim.bit_length() - 1
    if mixed:
        t = state.reshape((batch,) + (2,) * (2 * n))
        t = _apply_tensor(t, m, targets, controls, 1, n, project)
        t = _apply_tensor(t, np.conj(m), targets, controls, 1 + n, n, project)
        return t.reshape(state.shape)
    t = state.reshape((batch,) + (2,) * n)
    return _apply_tensor(t, m, targets, controls, 1, n, project).reshape(state.shape)


def apply_kraus(state: np.ndarray, kraus: Iterable[np.ndarray], wires: Sequence[int]) -> np.ndarray:
    """Apply a channel ``rho -> sum_k K rho K^dag`` on ``wires`` of a mixed batch."""
    batch, dim, _ = state.shape
    n = dim.bit_length() - 1
    t = state.reshape((batch,) + (2,) * (2 * n))
    out = np.zeros_like(t)
    for k in kraus:
        part = _apply_tensor(t, k, wires, (), 1, n)
        part = _apply_tensor(part, np.conj(k), wires, (), 1 + n, n)
        out += part
    return out.reshape(state.shape)


def check_kraus(kraus: Sequence[np.ndarray], tol: float = 1e-10) -> None:
    """Raise if ``sum_k K^dag K != I``."""
    acc = sum(np.conj(k).T @ k for k in kraus)
    err = np.max(np.abs(acc - np.eye(acc.shape[0])))
    if err > tol:
        raise ValueError(f"Kraus operators are not trace preserving (error {err:.3e})")


# ----------------------------------------------------------------------------
# standard channels


def bit_flip(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - p) * PAULI["i"], np.sqrt(p) * PAULI["x"]]


def phase_flip(p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - p) * PAULI["i"], np.sqrt(p) * PAULI["z"]]


def depolarizing(p: float) -> list[np.ndarray]:
    """``rho -> (1 - p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``."""
    return [np.sqrt(1 - p) * PAULI["i"]] + [np.sqrt(p / 3) * PAULI[c] for c in "xyz"]


def amplitude_damping(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def phase_damping(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, 0], [0, np.sqrt(gamma)]], dtype=complex),
    ]


CHANNELS = {
    "bit_flip": bit_flip,
    "phase_flip": phase_flip,
    "depolarizing": depolarizing,
    "amplitude_damping": amplitude_damping,
    "phase_damping": phase_damping,
}


# ----------------------------------------------------------------------------
# readout


def probabilities(state: np.ndarray, wires: Sequence[int] | None = None, *, mixed: bool = False) -> np.ndarray:
    """Marginal computational-basis probabilities, shape ``(B, 2**len(wires))``."""
    batch, dim = state.shape[0], state.shape[1]
    n = dim.bit_length() - 1
    if mixed:
        p = np.real(np.diagonal(state, axis1=1, axis2=2))
    else:
        p = np.abs(state) ** 2
    if wires is None:
        return p
    wires = list(wires)
    t = p.reshape((batch,) + (2,) * n)
    others = tuple(1 + q for q in range(n) if q not in wires)
    marg = t.sum(axis=others)
    # remaining axes are in increasing wire order; reorder to the requested order
    kept = sorted(wires)
    perm = [0] + [1 + kept.index(w) for w in wires]
    return np.transpose(marg, perm).reshape(batch, -1)


def sample_counts(
    probs: np.ndarray, shots: int, nbits: int, rng: np.random.Generator, with_prob: bool = False
) -> list[dict]:
    """Multinomial shot counts per batch row, keyed by bitstring."""
    out = []
    for row in probs:
        row = np.clip(np.real(row), 0.0, None)
        total = row.sum()
        if total <= 0:
            raise ValueError("cannot sample from a zero-norm state")
        counts = rng.multinomial(shots, row / total)
        res = {}
        for i in np.nonzero(counts)[0]:
            key = format(int(i), f"0{nbits}b") if nbits else ""
            res[key] = (int(counts[i]), float(row[i] / total)) if with_prob else int(counts[i])
        out.append(dict(sorted(res.items())))
    return out


def pauli_expectation(state: np.ndarray, wires: Sequence[int], basis: str, *, mixed: bool = False) -> np.ndarray:
    """``<P>`` for a Pauli string ``basis`` on ``wires``; returns shape ``(B,)``."""
    if len(basis) != len(wires):
        raise ValueError(f"basis {basis!r} does not match wires {tuple(wires)}")
    applied = state
    for w, c in zip(wires, basis.lower()):
        if c not in PAULI:
            raise ValueError(f"unknown Pauli {c!r}")
        applied = _apply_left(applied, PAULI[c], w, mixed)
    if mixed:
        return np.real(np.trace(applied, axis1=1, axis2=2))
    return np.real(np.einsum("bi,bi->b", np.conj(state), applied))


def _apply_left(state: np.ndarray, m: np.ndarray, wire: int, mixed: bool) -> np.ndarray:
    batch, dim = state.shape[0], state.shape[1]
    n = dim.bit_length() - 1
    if mixed:
        t = state.reshape((batch,) + (2,) * (2 * n))
        return _apply_tensor(t, m, [wire], (), 1, n).reshape(state.shape)
    t = state.reshape((batch,) + (2,) * n)
    return _apply_tensor(t, m, [wire], (), 1, n).reshape(state.shape)


def apply_pauli_string(state: np.ndarray, wires: Sequence[int], basis: str) -> np.ndarray:
    """``P |psi>`` for a pure batch."""
    out = state
    for w, c in zip(wires, basis.lower()):
        out = _apply_left(out, PAULI[c], w, False)
    return out
