"""Fock-basis matrix elements of Gaussian gates and linear-optical amplitudes.

Conventions
-----------
A passive network with mode-transfer matrix ``U`` acts as
``a_i^dag -> sum_j U[j, i] a_j^dag``: a single photon entering mode ``i``
leaves mode ``j`` with amplitude ``U[j, i]``.  The squeezer is
``S(r, phi) = exp((r e^{-i phi} a^2 - r e^{i phi} a^dag^2) / 2)`` (``phi = 0``
squeezes ``x``) and the displacement is ``D(alpha) = exp(alpha a^dag - alpha^* a)``.
"""

from __future__ import annotations

import itertools
from math import comb, factorial
from typing import Iterator, Sequence

import numpy as np

from ..errors import NumericalGuardError
from ..linalg import permanent


def fock_amplitude(u: np.ndarray, inp: Sequence[int], out: Sequence[int]) -> complex:
    """``<out| phi(U) |inp>`` for occupation patterns ``inp`` and ``out``.

    Equal to ``Per(U_st) / sqrt(prod n_i! prod m_j!)`` where ``U_st`` repeats
    row ``j`` of ``U`` ``out[j]`` times and column ``i`` ``inp[i]`` times.

    Parameters
    ----------
    u : ndarray, shape (m, m)
    inp, out : sequence of int, length m

    Returns
    -------
    complex
        Zero when the photon numbers differ.
    """
    inp = [int(x) for x in inp]
    out = [int(x) for x in out]
    u = np.asarray(u)
    if len(inp) != u.shape[1] or len(out) != u.shape[0]:
        raise ValueError("occupation patterns do not match the matrix size")
    if any(x < 0 for x in inp + out):
        raise ValueError("occupations must be non-negative")
    if sum(inp) != sum(out):
        return 0j
    rows = [j for j, m in enumerate(out) for _ in range(m)]
    cols = [i for i, n in enumerate(inp) for _ in range(n)]
    norm = np.sqrt(float(np.prod([factorial(x) for x in inp + out])))
    if not rows:
        return 1.0 + 0j
    return permanent(u[np.ix_(rows, cols)]) / norm


def patterns(nmode: int, nphoton: int) -> Iterator[tuple[int, ...]]:
    """All occupation patterns with ``nphoton`` photons, lexicographically descending."""
    def rec(k, left):
        if k == nmode - 1:
            yield (left,)
            return
        for n in range(left, -1, -1):
            for rest in rec(k + 1, left - n):
                yield (n,) + rest
    if nmode == 0:
        if nphoton == 0:
            yield ()
        return
    yield from rec(0, nphoton)


def n_outcomes(nmode: int, nphoton: int) -> int:
    """Number of occupation patterns, ``C(n + N - 1, n)``."""
    return comb(nphoton + nmode - 1, nphoton)


def fock_prob_distribution(
    u: np.ndarray, inp: Sequence[int], max_outcomes: int = 1_000_000
) -> dict[tuple[int, ...], float]:
    """Output distribution of ``phi(U)|inp>`` over all patterns (descending order).

    Raises
    ------
    NumericalGuardError
        If the number of outcomes exceeds ``max_outcomes``.
    """
    m = np.asarray(u).shape[0]
    count = n_outcomes(m, int(sum(inp)))
    if count > max_outcomes:
        raise NumericalGuardError(f"{count} output patterns exceed the limit of {max_outcomes}")
    return {p: abs(fock_amplitude(u, inp, p)) ** 2 for p in patterns(m, int(sum(inp)))}


def squeezing_matrix(r: float, phi: float, cutoff: int) -> np.ndarray:
    """``<m| S(r, phi) |n>`` for ``m, n < cutoff`` by a stable two-term recurrence."""
    s = np.zeros((cutoff, cutoff), dtype=complex)
    sq = np.sqrt(np.arange(cutoff, dtype=float))
    eth = np.exp(1j * phi) * np.tanh(r)
    sech = 1.0 / np.cosh(r)
    r00, r01, r11 = -eth, sech, np.conj(eth)
    s[0, 0] = np.sqrt(sech)
    for m in range(2, cutoff, 2):
        s[m, 0] = sq[m - 1] / sq[m] * r00 * s[m - 2, 0]
    for m in range(cutoff):
        for n in range(1, cutoff):
            if (m + n) % 2:
                continue
            val = 0j
            if n >= 2:
                val += sq[n - 1] / sq[n] * r11 * s[m, n - 2]
            if m >= 1:
                val += sq[m] / sq[n] * r01 * s[m - 1, n - 1]
            s[m, n] = val
    return s


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """``<m| D(alpha) |n>`` for ``m, n < cutoff``."""
    d = np.zeros((cutoff, cutoff), dtype=complex)
    sq = np.sqrt(np.arange(cutoff, dtype=float))
    d[0, 0] = np.exp(-0.5 * abs(alpha) ** 2)
    for m in range(1, cutoff):
        d[m, 0] = alpha / sq[m] * d[m - 1, 0]
    for n in range(1, cutoff):
        d[0, n] = -np.conj(alpha) / sq[n] * d[0, n - 1]
        d[1:, n] = (sq[1:] * d[:-1, n - 1] - np.conj(alpha) * d[1:, n - 1]) / sq[n]
    return d


def phase_matrix(phi: float, cutoff: int) -> np.ndarray:
    return np.diag(np.exp(1j * phi * np.arange(cutoff)))


def loss_kraus(transmissivity: float, cutoff: int) -> list[np.ndarray]:
    """Kraus operators of a pure-loss channel, ``K_k = sum_n sqrt(C(n,k) T^(n-k) (1-T)^k) |n-k><n|``."""
    t = float(transmissivity)
    if not 0.0 <= t <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    out = []
    for k in range(cutoff):
        m = np.zeros((cutoff, cutoff), dtype=complex)
        for n in range(k, cutoff):
            m[n - k, n] = np.sqrt(comb(n, k) * t ** (n - k) * (1 - t) ** k)
        out.append(m)
    return out


def kerr_matrix(kappa: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    return np.diag(np.exp(1j * kappa * n**2))


def passive_two_mode_blocks(u: np.ndarray, cutoff: int) -> list[np.ndarray]:
    """Photon-number blocks of a two-mode passive gate truncated at ``cutoff``.

    Block ``N`` is indexed by the mode-0 occupations ``(m0, n0)`` of output and
    input (mode 1 holds ``N - m0`` and ``N - n0``), restricted to values for
    which both modes stay below ``cutoff``.  Entries follow from
    ``sqrt(n_i) <m|G|n> = sum_k U[k, i] sqrt(m_k) <m - e_k|G|n - e_i>``.
    """
    u = np.asarray(u, dtype=complex)
    d = cutoff
    sq = np.sqrt(np.arange(d, dtype=float))
    m0 = np.arange(d)[:, None]
    prev = np.zeros((d, d), dtype=complex)
    prev[0, 0] = 1.0
    blocks = [prev[:1, :1].copy()]
    for N in range(1, 2 * d - 1):
        sm = sq[:, None]
        sn = np.sqrt(np.clip(N - m0, 0, None))
        p_m = np.zeros_like(prev)
        p_m[1:, :] = prev[:-1, :]
        cur = np.zeros_like(prev)
        # columns n0 >= 1: a photon is removed from input mode 0
        cur[:, 1:] = (u[0, 0] * sm * p_m[:, :-1] + u[1, 0] * sn * prev[:, :-1]) / sq[None, 1:]
        if N <= d - 1:
            # column n0 = 0: all N input photons sit in mode 1
            cur[:, 0] = (u[0, 1] * sq * p_m[:, 0] + u[1, 1] * sn[:, 0] * prev[:, 0]) / np.sqrt(N)
        lo, hi = max(0, N - d + 1), min(N, d - 1)
        mask = np.zeros(d, dtype=bool)
        mask[lo : hi + 1] = True
        cur[~mask, :] = 0.0
        cur[:, ~mask] = 0.0
        blocks.append(cur[lo : hi + 1, lo : hi + 1].copy())
        prev = cur
    return blocks


def passive_two_mode_matrix(u: np.ndarray, cutoff: int) -> np.ndarray:
    """Dense ``(cutoff^2, cutoff^2)`` matrix of a two-mode passive gate."""
    d = cutoff
    full = np.zeros((d, d, d, d), dtype=complex)
    for N, blk in enumerate(passive_two_mode_blocks(u, d)):
        lo, hi = max(0, N - d + 1), min(N, d - 1)
        idx = np.arange(lo, hi + 1)
        full[idx[:, None], N - idx[:, None], idx[None, :], N - idx[None, :]] = blk
    return full.reshape(d * d, d * d)


def basis_index(pattern: Sequence[int], cutoff: int) -> tuple[int, ...]:
    """Validate a pattern against a cutoff and return it as a tensor index."""
    idx = tuple(int(x) for x in pattern)
    if any(x < 0 or x >= cutoff for x in idx):
        raise ValueError(f"pattern {idx} exceeds cutoff {cutoff}")
    return idx


def all_patterns_upto(nmode: int, cutoff: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(cutoff), repeat=nmode)
