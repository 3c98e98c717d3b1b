"""Pure-Python (numpy-vectorised) versions of the matrix-function kernels.

These mirror :mod:`qumulus.linalg._kernels` exactly in algorithm, so the two
agree to rounding, and are used whenever the compiled module is unavailable.
"""

from __future__ import annotations

import itertools

import numpy as np

_CHUNK = 1 << 14


def _gray_blocks(n: int):
    """Yield (flipped column, add/subtract sign, parity) for Gray steps 1 .. 2^n - 1."""
    total = 1 << n
    for start in range(1, total, _CHUNK):
        k = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        j = np.log2(k & (~k + np.uint64(1))).astype(np.intp)
        gray = k ^ (k >> np.uint64(1))
        sign = np.where((gray >> j.astype(np.uint64)) & np.uint64(1), 1.0, -1.0)
        parity = np.bitwise_count(gray) & 1
        yield j, sign, parity


def permanent(a: np.ndarray) -> complex:
    """Ryser permanent with Gray-code ordering, vectorised over chunks of steps."""
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    rowsum = np.zeros(n, dtype=complex)
    total = 0.0 + 0j
    for j, sign, parity in _gray_blocks(n):
        deltas = sign[:, None] * a.T[j]
        sums = rowsum + np.cumsum(deltas, axis=0)
        prods = np.prod(sums, axis=1)
        total += np.sum(np.where(parity, -prods, prods))
        rowsum = sums[-1]
    return complex(-total if n % 2 else total)


def _pair_subsets(m: int):
    """Group non-empty subsets of ``range(m)`` by size."""
    for size in range(1, m + 1):
        yield size, np.array(list(itertools.combinations(range(m), size)), dtype=np.intp)


def hafnian(a: np.ndarray) -> complex:
    """Power-trace hafnian; traces of powers come from stacked eigenvalues."""
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    m = n // 2
    total = 0.0 + 0j
    for size, subsets in _pair_subsets(m):
        idx = np.stack([2 * subsets, 2 * subsets + 1], axis=2).reshape(len(subsets), 2 * size)
        swapped = idx.reshape(len(subsets), size, 2)[:, :, ::-1].reshape(len(subsets), 2 * size)
        c = a[idx[:, :, None], swapped[:, None, :]]
        ev = np.linalg.eigvals(c)
        powers = ev[:, :, None] ** np.arange(1, m + 1)[None, None, :]
        tr = powers.sum(axis=1)
        coef = np.zeros((len(subsets), m + 1), dtype=complex)
        coef[:, 0] = 1.0
        for k in range(1, m + 1):
            coef[:, k] = np.sum(tr[:, :k][:, ::-1] * coef[:, :k], axis=1) / (2.0 * k)
        sign = -1.0 if (m - size) % 2 else 1.0
        total += sign * coef[:, m].sum()
    return complex(total)


def torontonian(o: np.ndarray) -> complex:
    """Inclusion-exclusion torontonian with stacked determinants per subset size."""
    n = o.shape[0]
    if n == 0:
        return 1.0 + 0j
    m = n // 2
    total = (-1.0) ** m + 0j
    for size, subsets in _pair_subsets(m):
        idx = np.concatenate([subsets, subsets + m], axis=1)
        sub = o[idx[:, :, None], idx[:, None, :]]
        det = np.linalg.det(np.eye(2 * size) - sub)
        sign = -1.0 if (m - size) % 2 else 1.0
        total += sign * np.sum(1.0 / np.sqrt(det.astype(complex)))
    return complex(total)
