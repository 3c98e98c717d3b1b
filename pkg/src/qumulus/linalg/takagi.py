"""Takagi (Autonne-Takagi) factorisation of complex symmetric matrices."""

from __future__ import annotations

import numpy as np

SYMMETRY_TOL = 1e-10
_DEGENERACY_RTOL = 1e-9


def _fix_column_signs(u: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column have a positive real part.

    Flipping the sign of a Takagi column leaves ``U diag(l) U^T`` unchanged, so
    this only removes an arbitrary choice.
    """
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        k = int(np.argmax(np.abs(col)))
        lead = col[k]
        if lead.real < 0 or (lead.real == 0 and lead.imag < 0):
            u[:, j] = -col
    return u


def _symmetric_unitary_sqrt(z: np.ndarray) -> np.ndarray:
    """Symmetric square root of a symmetric unitary matrix.

    A symmetric unitary has commuting real and imaginary parts, so it is
    diagonalised by a real orthogonal matrix ``O``; the root is
    ``O diag(exp(i arg/2)) O^T``.
    """
    if z.shape[0] == 1:
        return np.sqrt(z.astype(complex))
    gen = z.real + np.sqrt(2.0) * z.imag
    _, o = np.linalg.eigh(0.5 * (gen + gen.T))
    d = np.diag(o.T @ z @ o)
    return o @ np.diag(np.exp(0.5j * np.angle(d))) @ o.T


def takagi(a, *, tol: float = SYMMETRY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Factor a complex symmetric matrix as ``A = U diag(lam) U^T``.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Complex symmetric matrix (``|A - A^T| <= tol`` relative to ``max|A|``).
    tol : float, optional

    Returns
    -------
    lam : ndarray, shape (n,)
        Non-negative Takagi values, sorted in descending order.
    u : ndarray, shape (n, n)
        Unitary whose columns are the Takagi vectors.

    Raises
    ------
    ValueError
        If ``a`` is not square or not symmetric.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"takagi requires a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    if n and np.max(np.abs(a - a.T)) > tol * scale:
        raise ValueError("takagi requires a symmetric matrix")
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    a = 0.5 * (a + a.T)

    if np.allclose(a.imag, 0.0, atol=0.0):
        # real symmetric: eigen-decompose and absorb negative signs as factors of i
        evals, o = np.linalg.eigh(a.real)
        order = np.argsort(-np.abs(evals), kind="stable")
        evals, o = evals[order], o[:, order]
        phase = np.where(evals < 0, 1j, 1.0)
        return np.abs(evals), _fix_column_signs(o * phase[None, :])

    w, s, vh = np.linalg.svd(a)
    z = w.conj().T @ vh.T
    root = np.zeros_like(z)
    # Z is block diagonal on clusters of (numerically) equal singular values
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(s[stop] - s[start]) <= _DEGENERACY_RTOL * max(s[0], 1e-300):
            stop += 1
        block = z[start:stop, start:stop]
        block = 0.5 * (block + block.T)
        root[start:stop, start:stop] = _symmetric_unitary_sqrt(block)
        start = stop
    u = w @ root
    return s, _fix_column_signs(u)
