"""Symplectic-form helpers in ``xxpp`` quadrature ordering.

For ``m`` modes the quadrature vector is ``(x_1, ..., x_m, p_1, ..., p_m)``
and the symplectic form is ``Omega = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def omega(nmode: int) -> np.ndarray:
    """Symplectic form for ``nmode`` modes."""
    eye = np.eye(nmode)
    zero = np.zeros((nmode, nmode))
    return np.block([[zero, eye], [-eye, zero]])


def is_symplectic(s: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether ``S Omega S^T = Omega`` holds to ``tol``."""
    s = np.asarray(s)
    n = s.shape[0] // 2
    om = omega(n)
    return bool(np.max(np.abs(s @ om @ s.T - om)) <= tol)


def xxpp_to_xpxp(nmode: int) -> np.ndarray:
    """Permutation matrix ``P`` with ``xpxp = P @ xxpp``."""
    p = np.zeros((2 * nmode, 2 * nmode))
    for i in range(nmode):
        p[2 * i, i] = 1.0
        p[2 * i + 1, nmode + i] = 1.0
    return p


def expand(s: np.ndarray, modes: Sequence[int], nmode: int) -> np.ndarray:
    """Embed a symplectic on ``len(modes)`` modes into ``nmode`` modes (identity elsewhere)."""
    s = np.asarray(s)
    k = len(modes)
    if s.shape != (2 * k, 2 * k):
        raise ValueError(f"symplectic of shape {s.shape} does not act on {k} modes")
    idx = np.concatenate([np.asarray(modes), np.asarray(modes) + nmode])
    out = np.eye(2 * nmode, dtype=s.dtype)
    out[np.ix_(idx, idx)] = s
    return out


def interferometer(u: np.ndarray) -> np.ndarray:
    """Symplectic of a passive linear-optical unitary ``U`` (``a -> U a``)."""
    u = np.asarray(u, dtype=complex)
    re, im = u.real, u.imag
    return np.block([[re, -im], [im, re]])


def squeezing(r: float, phi: float = 0.0) -> np.ndarray:
    """Single-mode squeezer ``S(r, phi)``; ``phi = 0`` gives ``diag(e^-r, e^r)``."""
    ch, sh = np.cosh(r), np.sinh(r)
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[ch - c * sh, -s * sh], [-s * sh, ch + c * sh]])


def rotation(phi: float) -> np.ndarray:
    """Phase rotation ``a -> e^{i phi} a``."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def beamsplitter_unitary(theta: float, phi: float = 0.0) -> np.ndarray:
    """Mode-transfer matrix of a beam splitter.

    ``[[cos(theta), -e^{-i phi} sin(theta)], [e^{i phi} sin(theta), cos(theta)]]``
    """
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]], dtype=complex)


def complex_basis_change(nmode: int) -> np.ndarray:
    """Matrix ``W`` mapping ``(x, p)/sqrt(hbar)`` to ``(a, a^dag)`` (both ``xxpp``-blocked)."""
    eye = np.eye(nmode)
    return np.block([[eye, 1j * eye], [eye, -1j * eye]]) / np.sqrt(2.0)
