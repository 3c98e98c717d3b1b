"""Wigner functions of single-mode Fock-basis density matrices.

Uses the Laguerre-polynomial three-term recurrence for the phase-space
functions ``W_mn(x, p)`` so that nothing is built from factorials; this is
stable for cutoffs in the hundreds.  Quadratures follow ``x = sqrt(hbar/2)
(a + a^dag)`` with ``hbar = 2`` by default, so the vacuum has variance 1.
"""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np


def wigner_fock(rho: np.ndarray, xvec: Sequence[float], pvec: Sequence[float], hbar: float = 2.0) -> np.ndarray:
    """Wigner function of a single-mode density matrix (or ket) on a grid.

    Parameters
    ----------
    rho : ndarray, shape (d, d) or (d,)
        Density matrix in the Fock basis, or a state vector.
    xvec, pvec : sequence of float
    hbar : float

    Returns
    -------
    ndarray, shape (len(pvec), len(xvec))
        ``W[i, j] = W(xvec[j], pvec[i])``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    d = rho.shape[0]
    x, p = np.meshgrid(np.asarray(xvec, float), np.asarray(pvec, float))
    a = (x + 1j * p) / np.sqrt(2 * hbar)
    two_a = 2 * a
    # row[n] holds W_{m n} for the current m; start with m = 0.
    row = [np.exp(-2 * np.abs(a) ** 2) / np.pi]
    for n in range(1, d):
        row.append(two_a * row[n - 1] / np.sqrt(n))
    w = np.real(rho[0, 0]) * np.real(row[0])
    for n in range(1, d):
        w += 2 * np.real(rho[0, n] * row[n])
    for m in range(1, d):
        sm = np.sqrt(m)
        prev_row = row
        row = [None] * d
        row[m] = (np.conj(two_a) * prev_row[m] - sm * prev_row[m - 1]) / sm
        w += np.real(rho[m, m] * row[m])
        for n in range(m + 1, d):
            row[n] = (two_a * row[n - 1] - sm * prev_row[n - 1]) / np.sqrt(n)
            w += 2 * np.real(rho[m, n] * row[n])
        for k in range(m):
            row[k] = None
    return w / hbar


def marginal_x(w: np.ndarray, pvec: Sequence[float]) -> np.ndarray:
    """Integrate a gridded Wigner function over ``p`` (trapezoid rule)."""
    return np.trapezoid(w, np.asarray(pvec, float), axis=0)


def write_csv(path, xvec: Sequence[float], pvec: Sequence[float], w: np.ndarray) -> None:
    """Write ``(x, p, W)`` rows for a gridded Wigner function."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["x", "p", "W"])
        for i, pv in enumerate(pvec):
            for j, xv in enumerate(xvec):
                out.writerow([f"{xv:.10g}", f"{pv:.10g}", f"{w[i, j]:.10g}"])
