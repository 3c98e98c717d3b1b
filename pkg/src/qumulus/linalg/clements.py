"""Rectangular-mesh (Clements) decomposition of unitary interferometers.

Convention
----------
A Mach-Zehnder interferometer on adjacent modes ``(k, k+1)`` applies a phase
``phi`` to the upper input, then a symmetric 50:50 splitter, an internal phase
``2 * theta`` on the upper arm and a second symmetric 50:50 splitter::

    T(theta, phi) = i e^{i theta} [[e^{i phi} sin(theta),  cos(theta)],
                                   [e^{i phi} cos(theta), -sin(theta)]]

``theta = pi/2`` is the bar (pass-through) setting and ``theta = 0`` the cross
setting.  With ``phi = pi`` a bar MZI is exactly the identity.  Matrices act
on column vectors of mode amplitudes, so the mesh unitary is
``diag(exp(i * output_phases)) @ T_last @ ... @ T_first``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNITARY_TOL = 1e-10
_ZERO = 1e-14
_SNAP = 1e-12


@dataclass(frozen=True)
class MZI:
    """One Mach-Zehnder cell acting on modes ``(mode, mode + 1)``."""

    mode: int
    theta: float
    phi: float

    def matrix(self) -> np.ndarray:
        """The 2x2 transfer matrix of this cell."""
        return mzi_matrix(self.theta, self.phi)


@dataclass
class ClementsMesh:
    """Result of :func:`clements_decompose`.

    Attributes
    ----------
    nmode : int
    mzis : list of MZI
        Cells in the order light traverses them.
    output_phases : ndarray, shape (nmode,)
        Final phase screen, in radians.
    """

    nmode: int
    mzis: list[MZI] = field(default_factory=list)
    output_phases: np.ndarray = field(default_factory=lambda: np.zeros(0))


def mzi_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 transfer matrix of an MZI with internal phase ``2*theta`` and input phase ``phi``."""
    s, c = np.sin(theta), np.cos(theta)
    e = np.exp(1j * phi)
    return 1j * np.exp(1j * theta) * np.array([[e * s, c], [e * c, -s]], dtype=complex)


def _check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > UNITARY_TOL:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")


def _null_from_right(u: np.ndarray, row: int, col: int) -> tuple[float, float]:
    """Angles of T such that ``(u @ T^dag)[row, col] = 0`` on columns (col, col+1)."""
    a, b = u[row, col], u[row, col + 1]
    if abs(a) < _ZERO:
        return np.pi / 2, np.pi
    if abs(b) < _ZERO:
        return 0.0, 0.0
    theta = np.arctan2(abs(b), abs(a))
    phi = -np.angle(-b / a)
    return float(theta), float(phi)


def _null_from_left(u: np.ndarray, row: int, col: int) -> tuple[float, float]:
    """Angles of T such that ``(T @ u)[row + 1, col] = 0`` on rows (row, row+1)."""
    a, b = u[row, col], u[row + 1, col]
    if abs(b) < _ZERO:
        return np.pi / 2, np.pi
    if abs(a) < _ZERO:
        return 0.0, 0.0
    theta = np.arctan2(abs(a), abs(b))
    phi = np.angle(b / a)
    return float(theta), float(phi)


def _split_diag_mzi(w: np.ndarray) -> tuple[complex, complex, float, float]:
    """Write a 2x2 unitary as ``diag(d0, d1) @ T(theta, phi)``."""
    theta = float(np.arctan2(abs(w[0, 0]), abs(w[0, 1])))
    if np.cos(theta) < _SNAP:
        theta = np.pi / 2
    elif np.sin(theta) < _SNAP:
        theta = 0.0
    pre = 1j * np.exp(1j * theta)
    s, c = np.sin(theta), np.cos(theta)
    if theta == np.pi / 2:
        # bar cell: the input phase is free, pick the value that makes T = I
        phi = np.pi
        d0 = w[0, 0] / (pre * np.exp(1j * phi))
        d1 = -w[1, 1] / pre
    elif theta == 0.0:
        phi = 0.0
        d0 = w[0, 1] / pre
        d1 = w[1, 0] / pre
    else:
        d0 = w[0, 1] / (pre * c)
        phi = float(np.angle(w[0, 0] / (d0 * pre * s)))
        d1 = -w[1, 1] / (pre * s)
    return complex(d0), complex(d1), theta, phi


def _embed(t: np.ndarray, mode: int, n: int) -> np.ndarray:
    full = np.eye(n, dtype=complex)
    full[mode : mode + 2, mode : mode + 2] = t
    return full


def clements_decompose(u) -> ClementsMesh:
    """Decompose an ``m x m`` unitary into ``m(m-1)/2`` MZIs and output phases.

    Parameters
    ----------
    u : array_like, shape (m, m)
        Unitary to within ``1e-10``.

    Returns
    -------
    ClementsMesh

    Raises
    ------
    ValueError
        If ``u`` is not square or not unitary.
    """
    u = np.array(u, dtype=complex)
    _check_unitary(u)
    n = u.shape[0]
    right: list[MZI] = []
    left: list[MZI] = []
    work = u.copy()
    for i in range(n - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, col = n - 1 - j, i - j
                theta, phi = _null_from_right(work, row, col)
                t = _embed(mzi_matrix(theta, phi), col, n)
                work = work @ t.conj().T
                right.append(MZI(col, theta, phi))
        else:
            for j in range(i + 1):
                row, col = n - 2 - i + j, j
                theta, phi = _null_from_left(work, row, col)
                t = _embed(mzi_matrix(theta, phi), row, n)
                work = t @ work
                left.append(MZI(row, theta, phi))
    diag = np.diag(work).copy()
    # work = L_p..L_1 U R_1^dag..R_q^dag  =>  U = L_1^dag..L_p^dag D R_q..R_1
    moved: list[MZI] = []
    for cell in reversed(left):
        k = cell.mode
        w = cell.matrix().conj().T @ np.diag(diag[k : k + 2])
        d0, d1, theta, phi = _split_diag_mzi(w)
        diag[k], diag[k + 1] = d0, d1
        moved.append(MZI(k, theta, phi))
    # U = D' M'_1 .. M'_p R_q .. R_1 ; moved holds M'_p first
    mzis = right + moved
    return ClementsMesh(nmode=n, mzis=mzis, output_phases=np.angle(diag))


def clements_reconstruct(mesh: ClementsMesh) -> np.ndarray:
    """Rebuild the unitary described by a :class:`ClementsMesh`."""
    n = mesh.nmode
    u = np.eye(n, dtype=complex)
    for cell in mesh.mzis:
        u = _embed(cell.matrix(), cell.mode, n) @ u
    return np.diag(np.exp(1j * np.asarray(mesh.output_phases))) @ u
