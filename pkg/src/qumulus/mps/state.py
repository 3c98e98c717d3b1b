"""Matrix-product states with an orthogonality centre and SVD truncation.

Site tensors have shape ``(chi_left, d, chi_right)`` with boundary bonds of
size one.  The state is kept in mixed-canonical form: every tensor left of
:attr:`MPSState.center` is a left isometry, every tensor right of it a right
isometry, and the centre tensor carries the norm.  Moving the centre costs
one QR per site, so gates on neighbouring sites never trigger a full sweep.

Truncation rule for every SVD split: keep at most ``chi_max`` singular
values, and when ``cutoff > 0`` additionally drop ``sigma < cutoff *
sigma_max``.  With ``cutoff = 0`` the kept rank is ``min(chi_max, rank bound)``
even when trailing singular values vanish, so bond sizes depend only on the
gate sequence.  Discarded weight (sum of squared dropped singular values)
accumulates in :attr:`truncation_error`, so for unitary gates on a normalised
state ``1 - <psi|psi>`` equals the reported error; nothing is renormalised
unless :meth:`normalize` is called.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from ..errors import NumericalGuardError

CHECKPOINT_MAGIC = "qumulus-mps"
CHECKPOINT_VERSION = 1


def _split(theta: np.ndarray, chi: int | None, cutoff: float):
    """SVD-split a matrix; returns ``(u, s, vh, discarded_weight)``."""
    try:
        u, s, vh = np.linalg.svd(theta, full_matrices=False)
    except np.linalg.LinAlgError:  # pragma: no cover - rare LAPACK failure
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(theta, full_matrices=False, lapack_driver="gesvd")
    keep = len(s)
    if chi is not None:
        keep = min(keep, int(chi))
    if cutoff > 0 and s.size and s[0] > 0:
        keep = min(keep, max(1, int(np.count_nonzero(s > cutoff * s[0]))))
    total = float(np.sum(s**2))
    dropped = float(np.sum(s[keep:] ** 2))
    rel = dropped / total if total > 0 else 0.0
    return u[:, :keep], s[:keep], vh[:keep], rel


class MPSState:
    """Open-boundary matrix-product state.

    Parameters
    ----------
    tensors : sequence of ndarray
        Site tensors ``(chi_left, d, chi_right)``.
    chi_max : int, optional
        Bond-dimension cap used by gate application (``None``: unbounded).
    cutoff : float
        Relative singular-value cutoff for gate application.
    center : int, optional
        Site of the orthogonality centre if the tensors are already in
        mixed-canonical form; otherwise the state is canonicalised.

    Examples
    --------
    >>> psi = MPSState.product([[1, 0], [0, 1], [1, 0]])
    >>> psi.bond_dims()
    [1, 1]
    """

    def __init__(self, tensors: Sequence[np.ndarray], chi_max: int | None = None, cutoff: float = 0.0, center=None):
        ts = [np.asarray(t, dtype=complex) for t in tensors]
        if not ts:
            raise ValueError("an MPS needs at least one site")
        for k, t in enumerate(ts):
            if t.ndim != 3:
                raise ValueError(f"site {k} tensor must be rank 3, got shape {t.shape}")
            if k and t.shape[0] != ts[k - 1].shape[2]:
                raise ValueError(f"bond mismatch between sites {k - 1} and {k}")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        self.tensors: list[np.ndarray] = ts
        self.chi_max = None if chi_max is None else int(chi_max)
        self.cutoff = float(cutoff)
        self.truncation_error = 0.0
        self.singular_values: list[np.ndarray | None] = [None] * (len(ts) - 1)
        self.swap_count = 0
        if center is None:
            self.center = len(ts) - 1
            self._canonicalize()
        else:
            self.center = int(center)

    # ----------------------------------------------------------- builders
    @classmethod
    def product(cls, local_states: Sequence[Sequence[complex]], chi_max=None, cutoff: float = 0.0) -> "MPSState":
        """Product state from one local vector per site."""
        ts = []
        for v in local_states:
            v = np.asarray(v, dtype=complex)
            ts.append(v.reshape(1, -1, 1) / np.linalg.norm(v))
        return cls(ts, chi_max, cutoff, center=0)

    @classmethod
    def basis(cls, occupations: Sequence[int], d: int = 2, chi_max=None, cutoff: float = 0.0) -> "MPSState":
        """Computational (or Fock) basis state ``|n_1 n_2 ...>``."""
        vecs = []
        for n in occupations:
            if not 0 <= int(n) < d:
                raise ValueError(f"level {n} out of range for local dimension {d}")
            v = np.zeros(d, dtype=complex)
            v[int(n)] = 1.0
            vecs.append(v)
        return cls.product(vecs, chi_max, cutoff)

    @classmethod
    def from_dense(cls, c: np.ndarray, chi: int | None = None, cutoff: float = 1e-12, d: int | None = None) -> "MPSState":
        """Left-to-right reshape/SVD sweep of a dense amplitude tensor.

        Parameters
        ----------
        c : ndarray
            Rank-``N`` tensor ``c[i_1, ..., i_N]`` or a flat vector (then ``d``
            is required, default 2).
        chi : int, optional
            Maximum bond dimension (``None``: exact).
        cutoff : float
            Relative singular-value cutoff for this construction sweep.

        Returns
        -------
        MPSState
            Centre on the last site; discarded weight in
            :attr:`truncation_error`.  The returned state uses ``chi`` as
            :attr:`chi_max` and a zero cutoff for later gates.
        """
        c = np.asarray(c, dtype=complex)
        if c.ndim == 1:
            d = 2 if d is None else int(d)
            n = int(round(np.log(c.size) / np.log(d)))
            if d**n != c.size:
                raise ValueError(f"vector length {c.size} is not a power of {d}")
            c = c.reshape((d,) * n)
        norm = np.linalg.norm(c)
        if norm == 0:
            raise NumericalGuardError("cannot build an MPS from a zero vector")
        dims = c.shape
        ts = []
        err = 0.0
        svals: list[np.ndarray | None] = []
        rest = c.reshape(1, -1)
        chil = 1
        for k in range(len(dims) - 1):
            mat = rest.reshape(chil * dims[k], -1)
            u, s, vh, rel = _split(mat, chi, cutoff)
            err += rel * (1 - err)
            ts.append(u.reshape(chil, dims[k], -1))
            svals.append(s / np.linalg.norm(s))
            rest = s[:, None] * vh
            chil = s.size
        ts.append(rest.reshape(chil, dims[-1], 1))
        out = cls(ts, chi, 0.0, center=len(dims) - 1)
        out.truncation_error = err
        out.singular_values = svals
        return out

    def copy(self) -> "MPSState":
        out = MPSState([t.copy() for t in self.tensors], self.chi_max, self.cutoff, center=self.center)
        out.truncation_error = self.truncation_error
        out.singular_values = [None if s is None else s.copy() for s in self.singular_values]
        out.swap_count = self.swap_count
        return out

    # ---------------------------------------------------------- structure
    @property
    def nsite(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    def bond_dims(self) -> list[int]:
        """Internal bond dimensions (``nsite - 1`` entries)."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def shapes(self) -> list[tuple[int, int, int]]:
        return [tuple(t.shape) for t in self.tensors]

    def __len__(self) -> int:
        return self.nsite

    def __iter__(self):
        return iter(self.tensors)

    def _check_site(self, k: int) -> int:
        k = int(k)
        if not 0 <= k < self.nsite:
            raise IndexError(f"site {k} out of range for {self.nsite} sites")
        return k

    # ---------------------------------------------------------- canonical
    def _canonicalize(self) -> None:
        """Right-canonicalise everything onto site 0 (QR sweep from the right)."""
        for k in range(self.nsite - 1, 0, -1):
            self._shift_left(k)
        self.center = 0

    def _shift_left(self, k: int) -> None:
        t = self.tensors[k]
        chil, d, chir = t.shape
        q, r = np.linalg.qr(t.reshape(chil, d * chir).T)
        self.tensors[k] = q.T.reshape(-1, d, chir)
        self.tensors[k - 1] = np.tensordot(self.tensors[k - 1], r.T, axes=([2], [0]))

    def _shift_right(self, k: int) -> None:
        t = self.tensors[k]
        chil, d, chir = t.shape
        q, r = np.linalg.qr(t.reshape(chil * d, chir))
        self.tensors[k] = q.reshape(chil, d, -1)
        self.tensors[k + 1] = np.tensordot(r, self.tensors[k + 1], axes=([1], [0]))

    def move_center(self, k: int) -> None:
        """Shift the orthogonality centre to site ``k`` by QR steps."""
        k = self._check_site(k)
        while self.center < k:
            self._shift_right(self.center)
            self.center += 1
        while self.center > k:
            self._shift_left(self.center)
            self.center -= 1

    def isometry_errors(self) -> list[float]:
        """Max deviation from the isometry condition for every non-centre site."""
        errs = []
        for k, t in enumerate(self.tensors):
            if k == self.center:
                errs.append(0.0)
                continue
            if k < self.center:
                g = np.einsum("adb,adc->bc", t.conj(), t)
            else:
                g = np.einsum("bda,cda->bc", t.conj(), t)
            errs.append(float(np.max(np.abs(g - np.eye(g.shape[0])))))
        return errs

    # ---------------------------------------------------------------- norm
    def norm(self) -> float:
        return float(np.linalg.norm(self.tensors[self.center]))

    def normalize(self) -> "MPSState":
        n = self.norm()
        if n == 0:
            raise NumericalGuardError("MPS has zero norm")
        self.tensors[self.center] = self.tensors[self.center] / n
        return self

    # ------------------------------------------------------------- dense
    def to_dense(self) -> np.ndarray:
        """Full amplitude vector (first site most significant)."""
        out = self.tensors[0]
        for t in self.tensors[1:]:
            out = np.tensordot(out, t, axes=([-1], [0]))
        return out.reshape(-1)

    # ------------------------------------------------------------- gates
    def apply_local(self, m: np.ndarray, site: int) -> None:
        """Contract a single-site operator; bond dimensions are unchanged.

        Unitaries keep every isometry intact; any other operator is applied
        at the orthogonality centre (which is moved there first).
        """
        site = self._check_site(site)
        m = np.asarray(m, dtype=complex)
        if site != self.center and not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12):
            self.move_center(site)
        self.tensors[site] = np.einsum("ij,ajb->aib", m, self.tensors[site])

    def apply_contiguous(self, m: np.ndarray, start: int, nsite: int) -> None:
        """Apply a ``prod(d) x prod(d)`` operator on sites ``start .. start+nsite-1``."""
        start = self._check_site(start)
        stop = start + nsite - 1
        self._check_site(stop)
        if nsite == 1:
            self.apply_local(m, start)
            return
        if not start <= self.center <= stop:
            self.move_center(start if self.center < start else stop)
        # merge the block; sites inside it are absorbed
        theta = self.tensors[start]
        for k in range(start + 1, stop + 1):
            theta = np.tensordot(theta, self.tensors[k], axes=([-1], [0]))
        dims = theta.shape[1:-1]
        chil, chir = theta.shape[0], theta.shape[-1]
        op = np.asarray(m, dtype=complex).reshape(dims + dims)
        n = len(dims)
        theta = np.tensordot(op, theta, axes=(list(range(n, 2 * n)), list(range(1, n + 1))))
        theta = np.moveaxis(theta, n, 0)  # (chil, d1..dn, chir)
        norm2 = float(np.sum(np.abs(theta) ** 2))
        # split left to right
        rest = theta.reshape(chil, -1)
        left = chil
        for j, k in enumerate(range(start, stop)):
            mat = rest.reshape(left * dims[j], -1)
            u, s, vh, rel = _split(mat, self.chi_max, self.cutoff)
            # the block holds the whole norm, so this is absolute lost weight
            self.truncation_error += rel * norm2
            self.tensors[k] = u.reshape(left, dims[j], -1)
            nrm = np.linalg.norm(s)
            self.singular_values[k] = s / nrm if nrm > 0 else s
            rest = s[:, None] * vh
            left = s.size
            norm2 = float(np.sum(s**2))
        self.tensors[stop] = rest.reshape(left, dims[-1], chir)
        self.center = stop

    def apply_gate(self, m: np.ndarray, sites: Sequence[int]) -> None:
        """Apply an operator on arbitrary distinct sites (first site most significant).

        Non-adjacent sites are brought together with nearest-neighbour swaps:
        the sites are sorted by position, every site after the first is
        swapped down until the block is contiguous, the gate (re-ordered to
        the block order) is applied, and the swaps are undone in reverse.
        Each swap is a truncated two-site update; :attr:`swap_count` counts
        them.
        """
        sites = [self._check_site(s) for s in sites]
        if len(set(sites)) != len(sites):
            raise ValueError(f"repeated sites {sites}")
        k = len(sites)
        m = np.asarray(m, dtype=complex)
        dims = [self.tensors[s].shape[1] for s in sites]
        if m.shape != (int(np.prod(dims)),) * 2:
            raise ValueError(f"operator shape {m.shape} does not match sites {sites}")
        order = sorted(range(k), key=lambda i: sites[i])
        if order != list(range(k)):
            t = m.reshape(dims + dims)
            t = np.transpose(t, order + [k + i for i in order])
            dims = [dims[i] for i in order]
            m = t.reshape(m.shape)
        pos = sorted(sites)
        swaps: list[int] = []
        for j in range(1, k):
            while pos[j] > pos[0] + j:
                self.swap(pos[j] - 1)
                swaps.append(pos[j] - 1)
                pos[j] -= 1
        self.apply_contiguous(m, pos[0], k)
        for s in reversed(swaps):
            self.swap(s)

    def swap(self, k: int) -> None:
        """Exchange the physical contents of sites ``k`` and ``k + 1``."""
        d = self.tensors[k].shape[1]
        if self.tensors[k + 1].shape[1] != d:
            raise ValueError("swap requires equal local dimensions")
        sw = np.zeros((d * d, d * d))
        for a in range(d):
            for b in range(d):
                sw[b * d + a, a * d + b] = 1.0
        self.apply_contiguous(sw, k, 2)
        self.swap_count += 1

    # -------------------------------------------------------- observables
    def expectation_local(self, op: np.ndarray, sites) -> float:
        """``<psi|op|psi> / <psi|psi>`` for an operator on one or two adjacent sites."""
        sites = [int(sites)] if np.isscalar(sites) else [int(s) for s in sites]
        for s in sites:
            self._check_site(s)
        op = np.asarray(op, dtype=complex)
        if len(sites) == 1:
            k = sites[0]
            self.move_center(k)
            t = self.tensors[k]
            val = np.einsum("aib,ij,ajb->", t.conj(), op, t)
            return float(np.real(val) / np.real(np.vdot(t, t)))
        if len(sites) != 2:
            raise ValueError("expectation_local supports one or two sites")
        a, b = sites
        if abs(a - b) != 1:
            raise ValueError("two-site observables must act on adjacent sites")
        if a > b:
            d = self.tensors[a].shape[1]
            op = op.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
            a, b = b, a
        self.move_center(a)
        theta = np.tensordot(self.tensors[a], self.tensors[b], axes=([2], [0]))
        x, d1, d2, y = theta.shape
        o = op.reshape(d1, d2, d1, d2)
        val = np.einsum("aijb,ijkl,aklb->", theta.conj(), o, theta)
        return float(np.real(val) / np.real(np.vdot(theta, theta)))

    def schmidt_values(self, bond: int) -> np.ndarray:
        """Normalised Schmidt coefficients across bond ``bond`` (between sites ``bond-1`` and ``bond``)."""
        if not 1 <= bond < self.nsite:
            raise IndexError(f"bond {bond} out of range")
        self.move_center(bond)
        t = self.tensors[bond]
        s = np.linalg.svd(t.reshape(t.shape[0], -1), compute_uv=False)
        return s / np.linalg.norm(s)

    def entropy(self, bond: int) -> float:
        """Von Neumann entanglement entropy ``-sum l^2 log l^2`` across a bond."""
        p = self.schmidt_values(bond) ** 2
        p = p[p > 1e-300]
        return float(-np.sum(p * np.log(p)))

    # -------------------------------------------------------- checkpoints
    def save(self, path) -> None:
        """Write a versioned ``.npz`` checkpoint (tensors, shapes, spectra)."""
        arrays = {f"t{k}": t for k, t in enumerate(self.tensors)}
        for k, s in enumerate(self.singular_values):
            if s is not None:
                arrays[f"s{k}"] = s
        meta = np.array(
            [CHECKPOINT_VERSION, self.nsite, -1 if self.chi_max is None else self.chi_max, self.center, self.swap_count],
            dtype=np.int64,
        )
        np.savez(
            path,
            magic=np.array(CHECKPOINT_MAGIC),
            meta=meta,
            floats=np.array([self.cutoff, self.truncation_error]),
            shapes=np.array([t.shape for t in self.tensors], dtype=np.int64),
            **arrays,
        )

    @classmethod
    def load(cls, path) -> "MPSState":
        if not os.path.exists(path) and os.path.exists(str(path) + ".npz"):
            path = str(path) + ".npz"
        with np.load(path, allow_pickle=False) as z:
            if "magic" not in z or str(z["magic"]) != CHECKPOINT_MAGIC:
                raise ValueError(f"{path} is not an MPS checkpoint")
            version, nsite, chi, center, swaps = (int(v) for v in z["meta"])
            if version != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {version}")
            cutoff, err = (float(v) for v in z["floats"])
            ts = [z[f"t{k}"] for k in range(nsite)]
            for t, shp in zip(ts, z["shapes"]):
                if tuple(t.shape) != tuple(int(v) for v in shp):
                    raise ValueError("checkpoint shape table does not match tensors")
            out = cls(ts, None if chi < 0 else chi, cutoff, center=center)
            out.truncation_error = err
            out.swap_count = swaps
            out.singular_values = [z[f"s{k}"] if f"s{k}" in z else None for k in range(nsite - 1)]
        return out


class MPO:
    """Matrix-product operator with site tensors ``(chi_left, d_out, d_in, chi_right)``."""

    def __init__(self, tensors: Sequence[np.ndarray]):
        ts = [np.asarray(t, dtype=complex) for t in tensors]
        for k, t in enumerate(ts):
            if t.ndim != 4:
                raise ValueError(f"MPO site {k} must be rank 4")
            if k and t.shape[0] != ts[k - 1].shape[3]:
                raise ValueError(f"MPO bond mismatch between sites {k - 1} and {k}")
        if ts[0].shape[0] != 1 or ts[-1].shape[3] != 1:
            raise ValueError("MPO boundary bonds must have dimension 1")
        self.tensors = ts

    @property
    def nsite(self) -> int:
        return len(self.tensors)

    @classmethod
    def identity(cls, nsite: int, d: int = 2) -> "MPO":
        return cls([np.eye(d, dtype=complex).reshape(1, d, d, 1) for _ in range(nsite)])

    @classmethod
    def from_local(cls, nsite: int, ops: dict[int, np.ndarray], d: int = 2) -> "MPO":
        """Tensor product of single-site operators (identity elsewhere)."""
        ts = []
        for k in range(nsite):
            m = np.asarray(ops.get(k, np.eye(d)), dtype=complex)
            ts.append(m.reshape(1, m.shape[0], m.shape[1], 1))
        return cls(ts)

    @classmethod
    def from_dense(cls, op: np.ndarray, nsite: int, d: int = 2, cutoff: float = 1e-12) -> "MPO":
        """Exact operator-Schmidt sweep of a dense ``d^N x d^N`` matrix."""
        op = np.asarray(op, dtype=complex).reshape((d,) * (2 * nsite))
        # interleave (out_k, in_k) for every site
        perm = [i for k in range(nsite) for i in (k, nsite + k)]
        t = np.transpose(op, perm)
        ts = []
        left = 1
        rest = t.reshape(1, -1)
        for k in range(nsite - 1):
            mat = rest.reshape(left * d * d, -1)
            u, s, vh, _ = _split(mat, None, cutoff)
            ts.append(u.reshape(left, d, d, -1))
            rest = s[:, None] * vh
            left = s.size
        ts.append(rest.reshape(left, d, d, 1))
        return cls(ts)

    def to_dense(self) -> np.ndarray:
        out = self.tensors[0]
        for t in self.tensors[1:]:
            out = np.tensordot(out, t, axes=([-1], [0]))
        out = out.reshape(out.shape[1:-1])
        n = self.nsite
        outs = [2 * k for k in range(n)]
        ins = [2 * k + 1 for k in range(n)]
        out = np.transpose(out, outs + ins)
        dim = int(np.prod(out.shape[:n]))
        return out.reshape(dim, dim)

    def apply(self, psi: MPSState, chi: int | None = None, cutoff: float = 0.0) -> MPSState:
        """``O|psi>`` as a new MPS, compressed by an SVD sweep."""
        if psi.nsite != self.nsite:
            raise ValueError("MPO and MPS have different lengths")
        ts = []
        for w, a in zip(self.tensors, psi.tensors):
            t = np.einsum("xiky,akb->xaiyb", w, a)
            x, al, dd, y, b = t.shape
            ts.append(t.reshape(x * al, dd, y * b))
        out = MPSState(ts, chi if chi is not None else psi.chi_max, cutoff)
        # _canonicalize left the centre at 0; sweep right with truncation
        err = 0.0
        for k in range(out.nsite - 1):
            t = out.tensors[k]
            chil, d, _ = t.shape
            u, s, vh, rel = _split(t.reshape(chil * d, -1), chi, cutoff)
            err += rel
            out.tensors[k] = u.reshape(chil, d, -1)
            out.tensors[k + 1] = np.tensordot(s[:, None] * vh, out.tensors[k + 1], axes=([1], [0]))
            out.singular_values[k] = s / np.linalg.norm(s) if np.linalg.norm(s) > 0 else s
        out.center = out.nsite - 1
        out.truncation_error = psi.truncation_error + err
        return out

    def expectation(self, psi: MPSState) -> complex:
        """``<psi|O|psi> / <psi|psi>`` by transfer-matrix contraction."""
        env = np.ones((1, 1, 1), dtype=complex)
        nenv = np.ones((1, 1), dtype=complex)
        for w, a in zip(self.tensors, psi.tensors):
            env = np.einsum("xwa,xiy,wijv,ajb->yvb", env, a.conj(), w, a)
            nenv = np.einsum("xa,xiy,aib->yb", nenv, a.conj(), a)
        return complex(env.reshape(()) / nenv.reshape(()))
