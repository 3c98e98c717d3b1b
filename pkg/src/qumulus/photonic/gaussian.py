"""Gaussian states in covariance form and their detection statistics.

A state of ``m`` modes is a real covariance matrix ``V`` (``2m x 2m``) and a
mean vector ``d`` in ``xxpp`` order, with ``hbar = 2`` by default so that
the vacuum has ``V = I``.  Gates act through symplectic matrices;
photon-number statistics come from hafnians (resolving detectors) and
torontonians (click detectors) of matrices built in the complex
``(a, a^dag)`` ordering.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

import numpy as np

from ..errors import NumericalGuardError, UnsupportedGateError
from ..linalg import (
    beamsplitter_unitary,
    expand,
    hafnian,
    interferometer,
    is_symplectic,
    mzi_matrix,
    omega,
    rotation,
    squeezing,
    takagi,
    torontonian,
)
from ..linalg.symplectic import complex_basis_change
from ..rng import as_generator
from .fock import ket  # noqa: F401  (re-exported for result formatting)


@dataclass
class GaussianState:
    """Gaussian state ``(V, d)`` in ``xxpp`` ordering.

    Attributes
    ----------
    cov : ndarray, shape (2m, 2m)
    mean : ndarray, shape (2m,)
    hbar : float
    """

    cov: np.ndarray
    mean: np.ndarray
    hbar: float = 2.0

    def __post_init__(self):
        self.cov = np.array(self.cov, dtype=float)
        self.mean = np.array(self.mean, dtype=float)
        n = self.cov.shape[0]
        if self.cov.shape != (n, n) or n % 2 or self.mean.shape != (n,):
            raise ValueError("covariance must be 2m x 2m and the mean of length 2m")

    @classmethod
    def vacuum(cls, nmode: int, hbar: float = 2.0) -> "GaussianState":
        return cls(hbar / 2 * np.eye(2 * nmode), np.zeros(2 * nmode), hbar)

    @property
    def nmode(self) -> int:
        return self.cov.shape[0] // 2

    def copy(self) -> "GaussianState":
        return GaussianState(self.cov.copy(), self.mean.copy(), self.hbar)

    def uncertainty_floor(self) -> float:
        """Smallest eigenvalue of ``V + i hbar Omega / 2`` (non-negative for physical states)."""
        m = self.cov + 0.5j * self.hbar * omega(self.nmode)
        return float(np.min(np.linalg.eigvalsh(m)))

    def is_physical(self, tol: float = 1e-8) -> bool:
        sym = np.max(np.abs(self.cov - self.cov.T)) <= tol
        return bool(sym and self.uncertainty_floor() >= -tol)

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        """Marginal state of ``modes`` (in the given order)."""
        modes = np.asarray(list(modes), dtype=int)
        idx = np.concatenate([modes, modes + self.nmode])
        return GaussianState(self.cov[np.ix_(idx, idx)], self.mean[idx], self.hbar)

    def quadrature_means(self, mode: int) -> tuple[float, float]:
        return float(self.mean[mode]), float(self.mean[mode + self.nmode])

    def mean_photon(self, mode: int) -> float:
        """``<n>`` of one mode: ``(Vxx + Vpp + x^2 + p^2) / (2 hbar) - 1/2``."""
        m = self.nmode
        v = self.cov[mode, mode] + self.cov[m + mode, m + mode]
        d2 = self.mean[mode] ** 2 + self.mean[m + mode] ** 2
        return float((v + d2) / (2 * self.hbar) - 0.5)

    # ---------------------------------------------------- complex-form matrices
    def sigma_complex(self) -> np.ndarray:
        """Covariance in the ``(a, a^dag)`` ordering, in units with vacuum ``I/2``."""
        w = complex_basis_change(self.nmode)
        return w @ (self.cov / self.hbar) @ w.conj().T

    def q_matrix(self) -> np.ndarray:
        """Husimi covariance ``Q = sigma + I/2``."""
        return self.sigma_complex() + 0.5 * np.eye(2 * self.nmode)

    def a_matrix(self) -> np.ndarray:
        """``A = X (I - Q^{-1})`` with ``X`` swapping the ``a`` and ``a^dag`` blocks."""
        m = self.nmode
        q = self.q_matrix()
        x = np.block([[np.zeros((m, m)), np.eye(m)], [np.eye(m), np.zeros((m, m))]])
        return x @ (np.eye(2 * m) - np.linalg.inv(q))

    def is_pure(self, tol: float = 1e-8) -> bool:
        """Purity test ``det(2V/hbar) == 1``."""
        return bool(abs(np.linalg.det(2 * self.cov / self.hbar) - 1.0) < tol)


@dataclass
class SymplecticOp:
    """Affine phase-space map ``xi -> S xi + shift``."""

    S: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=float)
        self.shift = np.asarray(self.shift, dtype=float)

    @property
    def nmode(self) -> int:
        return self.S.shape[0] // 2

    def then(self, other: "SymplecticOp") -> "SymplecticOp":
        """Composition: apply ``self`` first, then ``other``."""
        return SymplecticOp(other.S @ self.S, other.S @ self.shift + other.shift)

    def is_symplectic(self, tol: float = 1e-8) -> bool:
        return is_symplectic(self.S, tol)


_TWO_MODE = {"bs", "mzi"}
_ONE_MODE = {"ps", "r", "s", "d"}


def symplectic_of(name: str, wires: Sequence[int], params: Sequence[float], nmode: int, hbar: float = 2.0) -> SymplecticOp:
    """Phase-space action of a named Gaussian gate embedded in ``nmode`` modes.

    Parameters
    ----------
    name : {"ps", "r", "bs", "mzi", "s", "d"}
        ``ps``/``r`` rotate by ``phi``; ``bs`` takes ``(theta, phi)``; ``mzi``
        takes ``(theta, phi)``; ``s`` takes ``(r, phi)``; ``d`` takes ``(r, phi)``
        for ``alpha = r e^{i phi}``.
    """
    wires = [int(w) for w in np.atleast_1d(wires)]
    p = [float(x) for x in np.atleast_1d(params)] if params is not None else []
    shift = np.zeros(2 * nmode)
    if name in _ONE_MODE and len(wires) != 1:
        raise ValueError(f"gate {name!r} acts on one mode")
    if name in _TWO_MODE and len(wires) != 2:
        raise ValueError(f"gate {name!r} acts on two modes")
    if name in ("ps", "r"):
        s = rotation(p[0])
    elif name == "s":
        s = squeezing(p[0], p[1] if len(p) > 1 else 0.0)
    elif name == "d":
        s = np.eye(2)
        r, ph = p[0], (p[1] if len(p) > 1 else 0.0)
        scale = np.sqrt(2 * hbar)
        shift[wires[0]] = scale * r * np.cos(ph)
        shift[wires[0] + nmode] = scale * r * np.sin(ph)
    elif name == "bs":
        s = interferometer(beamsplitter_unitary(p[0], p[1] if len(p) > 1 else 0.0))
    elif name == "mzi":
        s = interferometer(mzi_matrix(p[0], p[1]))
    else:
        raise UnsupportedGateError(f"no symplectic form for gate {name!r}")
    return SymplecticOp(expand(s, wires, nmode), shift)


def evolve(state: GaussianState, op: SymplecticOp) -> GaussianState:
    """``V -> S V S^T``, ``d -> S d + shift``."""
    if op.nmode != state.nmode:
        raise ValueError("operation and state act on different numbers of modes")
    return GaussianState(op.S @ state.cov @ op.S.T, op.S @ state.mean + op.shift, state.hbar)


def apply_loss(state: GaussianState, wire: int, transmissivity: float) -> GaussianState:
    """Pure-loss channel on one mode."""
    eta = float(transmissivity)
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    m = state.nmode
    idx = [wire, wire + m]
    x = np.eye(2 * m)
    x[idx, idx] = np.sqrt(eta)
    y = np.zeros((2 * m, 2 * m))
    y[idx, idx] = (1 - eta) * state.hbar / 2
    return GaussianState(x @ state.cov @ x.T + y, x @ state.mean, state.hbar)


# ---------------------------------------------------------------- homodyne
def _rotate_for_homodyne(state: GaussianState, wires: Sequence[int], phis: Sequence[float]) -> GaussianState:
    out = state
    for w, ph in zip(wires, phis):
        if ph:
            out = evolve(out, symplectic_of("r", [w], [-ph], state.nmode, state.hbar))
    return out


def _phis(wires, phi) -> list[float]:
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, len(wires))
    if arr.size != len(wires):
        raise ValueError("need one homodyne angle per wire")
    return [float(a) for a in arr]


def _check_wires(wires, nmode) -> list[int]:
    wires = [int(w) for w in np.atleast_1d(wires)]
    if len(set(wires)) != len(wires):
        raise ValueError("homodyne wires must be distinct")
    for w in wires:
        if not 0 <= w < nmode:
            raise ValueError(f"wire {w} out of range")
    return wires


def psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root of a covariance matrix.

    Uses an eigendecomposition (negative round-off eigenvalues clipped), which stays
    well behaved for the very ill-conditioned covariances of strongly squeezed states.
    """
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def homodyne_marginal(state: GaussianState, wires: Sequence[int], phi=0.0) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the quadratures ``x cos(phi) + p sin(phi)`` on ``wires``."""
    wires = _check_wires(wires, state.nmode)
    rot = _rotate_for_homodyne(state, wires, _phis(wires, phi))
    idx = np.asarray(wires)
    return rot.mean[idx], rot.cov[np.ix_(idx, idx)]


def homodyne_condition(state: GaussianState, wires: Sequence[int], values: Sequence[float], phi=0.0) -> GaussianState:
    """Condition on homodyne outcomes; measured modes are reset to vacuum.

    The unmeasured block is updated by the Schur complement
    ``V_B - C V_A^{-1} C^T`` and ``d_B + C V_A^{-1} (x - d_A)``.
    """
    wires = _check_wires(wires, state.nmode)
    rot = _rotate_for_homodyne(state, wires, _phis(wires, phi))
    m = state.nmode
    a = np.asarray(wires)
    rest = np.array([k for k in range(m) if k not in wires], dtype=int)
    b = np.concatenate([rest, rest + m])
    va = rot.cov[np.ix_(a, a)]
    c = rot.cov[np.ix_(b, a)]
    vals = np.asarray(values, dtype=float).reshape(len(wires))
    gain = c @ np.linalg.pinv(va, hermitian=True)
    vb = rot.cov[np.ix_(b, b)] - gain @ c.T
    db = rot.mean[b] + gain @ (vals - rot.mean[a])
    cov = state.hbar / 2 * np.eye(2 * m)
    mean = np.zeros(2 * m)
    cov[np.ix_(b, b)] = vb
    mean[b] = db
    return GaussianState(cov, mean, state.hbar)


@dataclass
class HomodyneResult:
    """Homodyne samples with lazily computed conditional states."""

    samples: np.ndarray
    wires: tuple[int, ...]
    phi: tuple[float, ...]
    source: GaussianState = field(repr=False)

    def state(self, shot: int = 0) -> GaussianState:
        """Conditional state after outcome ``samples[shot]``."""
        return homodyne_condition(self.source, self.wires, self.samples[shot], self.phi)


def measure_homodyne(state: GaussianState, wires: Sequence[int], phi=0.0, shots: int = 1, rng=None) -> HomodyneResult:
    """Sample homodyne outcomes from the Gaussian marginal.

    Returns
    -------
    HomodyneResult
        ``samples`` has shape ``(shots, len(wires))``.
    """
    wires = _check_wires(wires, state.nmode)
    phis = _phis(wires, phi)
    mu, cov = homodyne_marginal(state, wires, phis)
    gen = as_generator(rng, "gaussian.homodyne")
    z = gen.standard_normal((int(shots), len(wires)))
    samples = mu + z @ psd_sqrt(cov).T
    return HomodyneResult(samples, tuple(wires), tuple(phis), state)


# ---------------------------------------------------------------- detection
def _require_centered(state: GaussianState) -> None:
    if np.max(np.abs(state.mean)) > 1e-12:
        raise UnsupportedGateError(
            "photon-counting probabilities of displaced Gaussian states need loop hafnians; "
            "simulate displaced states with the Fock backend"
        )


def _repeat_index(pattern: Sequence[int], m: int, both: bool) -> np.ndarray:
    base = [i for i, n in enumerate(pattern) for _ in range(int(n))]
    if both:
        return np.array(base + [i + m for i in base], dtype=int)
    return np.array(base, dtype=int)


def prob_pnrd(state: GaussianState, pattern: Sequence[int]) -> float:
    """Probability of a photon-number pattern, ``Haf(A_n) / (sqrt(det Q) prod n_i!)``."""
    _require_centered(state)
    pattern = [int(n) for n in pattern]
    m = state.nmode
    if len(pattern) != m or any(n < 0 for n in pattern):
        raise ValueError(f"invalid photon-number pattern {pattern}")
    total = sum(pattern)
    if total % 2 and state.is_pure():
        return 0.0
    q = state.q_matrix()
    pref = 1.0 / np.sqrt(np.linalg.det(q).real)
    norm = float(np.prod([factorial(n) for n in pattern]))
    if total == 0:
        return float(pref)
    a = state.a_matrix()
    if state.is_pure():
        idx = _repeat_index(pattern, m, both=False)
        b = a[np.ix_(idx, idx)]
        val = abs(hafnian(b)) ** 2
    else:
        idx = _repeat_index(pattern, m, both=True)
        val = hafnian(a[np.ix_(idx, idx)]).real
    return float(max(val, 0.0) * pref / norm)


def prob_threshold(state: GaussianState, clicks: Sequence[int]) -> float:
    """Click-pattern probability ``Tor(O_S) / sqrt(det Q)`` with ``O = I - Q^{-1}``."""
    _require_centered(state)
    clicks = [int(bool(c)) for c in clicks]
    m = state.nmode
    if len(clicks) != m:
        raise ValueError("click pattern length does not match the number of modes")
    q = state.q_matrix()
    pref = 1.0 / np.sqrt(np.linalg.det(q).real)
    on = [i for i, c in enumerate(clicks) if c]
    if not on:
        return float(pref)
    o = np.eye(2 * m) - np.linalg.inv(q)
    idx = np.array(on + [i + m for i in on])
    return float(max(torontonian(o[np.ix_(idx, idx)]).real, 0.0) * pref)


def _prob(state: GaussianState, pattern, detector: str) -> float:
    return prob_pnrd(state, pattern) if detector == "pnrd" else prob_threshold(state, pattern)


def sample_detection(
    state: GaussianState, detector: str = "pnrd", shots: int = 1024, cutoff: int = 8, rng=None
) -> dict[tuple[int, ...], int]:
    """Exact chain-rule sampling of photon-counting outcomes.

    Mode ``k`` is drawn from ``P(n_k | n_0 .. n_{k-1})`` using the marginal
    probabilities of the first ``k + 1`` modes; results are memoised per
    prefix.  For PNRD, outcomes are truncated at ``cutoff - 1`` photons per
    mode and the truncated mass is reported through a ``RuntimeWarning``.
    """
    if detector not in ("pnrd", "threshold"):
        raise ValueError(f"unknown detector {detector!r}")
    _require_centered(state)
    m = state.nmode
    levels = 2 if detector == "threshold" else int(cutoff)
    marginals = [state.reduced(range(k + 1)) for k in range(m)]
    memo: dict[tuple[int, ...], np.ndarray] = {}
    leaked = 0.0

    def conditional(prefix: tuple[int, ...]) -> np.ndarray:
        nonlocal leaked
        if prefix in memo:
            return memo[prefix]
        k = len(prefix)
        joint = np.array([_prob(marginals[k], prefix + (n,), detector) for n in range(levels)])
        base = joint.sum()
        if base <= 0:
            raise NumericalGuardError(f"zero marginal probability for prefix {prefix}")
        if detector == "pnrd":
            full = _prob(marginals[k - 1], prefix, detector) if k else 1.0
            leaked = max(leaked, 1.0 - base / full)
        memo[prefix] = joint / base
        return memo[prefix]

    gen = as_generator(rng, f"gaussian.sample.{detector}")
    counts: dict[tuple[int, ...], int] = {}
    for _ in range(int(shots)):
        prefix: tuple[int, ...] = ()
        for _k in range(m):
            p = conditional(prefix)
            prefix = prefix + (int(gen.choice(levels, p=p)),)
        counts[prefix] = counts.get(prefix, 0) + 1
    if leaked > 1e-6:
        warnings.warn(f"cutoff {cutoff} truncates up to {leaked:.3e} of the conditional probability", RuntimeWarning)
    return dict(sorted(counts.items(), reverse=True))


# ---------------------------------------------------------------- circuit
class GaussianCircuit:
    """Builder for Gaussian circuits on the covariance backend."""

    def __init__(self, nmode: int, hbar: float = 2.0, init: GaussianState | None = None):
        self.nmode = int(nmode)
        self.hbar = float(hbar)
        self.init = init.copy() if init is not None else GaussianState.vacuum(self.nmode, self.hbar)
        if self.init.nmode != self.nmode:
            raise ValueError("initial state has the wrong number of modes")
        self.ops: list[tuple] = []
        self.homodyne_spec: tuple[tuple[int, ...], tuple[float, ...]] | None = None

    def _gate(self, name, wires, params):
        symplectic_of(name, wires, params, self.nmode, self.hbar)  # validates
        self.ops.append(("gate", name, tuple(np.atleast_1d(wires)), tuple(np.atleast_1d(params))))
        return self

    def s(self, wires, r: float = 0.0, phi: float = 0.0):
        return self._gate("s", wires, (r, phi))

    def d(self, wires, r: float = 0.0, phi: float = 0.0):
        return self._gate("d", wires, (r, phi))

    def r(self, wires, phi: float = 0.0):
        return self._gate("r", wires, (phi,))

    ps = r

    def bs(self, wires, inputs=(np.pi / 4, 0.0)):
        theta, phi = (list(np.atleast_1d(inputs)) + [0.0])[:2]
        return self._gate("bs", wires, (theta, phi))

    def mzi(self, wires, inputs=(np.pi / 2, np.pi)):
        return self._gate("mzi", wires, tuple(inputs))

    def interferometer(self, u, wires=None):
        u = np.asarray(u, dtype=complex)
        wires = tuple(range(self.nmode)) if wires is None else tuple(wires)
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise ValueError("interferometer matrix is not unitary")
        self.ops.append(("interferometer", u, wires))
        return self

    def loss(self, wires, transmissivity: float):
        if not 0.0 <= transmissivity <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")
        self.ops.append(("loss", int(wires), float(transmissivity)))
        return self

    def homodyne(self, wires, phi=0.0):
        """Register a homodyne measurement used by :meth:`measure_homodyne`."""
        wires = _check_wires(wires, self.nmode)
        self.homodyne_spec = (tuple(wires), tuple(_phis(wires, phi)))
        return self

    def run(self) -> GaussianState:
        st = self.init.copy()
        for op in self.ops:
            if op[0] == "gate":
                st = evolve(st, symplectic_of(op[1], op[2], op[3], self.nmode, self.hbar))
            elif op[0] == "interferometer":
                st = evolve(st, SymplecticOp(expand(interferometer(op[1]), op[2], self.nmode), np.zeros(2 * self.nmode)))
            else:
                st = apply_loss(st, op[1], op[2])
        return st

    __call__ = run

    def symplectic(self) -> SymplecticOp:
        """Composite affine map of the gate sequence (loss not allowed)."""
        tot = SymplecticOp(np.eye(2 * self.nmode), np.zeros(2 * self.nmode))
        for op in self.ops:
            if op[0] == "gate":
                tot = tot.then(symplectic_of(op[1], op[2], op[3], self.nmode, self.hbar))
            elif op[0] == "interferometer":
                s = expand(interferometer(op[1]), op[2], self.nmode)
                tot = tot.then(SymplecticOp(s, np.zeros(2 * self.nmode)))
            else:
                raise ValueError("loss has no symplectic representation")
        return tot

    def measure(self, shots: int = 1024, detector: str = "pnrd", cutoff: int = 8, seed=None):
        return sample_detection(self.run(), detector, shots, cutoff, seed)

    def measure_homodyne(self, shots: int = 1024, seed=None) -> HomodyneResult:
        if self.homodyne_spec is None:
            raise ValueError("no homodyne measurement registered; call homodyne() first")
        wires, phis = self.homodyne_spec
        return measure_homodyne(self.run(), wires, phis, shots, seed)

    def probability(self, pattern, detector: str = "pnrd") -> float:
        return _prob(self.run(), pattern, detector)


# ---------------------------------------------------------------- GBS
@dataclass
class GBSSpec:
    """Squeezed vacua ``r_i`` (squeezing phase ``phi``) followed by an interferometer ``U``."""

    squeezing: np.ndarray
    unitary: np.ndarray
    phi: float = 0.0
    detector: str = "pnrd"
    scale: float | None = None

    @property
    def nmode(self) -> int:
        return len(self.squeezing)

    def circuit(self, hbar: float = 2.0) -> GaussianCircuit:
        cir = GaussianCircuit(self.nmode, hbar)
        for i, r in enumerate(self.squeezing):
            cir.s(i, float(r), self.phi)
        cir.interferometer(self.unitary)
        return cir

    def state(self, hbar: float = 2.0) -> GaussianState:
        return self.circuit(hbar).run()

    def mean_photon(self) -> float:
        return float(np.sum(np.sinh(np.asarray(self.squeezing)) ** 2))


def gbs(squeezing: Sequence[float], unitary=None, detector: str = "pnrd") -> GBSSpec:
    """Plain GBS device description; ``unitary`` defaults to the identity."""
    r = np.asarray(squeezing, dtype=float)
    u = np.eye(len(r), dtype=complex) if unitary is None else np.asarray(unitary, dtype=complex)
    if not np.all(np.isfinite(r)):
        raise ValueError("squeezing must be finite")
    if u.shape != (len(r), len(r)) or np.max(np.abs(u.conj().T @ u - np.eye(len(r)))) > 1e-10:
        raise ValueError("interferometer must be a unitary matching the number of modes")
    return GBSSpec(r, u, 0.0, detector)


def gbs_from_graph(adjacency, mean_photon: float | None = None, scale: float | None = None, detector: str = "pnrd") -> GBSSpec:
    """Encode a graph into a GBS device so that the state's ``A`` matrix is ``c (A ⊕ A)``.

    Takagi-decomposes ``A = U diag(lambda) U^T`` and sets ``r_i = artanh(c lambda_i)``
    with squeezing phase ``pi``.  ``scale`` fixes ``c``; otherwise ``c`` is found by
    bisection so that the total mean photon number equals ``mean_photon``
    (default: one photon per mode).

    Raises
    ------
    ValueError
        For asymmetric input or an infeasible scale (``c lambda_max >= 1``).
    """
    a = np.asarray(adjacency, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n) or np.max(np.abs(a - a.T)) > 1e-10:
        raise ValueError("adjacency matrix must be square and symmetric")
    lam, u = takagi(a)
    lmax = float(np.max(lam)) if n else 0.0
    if lmax <= 1e-14:
        return GBSSpec(np.zeros(n), np.eye(n, dtype=complex), np.pi, detector, 0.0)
    if scale is None:
        target = float(n if mean_photon is None else mean_photon)
        if target <= 0:
            raise ValueError("mean photon number must be positive")

        def photons(c):
            t = (c * lam) ** 2
            return float(np.sum(t / (1 - t)))

        lo, hi = 0.0, 1.0 / lmax
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if photons(mid) < target:
                lo = mid
            else:
                hi = mid
        scale = 0.5 * (lo + hi)
    if scale <= 0 or scale * lmax >= 1:
        raise ValueError(f"infeasible graph scale {scale}: need 0 < c * lambda_max < 1")
    r = np.arctanh(scale * lam)
    return GBSSpec(r, u, np.pi, detector, float(scale))
