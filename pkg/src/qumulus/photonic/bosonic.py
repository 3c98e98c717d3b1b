"""Non-Gaussian states as linear combinations of Gaussians in phase space.

A state is a list of components ``(w_k, V_k, mu_k)`` whose Wigner function is
``W(xi) = sum_k w_k G(xi; mu_k, V_k)``.  Weights and means may be complex:
coherences such as ``|alpha><-alpha|`` in a cat state contribute Gaussians
with complex centres, and they always come in conjugate pairs so ``W`` is
real.  Gaussian gates act on every component; homodyne conditioning
reweights components by their likelihood of the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erf

from ..errors import NumericalGuardError
from ..rng import as_generator
from .gaussian import SymplecticOp, symplectic_of

#: Default hard cap on the number of mixture components.
MAX_COMPONENTS = 100_000


@dataclass
class BosonicState:
    """Weighted Gaussian mixture on ``m`` modes (``xxpp`` ordering).

    Attributes
    ----------
    weights : ndarray, shape (K,), complex
    covs : ndarray, shape (K, 2m, 2m), real
    means : ndarray, shape (K, 2m), complex
    hbar : float
    """

    weights: np.ndarray
    covs: np.ndarray
    means: np.ndarray
    hbar: float = 2.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex).reshape(-1)
        self.means = np.asarray(self.means, dtype=complex)
        self.covs = np.asarray(self.covs, dtype=float)
        k = self.weights.shape[0]
        if self.means.ndim != 2 or self.means.shape[0] != k or self.covs.shape != (k,) + (self.means.shape[1],) * 2:
            raise ValueError("inconsistent component shapes")
        if self.means.shape[1] % 2:
            raise ValueError("phase-space dimension must be even")

    # ------------------------------------------------------------ basics
    @property
    def nmode(self) -> int:
        return self.means.shape[1] // 2

    @property
    def ncomponent(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "BosonicState":
        return BosonicState(self.weights.copy(), self.covs.copy(), self.means.copy(), self.hbar)

    def total_weight(self) -> complex:
        return complex(np.sum(self.weights))

    def normalized(self) -> "BosonicState":
        out = self.copy()
        out.weights = out.weights / out.weights.sum()
        return out

    def reduced(self, modes: Sequence[int]) -> "BosonicState":
        """Marginal on ``modes``; components with identical marginals are not merged."""
        modes = np.asarray(list(modes), dtype=int)
        idx = np.concatenate([modes, modes + self.nmode])
        return BosonicState(self.weights, self.covs[:, idx[:, None], idx[None, :]], self.means[:, idx], self.hbar)

    # ----------------------------------------------------------- Wigner
    def wigner(self, wire: int, xvec: Sequence[float], pvec: Sequence[float]) -> np.ndarray:
        """Single-mode Wigner function of ``wire`` on a grid, shape ``(len(pvec), len(xvec))``."""
        red = self.reduced([wire])
        x, p = np.meshgrid(np.asarray(xvec, float), np.asarray(pvec, float))
        pts = np.stack([x.ravel(), p.ravel()], axis=1)
        return np.real(_mixture_density(red, pts)).reshape(x.shape)

    def wigner_complex(self, wire: int, xvec, pvec) -> np.ndarray:
        """As :meth:`wigner` but keeping the (ideally vanishing) imaginary part."""
        red = self.reduced([wire])
        x, p = np.meshgrid(np.asarray(xvec, float), np.asarray(pvec, float))
        pts = np.stack([x.ravel(), p.ravel()], axis=1)
        return _mixture_density(red, pts).reshape(x.shape)

    def marginal(self, wire: int, xs: Sequence[float], phi: float = 0.0) -> np.ndarray:
        """Density of the quadrature ``x cos(phi) + p sin(phi)`` of ``wire``."""
        mu, var = self._quadrature(wire, phi)
        xs = np.asarray(xs, float)[:, None]
        g = np.exp(-0.5 * (xs - mu[None, :]) ** 2 / var[None, :]) / np.sqrt(2 * np.pi * var[None, :])
        return np.real(g @ self.weights)

    def _quadrature(self, wire: int, phi: float) -> tuple[np.ndarray, np.ndarray]:
        m = self.nmode
        c, s = np.cos(phi), np.sin(phi)
        vec = np.zeros(2 * m)
        vec[wire], vec[wire + m] = c, s
        mu = self.means @ vec
        var = np.einsum("i,kij,j->k", vec, self.covs, vec)
        return mu, var

    def parity(self) -> float:
        """``<(-1)^n>`` of a single-mode state, ``pi hbar W(0, 0)``."""
        if self.nmode != 1:
            raise ValueError("parity is defined here for one mode")
        return float(np.pi * self.hbar * self.wigner(0, [0.0], [0.0])[0, 0])


def _mixture_density(state: BosonicState, pts: np.ndarray) -> np.ndarray:
    """Complex mixture density at real points ``pts`` of shape ``(P, 2m)``."""
    out = np.zeros(pts.shape[0], dtype=complex)
    n = state.means.shape[1]
    # components often share a covariance; group them to reuse the inverse
    keys: dict[bytes, list[int]] = {}
    for i, v in enumerate(state.covs):
        keys.setdefault(np.round(v, 12).tobytes(), []).append(i)
    for idx in keys.values():
        v = state.covs[idx[0]]
        inv = np.linalg.inv(v)
        norm = 1.0 / np.sqrt((2 * np.pi) ** n * np.linalg.det(v))
        mu = state.means[idx]
        w = state.weights[idx]
        d = pts[:, None, :] - mu[None, :, :]
        quad = np.einsum("pki,ij,pkj->pk", d, inv, d)
        out += norm * (np.exp(-0.5 * quad) @ w)
    return out


# ---------------------------------------------------------------- products
def tensor(states: Iterable[BosonicState]) -> BosonicState:
    """Tensor product of mixtures; component counts multiply."""
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    hbar = states[0].hbar
    total = int(np.prod([s.ncomponent for s in states]))
    if total > MAX_COMPONENTS:
        raise NumericalGuardError(f"product has {total} components (cap {MAX_COMPONENTS})")
    w = np.ones(1, dtype=complex)
    covs = np.zeros((1, 0, 0))
    means = np.zeros((1, 0), dtype=complex)
    for s in states:
        if s.hbar != hbar:
            raise ValueError("states use different hbar conventions")
        w, covs, means = _pair_product(w, covs, means, s)
    # each factor contributes an (x..., p...) block; regroup into global xxpp order
    xs, ps, offs = [], [], 0
    for s in states:
        k = s.nmode
        xs += range(offs, offs + k)
        ps += range(offs + k, offs + 2 * k)
        offs += 2 * k
    order = np.array(xs + ps)
    covs = covs[:, order[:, None], order[None, :]]
    means = means[:, order]
    return BosonicState(w, covs, means, hbar)


def _pair_product(w, covs, means, s: BosonicState):
    k1, k2 = w.shape[0], s.ncomponent
    d1, d2 = means.shape[1], s.means.shape[1]
    nw = (w[:, None] * s.weights[None, :]).reshape(-1)
    nm = np.concatenate(
        [np.repeat(means, k2, axis=0), np.tile(s.means, (k1, 1))], axis=1
    )
    nc = np.zeros((k1 * k2, d1 + d2, d1 + d2))
    nc[:, :d1, :d1] = np.repeat(covs, k2, axis=0)
    nc[:, d1:, d1:] = np.tile(s.covs, (k1, 1, 1))
    return nw, nc, nm


# ---------------------------------------------------------------- single-mode states
def vacuum(hbar: float = 2.0) -> BosonicState:
    return BosonicState([1.0], [hbar / 2 * np.eye(2)], [[0.0, 0.0]], hbar)


def coherent(alpha: complex, hbar: float = 2.0) -> BosonicState:
    a = complex(alpha)
    mu = np.sqrt(2 * hbar) * np.array([a.real, a.imag])
    return BosonicState([1.0], [hbar / 2 * np.eye(2)], [mu], hbar)


def squeezed(r: float, phi: float = 0.0, hbar: float = 2.0) -> BosonicState:
    st = vacuum(hbar)
    return evolve(st, symplectic_of("s", [0], [r, phi], 1, hbar))


def _coherence_component(beta: complex, gamma: complex, hbar: float) -> tuple[complex, np.ndarray]:
    """Weight and complex centre of the Wigner function of ``|beta><gamma|``."""
    overlap = np.exp(-0.5 * abs(beta) ** 2 - 0.5 * abs(gamma) ** 2 + np.conj(gamma) * beta)
    scale = np.sqrt(2 * hbar)
    mu = scale * np.array([(beta + np.conj(gamma)) / 2, (beta - np.conj(gamma)) / 2j])
    return complex(overlap), mu


def cat(r: float, theta: float = 0.0, p: float = 0.0, hbar: float = 2.0) -> BosonicState:
    """Cat state ``(|alpha> + e^{i pi p} |-alpha>) / N`` with ``alpha = r e^{i theta}``.

    ``p = 0`` gives the even cat and ``p = 1`` the odd cat.
    """
    if r < 0:
        raise ValueError("cat amplitude must be non-negative")
    alpha = r * np.exp(1j * theta)
    phase = np.exp(1j * np.pi * p)
    terms = [(alpha, alpha, 1.0), (-alpha, -alpha, 1.0), (alpha, -alpha, np.conj(phase)), (-alpha, alpha, phase)]
    ws, mus = [], []
    for beta, gamma, c in terms:
        ov, mu = _coherence_component(beta, gamma, hbar)
        ws.append(c * ov)
        mus.append(mu)
    ws = np.array(ws)
    ws = ws / ws.sum()
    return BosonicState(ws, np.repeat(hbar / 2 * np.eye(2)[None], 4, axis=0), np.array(mus), hbar)


@dataclass(frozen=True)
class GKPSpec:
    """Finite-energy GKP qubit ``cos(theta/2)|0> + e^{-i phi} sin(theta/2)|1>``.

    ``epsilon`` is the strength of the damping ``exp(-epsilon n)`` and
    components with ``|w| <= amp_cutoff`` (after damping, before
    normalisation) are dropped.
    """

    theta: float = 0.0
    phi: float = 0.0
    epsilon: float = 0.05
    amp_cutoff: float = 0.1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.amp_cutoff < 1:
            raise ValueError("amp_cutoff must lie in [0, 1)")


def _gkp_coefficients(l: np.ndarray, m: np.ndarray, theta: float, phi: float) -> np.ndarray:
    """Lattice coefficients of the ideal GKP Wigner comb at half-lattice site ``(l, m)``."""
    c2, s2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    st = np.sin(theta)
    l4, m4 = l % 4, m % 4
    t = np.zeros(l.shape, dtype=complex)
    t += (l % 2 == 0) & (m % 2 == 0)
    t += ((l4 == 0) & (m % 2 == 1)) * (c2 - s2)
    t += ((l4 == 2) & (m % 2 == 1)) * (s2 - c2)
    t += ((l % 2 == 1) & (m4 == 0)) * st * np.cos(phi)
    t -= ((l % 2 == 1) & (m4 == 2)) * st * np.cos(phi)
    t -= (((l4 == 3) & (m4 == 3)) | ((l4 == 1) & (m4 == 1))) * st * np.sin(phi)
    t += (((l4 == 3) & (m4 == 1)) | ((l4 == 1) & (m4 == 3))) * st * np.sin(phi)
    return t


def gkp(spec: GKPSpec = GKPSpec(), hbar: float = 2.0) -> BosonicState:
    """Finite-energy GKP state as a comb of Gaussians.

    The ideal comb places signed deltas at ``x = l sqrt(pi hbar)/2``,
    ``p = m sqrt(pi hbar)/2``.  Damping by ``exp(-epsilon n)`` contracts the
    centres by ``2 e^-eps / (1 + e^-2eps)``, gives each peak covariance
    ``(hbar/2) tanh(eps) I`` and an envelope ``exp(-pi/4 (l^2 + m^2) tanh(eps))``.
    """
    eps = spec.epsilon
    te = np.tanh(eps)
    cut = max(spec.amp_cutoff, 1e-300)
    zmax = int(np.ceil(np.sqrt(-4 / np.pi * np.log(cut) / te)))
    rng = np.arange(-zmax, zmax + 1)
    l, m = np.meshgrid(rng, rng, indexing="ij")
    l, m = l.ravel(), m.ravel()
    w = _gkp_coefficients(l, m, spec.theta, spec.phi) * np.exp(-np.pi / 4 * (l**2 + m**2) * te)
    keep = np.abs(w) > spec.amp_cutoff
    if not np.any(keep):
        raise ValueError("amp_cutoff removes every GKP component")
    w = w[keep]
    damping = 2 * np.exp(-eps) / (1 + np.exp(-2 * eps))
    means = np.stack([l[keep], m[keep]], axis=1) * np.sqrt(np.pi * hbar) / 2 * damping
    covs = np.repeat((hbar / 2 * te * np.eye(2))[None], len(w), axis=0)
    return BosonicState(w / w.sum(), covs, means.astype(complex), hbar)


# ---------------------------------------------------------------- dynamics
def evolve(state: BosonicState, op: SymplecticOp) -> BosonicState:
    """Apply an affine symplectic map to every component."""
    s = op.S
    covs = np.einsum("ij,kjl,ml->kim", s, state.covs, s)
    means = state.means @ s.T + op.shift[None, :]
    return BosonicState(state.weights.copy(), covs, means, state.hbar)


def apply_loss(state: BosonicState, wire: int, transmissivity: float) -> BosonicState:
    eta = float(transmissivity)
    if not 0.0 <= eta <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    m = state.nmode
    x = np.eye(2 * m)
    idx = [wire, wire + m]
    x[idx, idx] = np.sqrt(eta)
    y = np.zeros((2 * m, 2 * m))
    y[idx, idx] = (1 - eta) * state.hbar / 2
    covs = np.einsum("ij,kjl,ml->kim", x, state.covs, x) + y[None]
    return BosonicState(state.weights.copy(), covs, state.means @ x.T, state.hbar)


def _rotated(state: BosonicState, wire: int, phi: float) -> BosonicState:
    if not phi:
        return state
    return evolve(state, symplectic_of("r", [wire], [-phi], state.nmode, state.hbar))


def window_probability(state: BosonicState, wire: int, lo: float, hi: float, phi: float = 0.0) -> float:
    """Probability that the homodyne outcome of ``wire`` lies in ``[lo, hi]``."""
    mu, var = state._quadrature(wire, phi)
    sd = np.sqrt(2 * var)
    cdf = 0.5 * (erf((hi - mu) / sd) - erf((lo - mu) / sd))
    return float(np.real(np.sum(state.weights * cdf)))


def condition_homodyne(
    state: BosonicState,
    wire: int,
    value: float | None = None,
    window: tuple[float, float] | None = None,
    phi: float = 0.0,
) -> tuple[BosonicState, float]:
    """Condition on a homodyne outcome of ``wire`` and remove that mode.

    Parameters
    ----------
    value : float, optional
        Exact outcome; the returned probability is then the outcome density.
    window : (lo, hi), optional
        Post-selection window.  The state is conditioned at its midpoint and
        the returned probability is the integrated acceptance.  Defaults to
        ``±0.001 sqrt(hbar)`` around zero when neither argument is given.
    phi : float
        Quadrature angle; ``0`` measures ``x`` and ``pi/2`` measures ``p``.

    Raises
    ------
    NumericalGuardError
        If the acceptance vanishes.
    """
    if value is not None and window is not None:
        raise ValueError("give either value or window, not both")
    if value is None and window is None:
        h = 1e-3 * np.sqrt(state.hbar)
        window = (-h, h)
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        if not hi > lo:
            raise ValueError("homodyne window must be non-empty")
        accept = window_probability(state, wire, lo, hi, phi)
        q = 0.5 * (lo + hi)
    else:
        q = float(value)
        accept = float(state.marginal(wire, [q], phi)[0])
    if not accept > 1e-300:
        raise NumericalGuardError("homodyne post-selection has zero acceptance")
    rot = _rotated(state, wire, phi)
    m = rot.nmode
    a = wire
    rest = [k for k in range(m) if k != wire]
    b = np.array(rest + [k + m for k in rest], dtype=int)
    va = rot.covs[:, a, a]
    c = rot.covs[:, b, a]
    mu_a = rot.means[:, a]
    like = np.exp(-0.5 * (q - mu_a) ** 2 / va) / np.sqrt(2 * np.pi * va)
    w = rot.weights * like
    w = w / w.sum()
    gain = c / va[:, None]
    covs = rot.covs[:, b[:, None], b[None, :]] - np.einsum("ki,kj->kij", gain, c)
    means = rot.means[:, b] + gain * (q - mu_a)[:, None]
    return BosonicState(w, covs, means, state.hbar), accept


def sample_homodyne(state: BosonicState, wire: int, shots: int, phi: float = 0.0, rng=None) -> np.ndarray:
    """Draw homodyne outcomes by inverting the exact mixture CDF on a fine grid."""
    mu, var = state._quadrature(wire, phi)
    sd = np.sqrt(var)
    lo = float(np.min(mu.real - 12 * sd))
    hi = float(np.max(mu.real + 12 * sd))
    grid = np.linspace(lo, hi, 40001)
    cdf = np.real(0.5 * (1 + erf((grid[:, None] - mu[None, :]) / (np.sqrt(2) * sd[None, :]))) @ state.weights)
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, None))
    cdf /= cdf[-1]
    gen = as_generator(rng, "bosonic.homodyne")
    return np.interp(gen.random(int(shots)), cdf, grid)


def marginal_peaks(state: BosonicState, wire: int = 0, phi: float = 0.0, span: float = 12.0, npts: int = 4001, rel: float = 0.02) -> np.ndarray:
    """Positions of the local maxima of a quadrature marginal above ``rel`` of its maximum."""
    xs = np.linspace(-span, span, npts)
    f = state.marginal(wire, xs, phi)
    top = f.max()
    idx = [i for i in range(1, npts - 1) if f[i] > f[i - 1] and f[i] >= f[i + 1] and f[i] > rel * top]
    return xs[idx]


# ---------------------------------------------------------------- circuit
class BosonicCircuit:
    """Circuit builder for the Gaussian-mixture backend.

    Every mode starts in vacuum unless :meth:`cat`, :meth:`gkp` or
    :meth:`init` replaces its state; gates follow in program order.
    """

    def __init__(self, nmode: int, init_state="vac", hbar: float = 2.0):
        self.nmode = int(nmode)
        self.hbar = float(hbar)
        if isinstance(init_state, str):
            if init_state != "vac":
                raise ValueError(f"unknown initial state {init_state!r}")
            self.inits: list[BosonicState] = [vacuum(hbar) for _ in range(self.nmode)]
        else:
            inits = list(init_state)
            if len(inits) != self.nmode or any(s.nmode != 1 for s in inits):
                raise ValueError("need one single-mode state per mode")
            self.inits = [s.copy() for s in inits]
        self.ops: list[tuple] = []
        self.homodyne_spec: tuple[int, float] | None = None

    def init(self, wire: int, state: BosonicState):
        if state.nmode != 1:
            raise ValueError("initial states are single-mode")
        self.inits[int(wire)] = state.copy()
        return self

    def cat(self, wires: int, r: float, theta: float = 0.0, p: float = 0.0):
        return self.init(wires, cat(r, theta, p, self.hbar))

    def gkp(self, wires: int, theta: float = 0.0, phi: float = 0.0, epsilon: float = 0.05, amp_cutoff: float = 0.1):
        return self.init(wires, gkp(GKPSpec(theta, phi, epsilon, amp_cutoff), self.hbar))

    def _gate(self, name, wires, params):
        symplectic_of(name, wires, params, self.nmode, self.hbar)
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

    def loss(self, wires, transmissivity: float):
        self.ops.append(("loss", int(wires), float(transmissivity)))
        return self

    def homodyne(self, wires: int, phi: float = 0.0):
        self.homodyne_spec = (int(wires), float(phi))
        return self

    def homodyne_x(self, wires: int):
        return self.homodyne(wires, 0.0)

    def homodyne_p(self, wires: int):
        return self.homodyne(wires, np.pi / 2)

    def run(self) -> BosonicState:
        st = tensor(self.inits)
        for op in self.ops:
            if op[0] == "gate":
                st = evolve(st, symplectic_of(op[1], op[2], op[3], self.nmode, self.hbar))
            else:
                st = apply_loss(st, op[1], op[2])
        return st

    __call__ = run

    def measure_homodyne(self, shots: int = 1024, seed=None) -> np.ndarray:
        if self.homodyne_spec is None:
            raise ValueError("no homodyne measurement registered")
        wire, phi = self.homodyne_spec
        return sample_homodyne(self.run(), wire, shots, phi, seed)

    def postselect(self, value: float | None = None, window: tuple[float, float] | None = None):
        """Condition the output on the registered homodyne measurement."""
        if self.homodyne_spec is None:
            raise ValueError("no homodyne measurement registered")
        wire, phi = self.homodyne_spec
        return condition_homodyne(self.run(), wire, value, window, phi)


def breeding_step(a: BosonicState, b: BosonicState, window: tuple[float, float] | None = None):
    """One breeding round: 50:50 splitter on ``a ⊗ b`` then p-homodyne of mode 0 near zero."""
    cir = BosonicCircuit(2, [a, b], a.hbar)
    cir.bs([0, 1], [np.pi / 4, 0.0])
    cir.homodyne_p(0)
    return cir.postselect(window=window)


def breeding_demo(r: float = 1.5, alpha: float = 2.0, hbar: float = 2.0):
    """The two-round breeding workflow starting from squeezed even cats.

    Returns
    -------
    list of BosonicState
        ``[input squeezed cat, first-round output, second-round output]``.
    """
    alpha_prime = (np.cosh(r) + np.sinh(r)) * alpha / 2
    cat0 = evolve(cat(alpha_prime, 0.0, 0.0, hbar), symplectic_of("s", [0], [r, 0.0], 1, hbar))
    first, _ = breeding_step(cat0, cat0)
    second, _ = breeding_step(first, first)
    return [cat0, first, second]
