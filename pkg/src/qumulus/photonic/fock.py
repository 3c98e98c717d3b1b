"""Photonic circuits in the Fock representation.

Two execution modes share one builder:

* **basis mode** (``cutoff=None``) -- only passive linear optics; each input
  basis state is propagated exactly through the composite mode-transfer
  matrix with permanents, so photon number is conserved with no truncation.
* **tensor mode** (``cutoff=d``) -- the state is a rank-``m`` tensor with
  ``d`` levels per mode and gates (including squeezers and displacements) are
  contracted into it.  Norm that leaks past the cutoff is reported by
  :attr:`FockTensorState.truncation_loss`; it is never silently renormalised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..linalg import beamsplitter_unitary, clements_decompose, mzi_matrix
from ..rng import as_generator
from . import fockmath as fm

Pattern = tuple[int, ...]

#: Post-selection events at or below this probability count as impossible.
ZERO_PROB = 1e-14


def ket(pattern: Sequence[int]) -> str:
    """Render an occupation pattern as ``|n1n2...>``.

    Occupations above 9 are comma-separated to stay unambiguous.
    """
    vals = [int(x) for x in pattern]
    if any(v > 9 for v in vals):
        return "|" + ",".join(str(v) for v in vals) + ">"
    return "|" + "".join(str(v) for v in vals) + ">"


def bs_h_unitary(theta: float) -> np.ndarray:
    """Real Hadamard-type splitter ``[[c, s], [s, -c]]`` with ``c = cos(theta/2)``."""
    t = theta / 2
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


@dataclass
class FockOp:
    """One operation of a photonic circuit."""

    name: str
    wires: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = None  # mode-transfer matrix for passive ops

    @property
    def passive(self) -> bool:
        return self.matrix is not None


@dataclass
class FockTensorState:
    """Result of a tensor-mode run.

    Attributes
    ----------
    tensor : ndarray
        Pure: amplitudes ``<n_1 ... n_m|psi>``, shape ``(d,) * m``.
        Mixed: density matrix ``<n|rho|n'>`` with ket axes first, shape ``(d,) * 2m``.
    truncation_loss : float
        Probability that leaked past the cutoff (``1 - norm``).
    mixed : bool
    """

    tensor: np.ndarray
    truncation_loss: float
    mixed: bool = False

    @property
    def cutoff(self) -> int:
        return self.tensor.shape[0]

    @property
    def nmode(self) -> int:
        return self.tensor.ndim // 2 if self.mixed else self.tensor.ndim

    def amplitude(self, pattern: Sequence[int]) -> complex:
        if self.mixed:
            raise ValueError("a mixed state has no amplitudes")
        return complex(self.tensor[fm.basis_index(pattern, self.cutoff)])

    def probability(self, pattern: Sequence[int]) -> float:
        idx = fm.basis_index(pattern, self.cutoff)
        if self.mixed:
            return float(np.real(self.tensor[idx + idx]))
        return abs(complex(self.tensor[idx])) ** 2

    def probabilities(self) -> np.ndarray:
        """Photon-number distribution as a ``(d,) * m`` array."""
        if not self.mixed:
            return np.abs(self.tensor) ** 2
        d, m = self.cutoff, self.nmode
        flat = self.tensor.reshape(d**m, d**m)
        return np.real(np.diagonal(flat)).reshape((d,) * m)

    def density_matrix(self) -> np.ndarray:
        """Full density matrix, shape ``(d^m, d^m)``."""
        d, m = self.cutoff, self.nmode
        if self.mixed:
            return self.tensor.reshape(d**m, d**m)
        v = self.tensor.reshape(-1)
        return np.outer(v, v.conj())

    def reduced_dm(self, mode: int) -> np.ndarray:
        """Reduced density matrix of one mode."""
        d, m = self.cutoff, self.nmode
        if not self.mixed:
            t = np.moveaxis(self.tensor, mode, 0).reshape(d, -1)
            return t @ t.conj().T
        t = np.moveaxis(self.tensor, (mode, m + mode), (0, 1)).reshape(d, d, d ** (m - 1), d ** (m - 1))
        return np.einsum("abkk->ab", t)

    def mean_photon(self, mode: int) -> float:
        rho = self.reduced_dm(mode)
        return float(np.real(np.sum(np.arange(self.cutoff) * np.diag(rho))))

    def postselect(self, modes: Sequence[int], values: Sequence[int], renormalize: bool = True):
        """Project ``modes`` onto photon numbers ``values``.

        Returns
        -------
        FockTensorState, float
            Conditional state of the remaining modes and the success probability.

        Raises
        ------
        ValueError
            If the event has zero probability.
        """
        m = self.nmode
        idx: list = [slice(None)] * self.tensor.ndim
        for k, v in zip(modes, values):
            fm.basis_index([v], self.cutoff)
            idx[k] = int(v)
            if self.mixed:
                idx[m + k] = int(v)
        sub = self.tensor[tuple(idx)].copy()
        if self.mixed:
            rest = m - len(modes)
            d = self.cutoff
            prob = float(np.real(np.trace(sub.reshape(d**rest, d**rest))))
        else:
            prob = float(np.sum(np.abs(sub) ** 2))
        if prob <= ZERO_PROB:
            raise ValueError("post-selection event has zero probability")
        if renormalize:
            sub = sub / (prob if self.mixed else np.sqrt(prob))
        return FockTensorState(sub, 0.0 if renormalize else self.truncation_loss, self.mixed), prob


class QumodeCircuit:
    """Photonic circuit on ``nmode`` modes in the Fock representation.

    Parameters
    ----------
    nmode : int
    init_state : sequence of int, mapping, or "vac"
        Occupation pattern, a superposition ``{pattern: amplitude}`` or vacuum.
    cutoff : int, optional
        Enables tensor mode with ``cutoff`` levels per mode.  Without it the
        circuit runs in basis mode and only passive gates are allowed.
    """

    def __init__(self, nmode: int, init_state="vac", cutoff: int | None = None):
        if nmode < 1:
            raise ValueError("need at least one mode")
        self.nmode = int(nmode)
        self.cutoff = None if cutoff is None else int(cutoff)
        if self.cutoff is not None and self.cutoff < 1:
            raise ValueError("cutoff must be positive")
        self.init = self._normalise_init(init_state)
        self.ops: list[FockOp] = []

    # ------------------------------------------------------------- builders
    def _normalise_init(self, init) -> dict[Pattern, complex]:
        if isinstance(init, str):
            if init != "vac":
                raise ValueError(f"unknown initial state {init!r}")
            init = {(0,) * self.nmode: 1.0}
        elif not isinstance(init, Mapping):
            init = {tuple(int(x) for x in init): 1.0}
        out = {}
        for pat, amp in init.items():
            pat = tuple(int(x) for x in pat)
            if len(pat) != self.nmode or any(x < 0 for x in pat):
                raise ValueError(f"invalid occupation pattern {pat}")
            if self.cutoff is not None and max(pat) >= self.cutoff:
                raise ValueError(f"pattern {pat} exceeds cutoff {self.cutoff}")
            out[pat] = complex(amp)
        norm = np.sqrt(sum(abs(a) ** 2 for a in out.values()))
        if norm == 0:
            raise ValueError("initial superposition has zero norm")
        return {p: a / norm for p, a in out.items()}

    def _wires(self, wires, k: int) -> tuple[int, ...]:
        w = (int(wires),) if np.isscalar(wires) else tuple(int(x) for x in wires)
        if len(w) != k:
            raise ValueError(f"expected {k} wire(s), got {w}")
        for x in w:
            if not 0 <= x < self.nmode:
                raise ValueError(f"wire {x} out of range")
        if len(set(w)) != len(w):
            raise ValueError(f"repeated wires {w}")
        return w

    def _passive(self, name, wires, params, u):
        self.ops.append(FockOp(name, wires, tuple(float(p) for p in params), np.asarray(u, dtype=complex)))

    def ps(self, wires, inputs: float = 0.0):
        """Phase shifter ``exp(i phi n)``."""
        w = self._wires(wires, 1)
        self._passive("ps", w, (inputs,), [[np.exp(1j * float(inputs))]])

    def bs(self, wires, inputs=(np.pi / 4, 0.0)):
        """Beam splitter ``[[cos t, -e^{-i p} sin t], [e^{i p} sin t, cos t]]``."""
        w = self._wires(wires, 2)
        theta, phi = (list(np.atleast_1d(inputs)) + [0.0])[:2]
        self._passive("bs", w, (theta, phi), beamsplitter_unitary(theta, phi))

    def bs_h(self, wires, inputs: float = np.pi / 2):
        """Real Hadamard-type splitter, see :func:`bs_h_unitary`."""
        w = self._wires(wires, 2)
        self._passive("bs_h", w, (inputs,), bs_h_unitary(float(inputs)))

    def h(self, wires):
        """Balanced Hadamard splitter ``[[1, 1], [1, -1]] / sqrt(2)`` (dual-rail H)."""
        w = self._wires(wires, 2)
        self._passive("h", w, (), bs_h_unitary(np.pi / 2))

    def mzi(self, wires, inputs=(np.pi / 2, np.pi)):
        """Mach-Zehnder cell (see :func:`qumulus.linalg.mzi_matrix`)."""
        w = self._wires(wires, 2)
        theta, phi = inputs
        self._passive("mzi", w, (theta, phi), mzi_matrix(theta, phi))

    def any(self, unitary, wires=None):
        """Arbitrary passive network on ``wires`` (default: all modes)."""
        u = np.asarray(unitary, dtype=complex)
        wires = tuple(range(self.nmode)) if wires is None else self._wires(wires, u.shape[0])
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise ValueError("passive network matrix is not unitary")
        self._passive("any", wires, (), u)

    def clements(self, unitary):
        """Implement ``unitary`` as a rectangular MZI mesh plus output phases."""
        mesh = clements_decompose(unitary)
        if mesh.nmode != self.nmode:
            raise ValueError("Clements unitary must act on every mode")
        for cell in mesh.mzis:
            self.mzi([cell.mode, cell.mode + 1], (cell.theta, cell.phi))
        for k, ph in enumerate(mesh.output_phases):
            self.ps(k, float(ph))
        return mesh

    def dc(self, wires, theta: float = np.pi / 4):
        """Directional coupler ``[[cos t, i sin t], [i sin t, cos t]]``."""
        w = self._wires(wires, 2)
        c, sn = np.cos(theta), np.sin(theta)
        self._passive("dc", w, (theta,), [[c, 1j * sn], [1j * sn, c]])

    def loss(self, wires, transmissivity: float):
        """Pure-loss channel; switches the tensor run to a density matrix."""
        if not 0.0 <= transmissivity <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")
        self._active("loss", self._wires(wires, 1), (transmissivity,))

    def _active(self, name, wires, params):
        if self.cutoff is None:
            raise ValueError(f"gate {name!r} needs tensor mode (set a cutoff)")
        self.ops.append(FockOp(name, wires, tuple(float(p) for p in params)))

    def s(self, wires, r: float = 0.0, theta: float = 0.0):
        """Squeezer ``S(r, theta)``."""
        self._active("s", self._wires(wires, 1), (r, theta))

    def d(self, wires, r: float = 0.0, theta: float = 0.0):
        """Displacement ``D(r e^{i theta})``."""
        self._active("d", self._wires(wires, 1), (r, theta))

    def kerr(self, wires, kappa: float = 0.0):
        self._active("kerr", self._wires(wires, 1), (kappa,))

    # ------------------------------------------------------------- execution
    def unitary(self) -> np.ndarray:
        """Composite mode-transfer matrix of the passive part of the circuit."""
        u = np.eye(self.nmode, dtype=complex)
        for op in self.ops:
            if not op.passive:
                raise ValueError("circuit contains non-passive gates")
            g = np.eye(self.nmode, dtype=complex)
            idx = np.array(op.wires)
            g[np.ix_(idx, idx)] = op.matrix
            u = g @ u
        return u

    def run(self):
        """Execute the circuit.

        Returns
        -------
        dict or FockTensorState
            Basis mode: ``{pattern: amplitude}`` over every output pattern with
            the input photon number(s), lexicographically descending.
            Tensor mode: a :class:`FockTensorState`.
        """
        if self.cutoff is None:
            return self._run_basis()
        return self._run_tensor()

    __call__ = run

    def _run_basis(self) -> dict[Pattern, complex]:
        u = self.unitary()
        out: dict[Pattern, complex] = {}
        totals = sorted({sum(p) for p in self.init}, reverse=True)
        for n in totals:
            for pat in fm.patterns(self.nmode, n):
                amp = 0j
                for pin, a in self.init.items():
                    if sum(pin) == n:
                        amp += a * fm.fock_amplitude(u, pin, pat)
                out[pat] = amp
        return out

    def initial_tensor(self) -> np.ndarray:
        t = np.zeros((self.cutoff,) * self.nmode, dtype=complex)
        for pat, a in self.init.items():
            t[pat] = a
        return t

    def _run_tensor(self) -> FockTensorState:
        t = self.initial_tensor()
        if not any(op.name == "loss" for op in self.ops):
            for op in self.ops:
                t = apply_fock_op(t, op, self.cutoff)
            loss = max(0.0, 1.0 - float(np.sum(np.abs(t) ** 2)))
            return FockTensorState(t, loss)
        m, d = self.nmode, self.cutoff
        rho = np.multiply.outer(t, t.conj())
        for op in self.ops:
            if op.name == "loss":
                kraus = fm.loss_kraus(op.params[0], d)
                w = op.wires[0]
                acc = np.zeros_like(rho)
                for k in kraus:
                    acc += apply_single_mode(apply_single_mode(rho, k, w), k.conj(), m + w)
                rho = acc
            else:
                rho = apply_fock_op(rho, op, d)
                rho = apply_fock_op(rho.conj(), _shifted(op, m), d).conj()
        norm = float(np.real(np.trace(rho.reshape(d**m, d**m))))
        return FockTensorState(rho, max(0.0, 1.0 - norm), mixed=True)

    # ---------------------------------------------------------------- readout
    def get_amplitude(self, out: Sequence[int], inp: Sequence[int] | None = None) -> complex:
        """Amplitude ``<out|U|inp>`` (basis mode); ``inp`` defaults to the initial state."""
        u = self.unitary()
        if inp is not None:
            return fm.fock_amplitude(u, inp, out)
        return sum(a * fm.fock_amplitude(u, p, out) for p, a in self.init.items())

    def get_prob(self, out: Sequence[int], inp: Sequence[int] | None = None) -> float:
        return abs(self.get_amplitude(out, inp)) ** 2

    def measure(self, shots: int = 1024, seed=None) -> dict[Pattern, int]:
        """Sample photon-number patterns from the output distribution."""
        res = self.run()
        if isinstance(res, FockTensorState):
            probs = np.clip(res.probabilities().ravel(), 0.0, None)
            keys = list(fm.all_patterns_upto(self.nmode, self.cutoff))
        else:
            keys = list(res)
            probs = np.array([abs(a) ** 2 for a in res.values()])
        rng = as_generator(seed, "fock.measure")
        counts = rng.multinomial(int(shots), probs / probs.sum())
        out = {keys[i]: int(c) for i, c in enumerate(counts) if c}
        return dict(sorted(out.items(), reverse=True))


def postselect(
    amplitudes: Mapping[Pattern, complex], rule: Callable[[Pattern], bool], renormalize: bool = True
) -> tuple[dict[Pattern, complex], float]:
    """Keep only patterns accepted by ``rule``.

    Returns
    -------
    kept : dict
        Accepted amplitudes, renormalised unless ``renormalize`` is false.
    success : float
        Total probability of the accepted patterns.

    Raises
    ------
    ValueError
        If no amplitude survives.
    """
    kept = {p: complex(a) for p, a in amplitudes.items() if rule(p)}
    success = float(sum(abs(a) ** 2 for a in kept.values()))
    if success <= ZERO_PROB:
        raise ValueError("post-selection event has zero probability")
    if renormalize:
        kept = {p: a / np.sqrt(success) for p, a in kept.items()}
    return kept, success


def postselect_distribution(
    dist: Mapping[Pattern, float], rule: Callable[[Pattern], bool]
) -> tuple[dict[Pattern, float], float]:
    """Condition a probability distribution on ``rule``.

    Returns the renormalised conditional distribution and the success probability.

    Raises
    ------
    ValueError
        If no probability mass satisfies ``rule``.
    """
    kept = {p: float(v) for p, v in dist.items() if rule(p)}
    success = sum(kept.values())
    if success <= ZERO_PROB:
        raise ValueError("post-selection event has zero probability")
    return {p: v / success for p, v in kept.items()}, success


def photon_sum_rule(groups: Sequence[Sequence[int]], totals: Sequence[int]) -> Callable[[Pattern], bool]:
    """Rule accepting patterns whose summed occupation over each group matches ``totals``."""
    groups = [tuple(g) for g in groups]

    def rule(p: Pattern) -> bool:
        return all(sum(p[i] for i in g) == t for g, t in zip(groups, totals))

    return rule


# ---------------------------------------------------------------- tensor ops
def apply_single_mode(t: np.ndarray, m: np.ndarray, mode: int) -> np.ndarray:
    """Contract a single-mode operator into axis ``mode``."""
    out = np.tensordot(m, t, axes=([1], [mode]))
    return np.moveaxis(out, 0, mode)


def apply_passive_two_mode(t: np.ndarray, u: np.ndarray, modes: Sequence[int], cutoff: int) -> np.ndarray:
    """Apply a two-mode passive gate block by block in total photon number."""
    a, b = modes
    d = cutoff
    moved = np.moveaxis(t, (a, b), (0, 1))
    rest = moved.shape[2:]
    flat = moved.reshape(d, d, -1)
    out = np.zeros_like(flat)
    for N, blk in enumerate(fm.passive_two_mode_blocks(u, d)):
        lo, hi = max(0, N - d + 1), min(N, d - 1)
        n0 = np.arange(lo, hi + 1)
        vec = flat[n0, N - n0, :]
        out[n0, N - n0, :] = blk @ vec
    return np.moveaxis(out.reshape((d, d) + rest), (0, 1), (a, b))


def apply_fock_op(t: np.ndarray, op: FockOp, cutoff: int) -> np.ndarray:
    """Apply one :class:`FockOp` to a Fock tensor."""
    d = cutoff
    if op.passive:
        if len(op.wires) == 1:
            return apply_single_mode(t, fm.phase_matrix(np.angle(op.matrix[0, 0]), d), op.wires[0])
        if len(op.wires) == 2:
            return apply_passive_two_mode(t, op.matrix, op.wires, d)
        # general passive network: decompose into two-mode cells
        mesh = clements_decompose(op.matrix)
        for cell in mesh.mzis:
            t = apply_passive_two_mode(
                t, mzi_matrix(cell.theta, cell.phi), (op.wires[cell.mode], op.wires[cell.mode + 1]), d
            )
        for k, ph in enumerate(mesh.output_phases):
            t = apply_single_mode(t, fm.phase_matrix(ph, d), op.wires[k])
        return t
    if op.name == "s":
        return apply_single_mode(t, fm.squeezing_matrix(op.params[0], op.params[1], d), op.wires[0])
    if op.name == "d":
        alpha = op.params[0] * np.exp(1j * op.params[1])
        return apply_single_mode(t, fm.displacement_matrix(alpha, d), op.wires[0])
    if op.name == "kerr":
        return apply_single_mode(t, fm.kerr_matrix(op.params[0], d), op.wires[0])
    raise ValueError(f"unknown Fock operation {op.name!r}")


def _shifted(op: FockOp, offset: int) -> FockOp:
    """The same operation acting on axes ``offset`` higher (density-matrix bra axes)."""
    return FockOp(op.name, tuple(w + offset for w in op.wires), op.params, op.matrix)


def mode_unitary(nmode: int, wires: Sequence[int], u: np.ndarray) -> np.ndarray:
    """Embed a passive matrix on ``wires`` into ``nmode`` modes."""
    g = np.eye(nmode, dtype=complex)
    idx = np.asarray(wires)
    g[np.ix_(idx, idx)] = u
    return g
