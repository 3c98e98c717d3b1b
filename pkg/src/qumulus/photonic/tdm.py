"""Time-domain multiplexed Gaussian circuits with delay loops.

A :class:`TDMProgram` describes one time step on ``nmode`` spatial modes.
A delay loop on a wire stores ``ntau`` pulses; at each step the wire's
current pulse meets the oldest stored pulse on a beam splitter
``bs(theta)``, the loop output picks up a phase ``phi`` and is stored, and the
wire carries on to later gates and finally to a homodyne detector.

:func:`run_tdm` iterates the step, carrying loop modes across steps and
measuring every spatial mode each step.  :func:`unroll` produces the
equivalent spatial circuit on ``nmode * nstep + sum(ntau)`` modes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..rng import as_generator
from .gaussian import GaussianCircuit, GaussianState, symplectic_of


@dataclass
class TDMOp:
    name: str
    wires: tuple[int, ...]
    params: tuple[float, ...]
    encode: bool = False
    ntau: int = 0  # delay loops only


@dataclass
class DelayLoop:
    """A delay loop attached to ``wire`` storing ``ntau`` pulses."""

    wire: int
    ntau: int
    offset: int  # index of the loop's first slot among all loop modes


class TDMProgram:
    """Single-step description of a time-multiplexed Gaussian circuit.

    Parameters
    ----------
    nmode : int
        Number of spatial modes (all of them are measured each step).
    hbar : float
    """

    def __init__(self, nmode: int, hbar: float = 2.0):
        self.nmode = int(nmode)
        self.hbar = float(hbar)
        self.ops: list[TDMOp] = []
        self.loops: list[DelayLoop] = []
        self.homodyne_phi: dict[int, float] = {}

    # ------------------------------------------------------------- builders
    def _wire(self, w) -> int:
        w = int(w)
        if not 0 <= w < self.nmode:
            raise ValueError(f"wire {w} out of range")
        return w

    def _add(self, name, wires, params, encode, nparam):
        wires = tuple(self._wire(w) for w in np.atleast_1d(wires))
        params = tuple(float(p) for p in np.atleast_1d(params)) if params is not None else ()
        if len(params) != nparam:
            raise ValueError(f"{name} takes {nparam} parameter(s)")
        self.ops.append(TDMOp(name, wires, params, bool(encode)))
        return self

    def s(self, wires, r: float = 0.0, phi: float = 0.0, encode: bool = False):
        return self._add("s", wires, (r, phi), encode, 2)

    def d(self, wires, r: float = 0.0, phi: float = 0.0, encode: bool = False):
        return self._add("d", wires, (r, phi), encode, 2)

    def r(self, wires, phi: float = 0.0, encode: bool = False):
        return self._add("r", wires, (phi,), encode, 1)

    ps = r

    def bs(self, wires, inputs=(np.pi / 4, 0.0), encode: bool = False):
        if len(np.atleast_1d(wires)) != 2:
            raise ValueError("bs acts on two wires")
        return self._add("bs", wires, inputs, encode, 2)

    def loss(self, wires, transmissivity: float, encode: bool = False):
        return self._add("loss", wires, (transmissivity,), encode, 1)

    def delay(self, wires, ntau: int = 1, inputs=(np.pi / 2, 0.0), encode: bool = False):
        """Delay loop on ``wires`` storing ``ntau`` pulses, coupled by ``bs(theta)`` with loop phase ``phi``."""
        if int(ntau) < 1:
            raise ValueError("ntau must be at least 1")
        w = self._wire(wires)
        self._add("delay", w, inputs, encode, 2)
        op = self.ops[-1]
        op.ntau = int(ntau)
        offset = sum(lp.ntau for lp in self.loops)
        self.loops.append(DelayLoop(w, int(ntau), offset))
        return self

    def homodyne(self, wires, phi: float = 0.0):
        self.homodyne_phi[self._wire(wires)] = float(phi)
        return self

    def homodyne_x(self, wires):
        return self.homodyne(wires, 0.0)

    def homodyne_p(self, wires):
        return self.homodyne(wires, np.pi / 2)

    # ------------------------------------------------------------- helpers
    @property
    def nloop_modes(self) -> int:
        return sum(lp.ntau for lp in self.loops)

    @property
    def n_encoded(self) -> int:
        return sum(len(op.params) for op in self.ops if op.encode)

    def _check_measured(self):
        missing = [w for w in range(self.nmode) if w not in self.homodyne_phi]
        if missing:
            raise ValueError(f"every spatial mode must be measured each step; missing wires {missing}")

    def step_params(self, data, step: int) -> list[tuple[float, ...]]:
        """Parameters of every op at ``step``; encoded ops read ``data[step % len(data)]``."""
        if self.n_encoded == 0:
            return [op.params for op in self.ops]
        if data is None:
            raise ValueError("program has encoded parameters but no data was given")
        rows = np.atleast_2d(np.asarray(data, dtype=float))
        if rows.shape[1] != self.n_encoded:
            raise ValueError(f"data rows need {self.n_encoded} values, got {rows.shape[1]}")
        row = rows[step % rows.shape[0]]
        out, k = [], 0
        for op in self.ops:
            if op.encode:
                n = len(op.params)
                out.append(tuple(row[k : k + n]))
                k += n
            else:
                out.append(op.params)
        return out

    def _loop_for(self, op_index: int) -> DelayLoop:
        j = sum(1 for op in self.ops[:op_index] if op.name == "delay")
        return self.loops[j]


class _Trajectory:
    """Phase-space vector written as ``offset + coeffs @ z`` for i.i.d. standard normals ``z``.

    Every homodyne observable of a TDM run is a commuting quadrature, and the
    Wigner function of a Gaussian state is a genuine probability density, so
    sampling the input noise and propagating it through the affine step maps
    reproduces the joint outcome distribution exactly.  Working with the
    linear map (instead of conditioning covariance matrices) avoids inverting
    the extremely ill-conditioned covariances of strongly squeezed light.
    """

    def __init__(self, nmode: int, hbar: float):
        self.nmode = nmode
        self.hbar = hbar
        self.offset = np.zeros(2 * nmode)
        self.blocks: list[np.ndarray] = []  # coefficient columns, grown as noise is injected

    def fresh_vacuum(self, modes: Sequence[int]) -> None:
        """Replace ``modes`` by new vacuum noise."""
        idx = np.concatenate([np.asarray(modes), np.asarray(modes) + self.nmode])
        for b in self.blocks:
            b[idx] = 0.0
        self.offset[idx] = 0.0
        col = np.zeros((2 * self.nmode, len(idx)))
        col[idx, np.arange(len(idx))] = np.sqrt(self.hbar / 2)
        self.blocks.append(col)

    def affine(self, S: np.ndarray, shift: np.ndarray) -> None:
        self.offset = S @ self.offset + shift
        self.blocks = [S @ b for b in self.blocks]

    def loss(self, mode: int, eta: float) -> None:
        idx = [mode, mode + self.nmode]
        k = np.sqrt(eta)
        self.offset[idx] *= k
        for b in self.blocks:
            b[idx] *= k
        col = np.zeros((2 * self.nmode, 2))
        col[idx, [0, 1]] = np.sqrt((1 - eta) * self.hbar / 2)
        self.blocks.append(col)

    def readout(self, modes: Sequence[int], phis: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Offset and coefficients (against all noise so far) of ``x cos phi + p sin phi``."""
        rows = np.zeros((len(modes), 2 * self.nmode))
        for i, (m, ph) in enumerate(zip(modes, phis)):
            rows[i, m] = np.cos(ph)
            rows[i, m + self.nmode] = np.sin(ph)
        coeff = rows @ np.concatenate(self.blocks, axis=1) if self.blocks else np.zeros((len(modes), 0))
        return rows @ self.offset, coeff


def _step_trajectory(prog: TDMProgram, traj: _Trajectory, params, step: int) -> None:
    nm = prog.nmode
    for i, (op, p) in enumerate(zip(prog.ops, params)):
        if op.name == "delay":
            lp = prog._loop_for(i)
            slot = nm + lp.offset + step % lp.ntau
            sym = symplectic_of("bs", [op.wires[0], slot], [p[0], 0.0], traj.nmode, traj.hbar)
            traj.affine(sym.S, sym.shift)
            if p[1]:
                sym = symplectic_of("r", [slot], [p[1]], traj.nmode, traj.hbar)
                traj.affine(sym.S, sym.shift)
        elif op.name == "loss":
            traj.loss(op.wires[0], p[0])
        else:
            sym = symplectic_of(op.name, list(op.wires), p, traj.nmode, traj.hbar)
            traj.affine(sym.S, sym.shift)


@dataclass
class TDMMoments:
    """Exact linear description of all homodyne outcomes of a run.

    ``outcome[k, w] = offset[k, w] + coeff[k, w] @ z`` with ``z`` standard normal.
    """

    offset: np.ndarray  # (nstep, nmode)
    coeff: np.ndarray  # (nstep, nmode, nnoise)

    @property
    def mean(self) -> np.ndarray:
        return self.offset.reshape(-1)

    @property
    def cov(self) -> np.ndarray:
        c = self.coeff.reshape(-1, self.coeff.shape[-1])
        return c @ c.T


def tdm_moments(prog: TDMProgram, nstep: int, data=None) -> TDMMoments:
    """Propagate the program symbolically and return the outcome map."""
    prog._check_measured()
    nm = prog.nmode
    traj = _Trajectory(nm + prog.nloop_modes, prog.hbar)
    if prog.nloop_modes:
        traj.fresh_vacuum(range(nm, nm + prog.nloop_modes))
    wires = list(range(nm))
    phis = [prog.homodyne_phi[w] for w in wires]
    offs, coeffs = [], []
    for step in range(int(nstep)):
        traj.fresh_vacuum(wires)
        _step_trajectory(prog, traj, prog.step_params(data, step), step)
        o, c = traj.readout(wires, phis)
        offs.append(o)
        coeffs.append(c)
    width = coeffs[-1].shape[1] if coeffs else 0
    coeff = np.zeros((len(coeffs), nm, width))
    for k, c in enumerate(coeffs):
        coeff[k, :, : c.shape[1]] = c
    return TDMMoments(np.array(offs).reshape(-1, nm), coeff)


@dataclass
class TDMResult:
    """Homodyne samples of a TDM run, shape ``(nstep, nmode)`` (or ``(shots, nstep, nmode)``)."""

    samples: np.ndarray
    moments: TDMMoments = field(repr=False)

    def to_csv(self, path) -> None:
        """Write ``(step, wire, value)`` rows (first shot only for multi-shot results)."""
        s = self.samples if self.samples.ndim == 2 else self.samples[0]
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["step", "wire", "value"])
            for k, row in enumerate(s):
                for w, v in enumerate(row):
                    out.writerow([k, w, repr(float(v))])


def run_tdm(prog: TDMProgram, nstep: int, data=None, rng=None, shots: int | None = None) -> TDMResult:
    """Iterate ``prog`` for ``nstep`` steps, measuring every spatial mode each step.

    Loop slots carry over between steps; the spatial modes enter every step in
    vacuum (their previous pulses were measured).  Samples are exact draws
    from the joint homodyne distribution.

    Raises
    ------
    ValueError
        If a spatial mode has no homodyne detector.
    """
    mom = tdm_moments(prog, nstep, data)
    gen = as_generator(rng, "tdm.homodyne")
    nnoise = mom.coeff.shape[-1]
    if shots is None:
        z = gen.standard_normal(nnoise)
        samples = mom.offset + mom.coeff @ z
    else:
        z = gen.standard_normal((int(shots), nnoise))
        samples = mom.offset[None] + np.einsum("kwn,sn->skw", mom.coeff, z)
    return TDMResult(samples, mom)


@dataclass
class UnrolledCircuit:
    """Spatial circuit equivalent to ``nstep`` TDM steps.

    Step ``k``'s spatial wire ``w`` is mode ``k * nmode + w``; loop slots
    follow at indices ``nmode * nstep + offset + slot``.
    """

    circuit: GaussianCircuit
    nstep: int
    nmode: int
    measured: list[list[int]]  # modes measured at each step
    phis: list[list[float]]

    @property
    def total_modes(self) -> int:
        return self.circuit.nmode

    def state(self) -> GaussianState:
        return self.circuit.run()

    def homodyne_moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance of all measured quadratures, ordered by (step, wire)."""
        st = self.circuit.run()
        m = st.nmode
        rows = []
        for modes, phis in zip(self.measured, self.phis):
            for mode, ph in zip(modes, phis):
                r = np.zeros(2 * m)
                r[mode], r[mode + m] = np.cos(ph), np.sin(ph)
                rows.append(r)
        rows = np.array(rows)
        return rows @ st.mean, rows @ st.cov @ rows.T

    def describe(self) -> str:
        """One line per operation, for text rendering."""
        lines = [f"{self.total_modes} modes, {self.nstep} step(s)"]
        for op in self.circuit.ops:
            if op[0] == "gate":
                lines.append(f"{op[1]} {[int(w) for w in op[2]]} {[round(float(x), 6) for x in op[3]]}")
            elif op[0] == "loss":
                lines.append(f"loss [{int(op[1])}] [{float(op[2])}]")
        for k, ms in enumerate(self.measured):
            lines.append(f"homodyne step {k}: modes {[int(m) for m in ms]}")
        return "\n".join(lines)


def unroll(prog: TDMProgram, nstep: int = 1, data=None) -> UnrolledCircuit:
    """Equivalent spatial circuit on ``nmode * nstep + sum(ntau)`` modes."""
    nm, nstep = prog.nmode, int(nstep)
    total = nm * nstep + prog.nloop_modes
    cir = GaussianCircuit(total, prog.hbar)
    base = nm * nstep
    for step in range(nstep):
        params = prog.step_params(data, step)
        for i, (op, p) in enumerate(zip(prog.ops, params)):
            mode = [step * nm + w for w in op.wires]
            if op.name == "delay":
                lp = prog._loop_for(i)
                slot = base + lp.offset + step % lp.ntau
                cir.bs([mode[0], slot], [p[0], 0.0])
                if p[1]:
                    cir.r(slot, p[1])
            elif op.name == "loss":
                cir.loss(mode[0], p[0])
            else:
                cir._gate(op.name, mode, p)
    measured = [[k * nm + w for w in range(nm)] for k in range(nstep)]
    phis = [[prog.homodyne_phi.get(w, 0.0) for w in range(nm)] for _ in range(nstep)]
    return UnrolledCircuit(cir, nstep, nm, measured, phis)


# ---------------------------------------------------------------- demos
def epr_program(r: float = 9.0) -> TDMProgram:
    """One squeezed mode into a single-slot loop whose coupling is encoded per step."""
    prog = TDMProgram(1)
    prog.s(0, r)
    prog.delay(0, ntau=1, inputs=[np.pi / 2, np.pi / 2], encode=True)
    prog.homodyne_x(0)
    return prog


EPR_DATA = np.array([[np.pi / 2, np.pi / 2], [np.pi / 4, 0.0]])


def cluster_program(r: float = 8.0, n_long: int = 5) -> TDMProgram:
    """Four-mode two-loop circuit generating a 2-D cluster state (loops of 1 and ``n_long``)."""
    prog = TDMProgram(4)
    for i in range(4):
        prog.s(i, r)
    prog.r(0, np.pi / 2)
    prog.r(2, np.pi / 2)
    prog.bs([0, 1], [np.pi / 4, 0])
    prog.bs([2, 3], [np.pi / 4, 0])
    prog.bs([1, 2], [np.pi / 4, 0])
    prog.delay(1, ntau=1, inputs=[np.pi / 2, np.pi])
    prog.delay(2, ntau=n_long, inputs=[np.pi / 2, np.pi])
    prog.bs([0, 1], [np.pi / 4, 0])
    prog.bs([2, 3], [np.pi / 4, 0])
    for i in range(4):
        prog.homodyne_x(i)
    return prog


def epr_pair_errors(samples: np.ndarray) -> np.ndarray:
    """Relative mismatch of consecutive pairs ``(1, 2), (3, 4), ...`` of a one-mode run."""
    s = np.asarray(samples).reshape(-1)[1:]
    n = len(s) // 2 * 2
    a, b = s[0:n:2], s[1:n:2]
    return np.abs(a - b) / np.maximum(np.abs(a), np.abs(b))


def cluster_nullifiers(samples: np.ndarray, n_long: int = 5, count: int | None = None) -> np.ndarray:
    """Residuals ``x_k^A + x_k^B - (-x_{k+1}^A + x_{k+1}^B + x_{k+N}^C + x_{k+N}^D)/sqrt(2)``."""
    s = np.asarray(samples)
    n = s.shape[0] - n_long if count is None else int(count)
    k = np.arange(n)
    return s[k, 0] + s[k, 1] - (-s[k + 1, 0] + s[k + 1, 1] + s[k + n_long, 2] + s[k + n_long, 3]) / np.sqrt(2)


def nullifier_variance_exact(prog: TDMProgram, nstep: int, n_long: int = 5, k: int | None = None) -> float:
    """Exact variance of one cluster nullifier from the unrolled covariance matrix."""
    un = unroll(prog, nstep)
    st = un.state()
    nm = prog.nmode
    k = n_long + 1 if k is None else k
    vec = np.zeros(2 * st.nmode)

    def x(step, wire):
        return step * nm + wire

    vec[x(k, 0)] += 1
    vec[x(k, 1)] += 1
    c = 1 / np.sqrt(2)
    vec[x(k + 1, 0)] += c
    vec[x(k + 1, 1)] -= c
    vec[x(k + n_long, 2)] -= c
    vec[x(k + n_long, 3)] -= c
    return float(vec @ st.cov @ vec)
