"""Execute a validated circuit document and build its result document."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ..errors import QumulusError, SchemaError
from ..rng import as_generator
from .files import RESULT_VERSION, complex_matrix, complex_vector, encode_complex

#: Probabilities below this are left out of result maps.
PROB_FLOOR = 1e-14
#: States with at most this many amplitudes are written out in full.
MAX_STATE_OUT = 4096

DEFAULT_SHOTS = {"qubit": 1024, "fock": 1024, "gaussian": 1024, "bosonic": 1024, "tdm": 1, "mbqc-pattern": 0}


@dataclass
class JobOptions:
    """Command-line overrides applied on top of a circuit file."""

    seed: int = 0
    shots: int | None = None
    backend: str | None = None
    ranks: int = 1
    threads_per_rank: int = 1
    chi: int | None = None
    transport: str = "thread"
    timings: bool = False
    clock: dict = field(default_factory=dict)

    @contextmanager
    def timed(self, label: str):
        t0 = time.perf_counter()
        yield
        self.clock[label] = self.clock.get(label, 0.0) + time.perf_counter() - t0


@contextmanager
def _building(what: str):
    """Report construction errors from the builders as schema violations."""
    try:
        yield
    except QumulusError:
        raise
    except (ValueError, IndexError, KeyError, TypeError) as exc:
        raise SchemaError(f"invalid {what}: {exc}") from None


def bit_ket(index: int, nbits: int) -> str:
    return "|" + (format(int(index), f"0{nbits}b") if nbits else "") + ">"


def _prob_map(probs: np.ndarray, key) -> dict[str, float]:
    out = {}
    for i in np.nonzero(np.asarray(probs) > PROB_FLOOR)[0]:
        out[key(int(i))] = float(probs[i])
    return out


def _params(op: dict) -> list[float]:
    return [float(p) for p in op.get("params", [])]


# ------------------------------------------------------------------ qubit
_QUBIT_ALIASES = {
    "cnot": ("x", 1),
    "cx": ("x", 1),
    "cz": ("z", 1),
    "cp": ("p", 1),
    "crx": ("rx", 1),
    "cry": ("ry", 1),
    "crz": ("rz", 1),
    "toffoli": ("x", 2),
    "ccx": ("x", 2),
}


def build_qubit(doc: dict, opts: JobOptions):
    from ..distributed import DistributedQubitCircuit
    from ..qubit import QubitCircuit
    from ..qubit.state import CHANNELS

    n = doc["nqubit"]
    backend = opts.backend or doc.get("backend") or ("distributed" if opts.ranks > 1 else "statevector")
    has_channel = any(op["name"] in CHANNELS for op in doc["ops"])
    if backend == "statevector" and has_channel:
        backend = "density"
    with _building("qubit circuit"):
        if backend == "distributed":
            cir = DistributedQubitCircuit(
                n, world_size=opts.ranks, threads_per_rank=opts.threads_per_rank, transport=opts.transport
            )
        else:
            cir = QubitCircuit(n, mixed=backend == "density")
        for op in doc["ops"]:
            name, wires = op["name"].lower(), list(op.get("wires", []))
            if name in CHANNELS:
                cir.channel(name, wires, *_params(op))
                continue
            controls = list(op.get("controls", []))
            if name in _QUBIT_ALIASES:
                name, nctrl = _QUBIT_ALIASES[name]
                controls, wires = controls + wires[:nctrl], wires[nctrl:]
            if name in ("any", "unitary"):
                if "unitary" not in op:
                    raise SchemaError(f"op {name!r} needs a 'unitary' matrix")
                cir.any(complex_matrix(op["unitary"]), wires, controls)
                continue
            params = op.get("params")
            cir.gate(name, wires, controls, params, encode=op.get("encode", False), trainable=op.get("trainable"))
        for o in doc.get("observables", []):
            cir.observable(o["wires"], o["basis"])
    return cir, backend


def run_qubit(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..mps import expectation_paulis, run_qubit_mps
    from ..qubit import state as st

    cir, backend = build_qubit(doc, opts)
    data = doc.get("data")
    n = cir.nqubit
    res: dict = {"diagnostics": {"backend": backend}}
    with opts.timed("execute"):
        if backend == "mps":
            chi = opts.chi or doc.get("chi")
            psi = run_qubit_mps(cir, chi=chi, data=data)
            res["diagnostics"]["bond_dims"] = psi.bond_dims()
            res["diagnostics"]["truncation_error"] = float(psi.truncation_error)
            if cir.observables:
                res["expectations"] = expectation_paulis(psi, cir.observables)
            if n > 20:
                return res
            amps = psi.to_dense()[None]
            probs = np.abs(amps[0]) ** 2
        else:
            amps = cir.run(data)
            if amps.shape[0] != 1:
                raise SchemaError("result files hold one data row; pass a single row in 'data'")
            probs = st.probabilities(amps, None, mixed=cir.mixed)[0]
            if cir.observables:
                res["expectations"] = cir.expectation(data=data)[0] if backend == "distributed" else cir.expectation()[0]
            if doc.get("gradients"):
                g = cir.adjoint_gradient(data)
                res["gradients"] = {"params": g.params[0], "data": g.data[0]}
        res["probabilities"] = _prob_map(probs, lambda i: bit_ket(i, n))
        if amps[0].size <= MAX_STATE_OUT:
            res["state"] = encode_complex(amps[0])
        if shots:
            counts = st.sample_counts(probs[None], shots, n, as_generator(opts.seed, "qubit.measure"))[0]
            res["samples"] = {f"|{k}>": v for k, v in counts.items()}
    return res


# ------------------------------------------------------------------- fock
def build_fock(doc: dict):
    from ..photonic.fock import QumodeCircuit

    with _building("Fock circuit"):
        cir = QumodeCircuit(doc["nmode"], doc.get("init_state", "vac"), cutoff=doc.get("cutoff"))
        for op in doc["ops"]:
            name, w, p = op["name"].lower(), op.get("wires", []), _params(op)
            if name in ("any", "clements"):
                u = complex_matrix(op["unitary"])
                cir.any(u, w or None) if name == "any" else cir.clements(u)
            elif name in ("ps", "bs_h", "dc"):
                getattr(cir, name)(w if len(w) > 1 else w[0], *p)
            elif name in ("bs", "mzi"):
                getattr(cir, name)(w, p) if p else getattr(cir, name)(w)
            elif name == "h":
                cir.h(w)
            elif name in ("s", "d", "kerr", "loss"):
                getattr(cir, name)(w[0], *p)
            else:
                raise SchemaError(f"unknown Fock operation {name!r}")
    return cir


def run_fock(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..photonic.fock import FockTensorState, ket

    cir = build_fock(doc)
    res: dict = {"diagnostics": {}}
    with opts.timed("execute"):
        out = cir.run()
        if isinstance(out, FockTensorState):
            probs = out.probabilities()
            d = out.cutoff
            res["probabilities"] = {
                ket(np.unravel_index(i, probs.shape)): float(v)
                for i, v in enumerate(probs.reshape(-1))
                if v > PROB_FLOOR
            }
            res["diagnostics"]["truncation_loss"] = float(out.truncation_loss)
            res["diagnostics"]["cutoff"] = d
        else:
            res["probabilities"] = {ket(p): abs(a) ** 2 for p, a in out.items() if abs(a) ** 2 > PROB_FLOOR}
            amps = np.array(list(out.values()))
            if amps.size <= MAX_STATE_OUT:
                res["state"] = encode_complex(amps)
                res["diagnostics"]["basis"] = [ket(p) for p in out]
        if shots:
            res["samples"] = {ket(k): v for k, v in cir.measure(shots, seed=opts.seed).items()}
    return res


# --------------------------------------------------------------- gaussian
def _gaussian_ops(cir, ops, allow_interferometer=True):
    for op in ops:
        name, w, p = op["name"].lower(), op.get("wires", []), _params(op)
        if name == "interferometer" and allow_interferometer:
            cir.interferometer(complex_matrix(op["unitary"]), w or None)
        elif name in ("s", "d"):
            getattr(cir, name)(w[0], *p)
        elif name in ("r", "ps"):
            cir.r(w[0], *p)
        elif name in ("bs", "mzi"):
            getattr(cir, name)(w, p) if p else getattr(cir, name)(w)
        elif name == "loss":
            cir.loss(w[0], *p)
        else:
            raise SchemaError(f"unknown operation {name!r}")


def run_gaussian(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..photonic.fock import ket
    from ..photonic.gaussian import GaussianCircuit, measure_homodyne, sample_detection

    with _building("Gaussian circuit"):
        cir = GaussianCircuit(doc["nmode"])
        _gaussian_ops(cir, doc["ops"])
    det = doc.get("detector", {"type": "pnrd"})
    res: dict = {"diagnostics": {}}
    with opts.timed("execute"):
        state = cir.run()
        res["diagnostics"]["mean_photon"] = [state.mean_photon(i) for i in range(state.nmode)]
        if shots:
            if det["type"] == "homodyne":
                wires = det.get("wires", list(range(cir.nmode)))
                h = measure_homodyne(state, wires, det.get("phi", 0.0), shots, rng=as_generator(opts.seed, "gaussian.homodyne"))
                res["samples"] = np.asarray(h.samples).tolist()
            else:
                cnt = sample_detection(state, det["type"], shots, det.get("cutoff", doc.get("cutoff", 8)), rng=opts.seed)
                res["samples"] = {ket(k): v for k, v in cnt.items()}
    return res


# ---------------------------------------------------------------- bosonic
def _mode_state(spec: dict, hbar: float):
    from ..photonic import bosonic as bo

    kind, p = spec["kind"], [float(x) for x in spec.get("params", [])]
    if kind == "vac":
        return bo.vacuum(hbar)
    if kind == "cat":
        return bo.cat(*p, hbar=hbar)
    if kind == "gkp":
        return bo.gkp(bo.GKPSpec(*p), hbar)
    if kind == "coherent":
        r, phi = (p + [0.0, 0.0])[:2]
        return bo.coherent(r * np.exp(1j * phi), hbar)
    return bo.squeezed(*p, hbar=hbar)


def run_bosonic(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..photonic.bosonic import BosonicCircuit, sample_homodyne

    with _building("bosonic circuit"):
        init = doc.get("init_state", "vac")
        if isinstance(init, list) and init and not isinstance(init[0], dict):
            raise SchemaError("bosonic init_state must list one mode-state object per mode")
        states = "vac" if init == "vac" or init == [] else [_mode_state(s, 2.0) for s in init]
        cir = BosonicCircuit(doc["nmode"], states)
        _gaussian_ops(cir, doc["ops"], allow_interferometer=False)
    det = doc.get("detector", {"type": "homodyne"})
    if det["type"] != "homodyne":
        raise SchemaError("the bosonic backend supports homodyne detection only")
    res: dict = {"diagnostics": {}}
    with opts.timed("execute"):
        state = cir.run()
        res["diagnostics"]["ncomponent"] = state.ncomponent
        if shots:
            wire = det.get("wires", [0])[0]
            s = sample_homodyne(state, wire, shots, det.get("phi", 0.0), rng=as_generator(opts.seed, "bosonic.homodyne"))
            res["samples"] = np.asarray(s).tolist()
    return res


# -------------------------------------------------------------------- tdm
def build_tdm(doc: dict):
    from ..photonic.tdm import TDMProgram

    with _building("TDM program"):
        prog = TDMProgram(doc["nmode"])
        for op in doc["ops"]:
            name, w, p, enc = op["name"].lower(), op.get("wires", []), _params(op), op.get("encode", False)
            if name == "homodyne":
                prog.homodyne(w[0], *p)
            elif name == "delay":
                prog.delay(w[0], op.get("ntau", 1), p or (np.pi / 2, 0.0), encode=enc)
            elif name in ("s", "d"):
                getattr(prog, name)(w[0], *p, encode=enc)
            elif name in ("r", "ps"):
                prog.r(w[0], *p, encode=enc)
            elif name == "bs":
                prog.bs(w, p or (np.pi / 4, 0.0), encode=enc)
            elif name == "loss":
                prog.loss(w[0], *p, encode=enc)
            else:
                raise SchemaError(f"unknown TDM operation {name!r}")
    return prog


def run_tdm_doc(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..photonic.tdm import run_tdm

    prog = build_tdm(doc)
    nstep = doc.get("nstep", 1)
    res: dict = {"diagnostics": {"nstep": nstep, "loop_modes": prog.nloop_modes}}
    with opts.timed("execute"):
        with _building("TDM run"):
            out = run_tdm(prog, nstep, doc.get("data"), rng=as_generator(opts.seed, "tdm.homodyne"),
                          shots=None if shots <= 1 else shots)
        res["samples"] = out.samples.tolist()
    return res


# ------------------------------------------------------------------- mbqc
def pattern_from_doc(doc: dict):
    from ..mbqc import from_text

    spec = doc["pattern"]
    lines = ["I " + " ".join(str(i) for i in spec["inputs"])] + list(spec["commands"])
    if "outputs" in spec:
        lines.append("O " + " ".join(str(o) for o in spec["outputs"]))
    return from_text("\n".join(lines))


def run_pattern(doc: dict, opts: JobOptions, shots: int) -> dict:
    from ..mbqc import execute

    pat = pattern_from_doc(doc)
    spec = doc["pattern"]
    psi0 = complex_vector(spec["input_state"]) if "input_state" in spec else None
    with opts.timed("execute"):
        with _building("pattern input"):
            r = execute(pat, psi0, seed=as_generator(opts.seed, "mbqc.execute"), outcomes=spec.get("outcomes"))
    return {
        "state": encode_complex(r.full_state),
        "diagnostics": {
            "outputs": list(r.nodes),
            "outcomes": {str(k): int(v) for k, v in sorted(r.outcomes.items())},
            "branch_probability": float(r.probability),
        },
    }


RUNNERS = {
    "qubit": run_qubit,
    "fock": run_fock,
    "gaussian": run_gaussian,
    "bosonic": run_bosonic,
    "tdm": run_tdm_doc,
    "mbqc-pattern": run_pattern,
}


def run_document(doc: dict, opts: JobOptions) -> dict:
    """Execute a validated circuit document; returns the result document."""
    paradigm = doc["paradigm"]
    if opts.backend and paradigm != "qubit":
        raise SchemaError("--backend applies to qubit circuits only")
    if opts.ranks > 1 and paradigm != "qubit":
        raise SchemaError("--ranks applies to qubit circuits only")
    shots = opts.shots if opts.shots is not None else doc.get("shots", DEFAULT_SHOTS[paradigm])
    res = RUNNERS[paradigm](doc, opts, int(shots))
    job = {
        "kind": "run",
        "paradigm": paradigm,
        "seed": int(opts.seed),
        "shots": int(shots),
        "ranks": int(opts.ranks),
        "threads_per_rank": int(opts.threads_per_rank),
    }
    if paradigm == "qubit":
        job["backend"] = res["diagnostics"].pop("backend")
        job["chi"] = opts.chi or doc.get("chi")
    if opts.timings:
        job["timings"] = dict(sorted(opts.clock.items()))
    res = {k: v for k, v in res.items() if v is not None}
    return {"version": RESULT_VERSION, "job": job, **res}
