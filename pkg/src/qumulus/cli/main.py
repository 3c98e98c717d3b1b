"""``qumulus`` command-line interface.

Subcommands
-----------
run        execute a circuit file and write a result file
demo       run a reference demonstration and check its properties
bench      time a kernel (CSV of median / mean over repeats, warm-up excluded)
transpile  qubit circuit file -> measurement pattern
unroll     TDM circuit file -> equivalent spatial circuit
decompose  unitary -> Clements mesh parameters

Exit codes: 0 success, 1 failed demo check or unexpected error, 2 invalid
input, 3 numerical guard, 4 transport failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from ..errors import QumulusError, SchemaError
from ..rng import default_seed
from .files import RESULT_VERSION, complex_matrix, plain, read_circuit, write_result
from .jobs import JobOptions, run_document


def _emit(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _options(args) -> JobOptions:
    return JobOptions(
        seed=default_seed() if args.seed is None else args.seed,
        shots=getattr(args, "shots", None),
        backend=getattr(args, "backend", None),
        ranks=args.ranks,
        threads_per_rank=args.threads_per_rank,
        chi=args.chi,
        transport=args.transport,
        timings=args.timings,
    )


# ------------------------------------------------------------ subcommands
def cmd_run(args) -> int:
    doc = read_circuit(args.file)
    opts = _options(args)
    res = run_document(doc, opts)
    _emit(write_result(res), args.output)
    return 0


def cmd_demo(args) -> int:
    from .demos import DEMOS

    if args.list:
        _emit("".join(f"{name}\n" for name in DEMOS), None)
        return 0
    if args.name is None:
        raise SchemaError("demo name required (use --list)")
    opts = _options(args)
    t0 = time.perf_counter()
    payload, checks = DEMOS[args.name](opts)
    elapsed = time.perf_counter() - t0
    job = {"kind": "demo", "demo": args.name, "seed": int(opts.seed), "ranks": opts.ranks,
           "threads_per_rank": opts.threads_per_rank, "chi": opts.chi}
    if opts.timings:
        job["timings"] = {"total": elapsed}
    res = {"version": RESULT_VERSION, "job": job, **payload, "checks": checks}
    _emit(write_result(res), args.output)
    failed = [c for c in checks if not c["passed"]]
    for c in checks:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {args.name}: {c['property']}", file=sys.stderr)
    if failed:
        print("violated: " + "; ".join(c["property"] for c in failed), file=sys.stderr)
        return 1
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args) -> int:
    from ..linalg import implementations
    from .bench import run_bench, to_csv

    if args.impl == "both":
        impls = list(implementations())
    elif args.impl == "default":
        impls = [None]
    else:
        if args.impl not in implementations():
            raise SchemaError(f"implementation {args.impl!r} is not available here")
        impls = [args.impl]
    if args.kernel in ("grad", "mps-step"):
        impls = [None]
    rows = run_bench(args.kernel, args.sizes, args.batch, args.repeats, impls, args.warmup,
                     default_seed() if args.seed is None else args.seed, raw=args.raw)
    _emit(to_csv(rows), args.output)
    return 0


def cmd_transpile(args) -> int:
    from ..mbqc import shift_signals, standardize, transpile
    from .jobs import JobOptions, build_qubit

    doc = read_circuit(args.file)
    if doc["paradigm"] != "qubit":
        raise SchemaError("transpile expects a qubit circuit file")
    cir, _ = build_qubit(doc, JobOptions(backend="statevector"))
    data = doc.get("data")
    pat = transpile(cir, None if data is None else data[0])
    if args.standardize or args.shift:
        pat = standardize(pat)
    if args.shift:
        pat = shift_signals(pat)
    if args.format == "text":
        _emit(pat.to_text() + "\n", args.output)
        return 0
    lines = pat.to_text().splitlines()
    body = [ln for ln in lines if not ln.startswith(("I ", "O ")) and ln not in ("I", "O")]
    out = {
        "version": 1,
        "paradigm": "mbqc-pattern",
        "pattern": {"inputs": list(pat.inputs), "outputs": list(pat.outputs), "commands": body},
    }
    if cir.nqubit <= 12:
        # the circuit starts in |0...0>, whereas a bare pattern defaults to |+...+>
        zero = [0.0] * 2**cir.nqubit
        zero[0] = 1.0
        out["pattern"]["input_state"] = {"re": zero}
    _emit(json.dumps(plain(out), indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_unroll(args) -> int:
    from ..photonic.tdm import unroll
    from .jobs import build_tdm

    doc = read_circuit(args.file)
    if doc["paradigm"] != "tdm":
        raise SchemaError("unroll expects a tdm circuit file")
    prog = build_tdm(doc)
    nstep = args.nstep or doc.get("nstep", 1)
    try:
        un = unroll(prog, nstep, doc.get("data"))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    if args.format == "text":
        _emit(un.describe() + "\n", args.output)
        return 0
    ops = []
    for op in un.circuit.ops:
        if op[0] == "gate":
            ops.append({"name": op[1], "wires": list(op[2]), "params": list(op[3])})
        elif op[0] == "loss":
            ops.append({"name": "loss", "wires": [op[1]], "params": [op[2]]})
    out = {"version": 1, "paradigm": "gaussian", "nmode": un.total_modes, "ops": ops,
           "detector": {"type": "homodyne", "wires": [m for ms in un.measured for m in ms]}}
    _emit(json.dumps(plain(out), indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_decompose(args) -> int:
    from scipy.stats import unitary_group

    from ..linalg import clements_decompose, clements_reconstruct

    if args.haar:
        u = unitary_group.rvs(args.haar, random_state=np.random.default_rng(default_seed() if args.seed is None else args.seed))
    elif args.file:
        try:
            doc = json.loads(Path(args.file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read unitary from {args.file}: {exc}") from None
        spec = doc.get("unitary", doc) if isinstance(doc, dict) else doc
        u = complex_matrix(spec)
    else:
        raise SchemaError("give a unitary file or --haar N")
    try:
        mesh = clements_decompose(u)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    err = float(np.max(np.abs(clements_reconstruct(mesh) - u)))
    out = {
        "nmode": mesh.nmode,
        "mzis": [{"mode": m.mode, "theta": m.theta, "phi": m.phi} for m in mesh.mzis],
        "output_phases": [float(x) for x in mesh.output_phases],
        "reconstruction_error": err,
    }
    _emit(json.dumps(plain(out), indent=2, sort_keys=True) + "\n", args.output)
    return 0


# ----------------------------------------------------------------- parser
def _add_common(p, shots=True, backend=False):
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default: $QUMULUS_SEED or 0)")
    if shots:
        p.add_argument("--shots", type=int, default=None, help="number of samples")
    if backend:
        p.add_argument("--backend", choices=["statevector", "density", "mps", "distributed"], help="qubit backend override")
    p.add_argument("--ranks", type=int, default=1, help="distributed ranks (power of two)")
    p.add_argument("--threads-per-rank", "--threads", dest="threads_per_rank", type=int, default=1,
                   help="worker threads per rank")
    p.add_argument("--transport", choices=["thread", "process"], default="thread", help="rank transport")
    p.add_argument("--chi", type=int, default=None, help="MPS bond-dimension cap")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the result")


def build_parser() -> argparse.ArgumentParser:
    from .bench import KERNELS
    from .demos import DEMOS

    parser = argparse.ArgumentParser(prog="qumulus", description="Multi-paradigm quantum circuit simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a circuit file")
    p.add_argument("file")
    _add_common(p, backend=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("demo", help="run a reference demonstration")
    p.add_argument("name", nargs="?", choices=sorted(DEMOS))
    p.add_argument("--list", action="store_true", help="list demo names")
    _add_common(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("bench", help="time a kernel")
    p.add_argument("kernel", choices=KERNELS)
    p.add_argument("--sizes", type=_int_list, default=[2], help="comma-separated sizes")
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--impl", default="default", help="compiled, python, both or default")
    p.add_argument("--raw", action="store_true", help="one row per timed repeat")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("transpile", help="qubit circuit file -> measurement pattern")
    p.add_argument("file")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--shift", action="store_true", help="standardize, then shift signals")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("unroll", help="TDM circuit file -> spatial circuit")
    p.add_argument("file")
    p.add_argument("--nstep", type=int, default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_unroll)

    p = sub.add_parser("decompose", help="unitary -> Clements mesh")
    p.add_argument("file", nargs="?", help='JSON file: a matrix, {"re","im"} or {"unitary": ...}')
    p.add_argument("--haar", type=int, default=None, metavar="N", help="decompose a seeded Haar-random N x N unitary")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QumulusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:  # pragma: no cover
        return 130


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
