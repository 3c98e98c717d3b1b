"""Timing harness: one warm-up call, then ``repeats`` timed calls per size."""

from __future__ import annotations

import csv
import io
import statistics
import time
from typing import Callable, Sequence

import numpy as np

from ..errors import SchemaError

KERNELS = ("permanent", "hafnian", "torontonian", "grad", "mps-step")

#: Largest accepted size per kernel (matrix dimension, qubits or sites).
SIZE_LIMITS = {"permanent": 28, "hafnian": 32, "torontonian": 24, "grad": 20, "mps-step": 200}

FIELDS = ["kernel", "impl", "size", "batch", "repeats", "median_s", "mean_s", "min_s"]


def _matrices(kernel: str, n: int, batch: int, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for _ in range(batch):
        if kernel == "permanent":
            out.append(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        elif kernel == "hafnian":
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            out.append(a + a.T)
        else:
            # a valid torontonian argument O = I - Q^{-1} from a random Gaussian state
            x = rng.normal(size=(2 * n, 2 * n)) * 0.2
            q = np.eye(2 * n) + x @ x.T
            out.append(np.eye(2 * n) - np.linalg.inv(q))
    return out


def make_workload(kernel: str, size: int, batch: int, impl: str | None, seed: int = 0) -> Callable[[], object]:
    """Zero-argument callable performing one timed unit of work."""
    from ..linalg import kernels as K

    if kernel not in KERNELS:
        raise SchemaError(f"unknown benchmark kernel {kernel!r}; choose from {', '.join(KERNELS)}")
    if not 1 <= size <= SIZE_LIMITS[kernel]:
        raise SchemaError(f"{kernel} size must lie in [1, {SIZE_LIMITS[kernel]}], got {size}")
    if batch < 1:
        raise SchemaError("batch must be positive")
    rng = np.random.default_rng(seed)
    if kernel == "hafnian" and size % 2:
        raise SchemaError("hafnian sizes must be even")
    if kernel in ("permanent", "hafnian", "torontonian"):
        mats = _matrices(kernel, size, batch, rng)
        fn = getattr(K, kernel)
        return lambda: [fn(m, impl=impl) for m in mats]
    if kernel == "grad":
        from ..qubit import QubitCircuit

        cir = QubitCircuit(size)
        for _ in range(2):
            cir.rxlayer(encode=True)
            cir.rylayer()
            cir.cnot_ring()
        cir.observable(0, "z")
        cir.init_params(rng)
        data = rng.uniform(0, np.pi, size=(batch, cir.n_encode))
        return lambda: cir.adjoint_gradient(data)
    from ..mps import MPSState, tfim_trotter_step

    plus = np.ones(2) / np.sqrt(2)
    states = [MPSState.product([plus] * size, 64, 1e-12) for _ in range(batch)]
    return lambda: [tfim_trotter_step(s, 1.0, 1.2, 0.1) for s in states]


def time_workload(fn: Callable[[], object], repeats: int, warmup: int = 1) -> list[float]:
    """Run ``warmup`` untimed calls, then return ``repeats`` wall-clock durations."""
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return out


def run_bench(kernel: str, sizes: Sequence[int], batch: int = 1, repeats: int = 10,
              impls: Sequence[str | None] = (None,), warmup: int = 1, seed: int = 0, raw: bool = False) -> list[dict]:
    """Benchmark rows (one per size and implementation, or per repeat when ``raw``)."""
    if repeats < 1:
        raise SchemaError("repeats must be positive")
    rows = []
    for impl in impls:
        for n in sizes:
            fn = make_workload(kernel, int(n), int(batch), impl, seed)
            times = time_workload(fn, int(repeats), warmup)
            label = impl or "default"
            if raw:
                for t in times:
                    rows.append({"kernel": kernel, "impl": label, "size": n, "batch": batch, "repeats": 1,
                                 "median_s": t, "mean_s": t, "min_s": t})
            else:
                rows.append({"kernel": kernel, "impl": label, "size": int(n), "batch": int(batch), "repeats": int(repeats),
                             "median_s": statistics.median(times), "mean_s": statistics.fmean(times), "min_s": min(times)})
    return rows


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{r[k]:.6e}" if k.endswith("_s") else r[k]) for k in FIELDS})
    return buf.getvalue()
