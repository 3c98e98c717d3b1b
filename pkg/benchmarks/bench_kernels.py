"""Compiled kernels versus the numpy fallback.

Times permanent, hafnian and torontonian with both implementations (one
warm-up call, then ``--repeats`` timed calls) and prints a CSV table plus the
speed-up of the compiled extension over the fallback.

    python benchmarks/bench_kernels.py --repeats 10
"""

from __future__ import annotations

import argparse
import sys

from qumulus.cli.bench import run_bench, to_csv
from qumulus.linalg import implementations

SIZES = {"permanent": [8, 12, 16, 20], "hafnian": [8, 12, 16, 20], "torontonian": [4, 6, 8, 10]}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--batch", type=int, default=1)
    ap.add_argument("--kernels", default="permanent,hafnian,torontonian")
    args = ap.parse_args(argv)

    impls = implementations()
    if "compiled" not in impls:
        print("compiled extension not built; only the fallback is timed", file=sys.stderr)
    rows = []
    for kernel in args.kernels.split(","):
        rows += run_bench(kernel, SIZES[kernel], args.batch, args.repeats, impls)
    sys.stdout.write(to_csv(rows))

    if "compiled" in impls:
        print("\nkernel,size,speedup_median", file=sys.stdout)
        med = {(r["kernel"], r["impl"], r["size"]): r["median_s"] for r in rows}
        for (kernel, impl, size), t in sorted(med.items()):
            if impl == "compiled":
                print(f"{kernel},{size},{med[(kernel, 'python', size)] / t:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
