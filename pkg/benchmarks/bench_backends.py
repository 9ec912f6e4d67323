"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three hot paths (weight sampling, passage-time fields, oriented
reachability) on both backends and prints a table with speedups. The
outputs are also cross-checked for bit equality, so this doubles as a
parity smoke test at larger-than-unit-test sizes.

Usage:
    python benchmarks/bench_backends.py          # moderate sizes
    python benchmarks/bench_backends.py --full   # adds a 512-wide box
"""

import argparse
import time

import numpy as np

from fpplab import backend
from fpplab.geodesic import distance_field
from fpplab.lattice import BoxSpec, WeightLaw, sample_config
from fpplab.regimes import oriented_path_scan, oriented_scan_box


def _time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_case(name, make_fn, repeats=3):
    rows = []
    outputs = {}
    for be in ("numba", "numpy"):
        backend.set_backend(be)
        fn = make_fn()
        if be == "numba":
            fn()  # JIT warmup outside the timed region
        secs, out = _time(fn, repeats if be == "numba" else 1)
        outputs[be] = out
        rows.append((be, secs))
    backend.set_backend(None)
    same = np.array_equal(outputs["numba"], outputs["numpy"])
    t_numba = rows[0][1]
    t_numpy = rows[1][1]
    print(
        f"{name:<38} numba {t_numba * 1e3:9.2f} ms   numpy {t_numpy * 1e3:9.2f} ms"
        f"   x{t_numpy / t_numba:7.1f}   identical={same}"
    )
    if not same:
        raise SystemExit(f"backend outputs differ for {name}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true", help="include a 512-wide box")
    args = ap.parse_args()

    sizes = [64, 128, 256] + ([512] if args.full else [])
    print(f"{'case':<38} {'numba':>18} {'numpy':>20} {'speedup':>9}")

    for m in sizes:
        box = BoxSpec(lo=(0, 0), hi=(m - 1, m - 1))

        def make_sample(box=box):
            return lambda: sample_config(box, WeightLaw(0, 1, 0.25), 7, 1).packed

        bench_case(f"sample weights {m}x{m}", make_sample)

    for m in sizes:
        box = BoxSpec(lo=(0, 0), hi=(m - 1, m - 1))

        def make_field(box=box, law=WeightLaw(0, 1, 0.25)):
            cfg = sample_config(box, law, 7, 1)
            return lambda: distance_field(cfg, [(0, 0)]).dist

        bench_case(f"field {{0,1}} p=0.25 {m}x{m}", make_field)

    for m in sizes:
        box = BoxSpec(lo=(0, 0), hi=(m - 1, m - 1))

        def make_field2(box=box, law=WeightLaw(1, 2, 0.8)):
            cfg = sample_config(box, law, 7, 1)
            return lambda: distance_field(cfg, [(0, 0)]).dist

        bench_case(f"field {{1,2}} p=0.8  {m}x{m}", make_field2)

    for n in sizes:
        sbox = oriented_scan_box(n)

        def make_scan(sbox=sbox, n=n):
            cfg = sample_config(sbox, WeightLaw(1, 2, 0.8), 7, 1)
            return lambda: np.array([oriented_path_scan(cfg, n)])

        bench_case(f"oriented reach n={n}", make_scan)


if __name__ == "__main__":
    main()
