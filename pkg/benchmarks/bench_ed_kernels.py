"""Time the sparse sector Hamiltonian builders: numba kernel vs numpy fallback.

Run ``python benchmarks/bench_ed_kernels.py``.  The numba timing excludes the
first (compiling) call.  Both backends must produce identical matrices.
"""
from __future__ import annotations

import argparse
import time

from dimermf import SystemSpec
from dimermf._kernels import USE_NUMBA
from dimermf.exactdiag import build_operator


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if USE_NUMBA else [])
    print(f"{'spins':>5} {'dim':>7} " + " ".join(f"{b + ' [s]':>12}" for b in backends)
          + ("   speedup" if USE_NUMBA else ""))
    for n in args.pairs:
        spec = SystemSpec.chain(n_pairs=n, jz=0.3, b=0.4, alpha=0.2)
        ref = build_operator(spec, 1, backend="numpy")
        row = []
        for b in backends:
            h = build_operator(spec, 1, backend=b)  # warm-up, compiles numba
            assert abs(h - ref).max() == 0.0, f"{b} disagrees with numpy"
            row.append(best_of(lambda: build_operator(spec, 1, backend=b), args.repeat))
        line = f"{2 * n:>5} {ref.shape[0]:>7} " + " ".join(f"{t:12.4f}" for t in row)
        if USE_NUMBA:
            line += f"   {row[0] / row[1]:7.1f}x"
        print(line)
    if not USE_NUMBA:
        print("numba disabled (DIMERMF_DISABLE_NUMBA set or numba missing)")


if __name__ == "__main__":
    main()
