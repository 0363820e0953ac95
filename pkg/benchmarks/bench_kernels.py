"""Wall time of the compiled kernels against the pure-Python ones.

Each workload runs once per backend on the same input; outputs are compared
so the timing table is only printed for identical results.

    python benchmarks/bench_kernels.py [--scale 20000]
"""
import argparse
import time

import numpy as np

from ampcsim import kernels
from ampcsim.graph import cycle_union, generate_random, generate_tree, random_weights
from ampcsim.listrank import rank_cycles
from ampcsim.matching import ampc_mis, ampc_mm_constant
from ampcsim.msf import msf_empirical
from ampcsim.runtime import Runtime


def workloads(n):
    tree = random_weights(generate_tree(n, seed=1), seed=2)
    rnd = generate_random(n, 5 * n, seed=3)
    wrnd = random_weights(rnd, seed=4)
    cyc = cycle_union([n], shuffle_seed=5)
    succ = np.empty(n, dtype=np.int64)
    succ[cyc.src] = cyc.dst
    return {
        "msf_empirical (prim)": lambda: msf_empirical(wrnd, Runtime(n)).edges,
        "msf_empirical tree": lambda: msf_empirical(tree, Runtime(n)).edges,
        "ampc_mis": lambda: ampc_mis(rnd, runtime=Runtime(n)).in_set,
        "ampc_mm_constant": lambda: ampc_mm_constant(rnd, runtime=Runtime(n)).edges,
        "rank_cycles (walks)": lambda: rank_cycles(succ, runtime=Runtime(n)).label,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--scale", type=int, default=20000, help="vertex count")
    args = ap.parse_args()
    try:
        from ampcsim import _ckernels  # noqa: F401
    except ImportError:
        raise SystemExit("compiled kernels are not built; run 'pip install -e . --no-build-isolation'")
    print(f"{'workload':<24}{'cython s':>10}{'python s':>10}{'speedup':>9}")
    for name, fn in workloads(args.scale).items():
        times, outs = {}, {}
        for backend in ("cython", "python"):
            prev = kernels.use_backend(backend)
            t = time.perf_counter()
            outs[backend] = fn()
            times[backend] = time.perf_counter() - t
            kernels.use_backend(prev)
        same = np.array_equal(outs["cython"], outs["python"])
        c, p = times["cython"], times["python"]
        print(f"{name:<24}{c:>10.3f}{p:>10.3f}{p / c:>8.1f}x" + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
