"""Benchmark: compiled Metropolis kernel vs the pure numpy fallback.

Run:  python benchmarks/bench_mc.py [--rows 4 --cols 4 --d 3 --samples 5000]

Both kernels consume the same proposal stream, so the timing difference
is pure per-move overhead.
"""

import argparse
import time

import numpy as np

from tensorgrid import _mc_core
from tensorgrid.montecarlo import McConfig, mc_contract, random_torus

try:
    from tensorgrid import _mc_kernel
except ImportError:
    _mc_kernel = None


def run(kernel, torus, cfg):
    t0 = time.perf_counter()
    res = mc_contract(torus, cfg, kernel=kernel)
    dt = time.perf_counter() - t0
    burn, thin, _ = cfg.resolved(torus)
    moves = burn + cfg.n_samples * thin
    return res, dt, moves


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=4)
    ap.add_argument("--cols", type=int, default=4)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    torus = random_torus(
        np.random.default_rng(args.seed), args.rows, args.cols, args.d, positive=True
    )
    cfg = McConfig(n_samples=args.samples, seed=args.seed)

    res_py, t_py, moves = run(_mc_core, torus, cfg)
    print(
        f"python  : {t_py:8.3f} s  {moves / t_py / 1e3:10.1f} kmoves/s  "
        f"estimate {res_py.estimate:.6g}"
    )
    if _mc_kernel is None:
        print("compiled: not built (python setup.py build_ext --inplace)")
        return
    res_cy, t_cy, _ = run(_mc_kernel, torus, cfg)
    print(
        f"compiled: {t_cy:8.3f} s  {moves / t_cy / 1e3:10.1f} kmoves/s  "
        f"estimate {res_cy.estimate:.6g}"
    )
    print(f"speedup : {t_py / t_cy:.1f}x")
    dev = abs(res_py.estimate - res_cy.estimate)
    print(f"estimate deviation between kernels: {dev:.3e}")


if __name__ == "__main__":
    main()
