"""Time the compiled and pure-numpy photocount samplers on the same streams.

    python3 benchmarks/bench_montecarlo.py [--trials N] [--repeat R]
"""

import argparse
import time

import numpy as np

from flqkd import montecarlo as mc
from flqkd.gaussian_state import mode_pair_moments
from flqkd.params import preset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--modes", type=int, nargs="+", default=[20, 200, 1000])
    args = ap.parse_args()

    m = mode_pair_moments(preset("zhuang2016"), 0.1, 0.5, 1.0, 0.3)
    backends = [b for b in ("compiled", "python") if b in mc.BACKENDS]
    if "compiled" not in backends:
        print("compiled kernel not available; timing the python backend only")

    print(f"{'M':>6} {'backend':>9} {'seconds':>9} {'Mmodes/s':>9} {'speedup':>8} identical")
    for M in args.modes:
        cfg = mc.McConfig(args.trials, seed=1, eta=0.9, M=M)
        res = {b: best_of(lambda b=b: mc.sample_iq(m, cfg, backend=b), args.repeat) for b in backends}
        ref_t, ref_out = res[backends[-1]]
        for b in backends:
            t, out = res[b]
            same = all(np.array_equal(x, y) for x, y in zip(out, ref_out))
            rate = args.trials * M / t / 1e6
            print(f"{M:>6} {b:>9} {t:>9.3f} {rate:>9.2f} {ref_t / t:>7.1f}x {same}")


if __name__ == "__main__":
    main()
