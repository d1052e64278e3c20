"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--trials 200] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from rramvmm import kernels
from rramvmm.crossbar import ladder_levels
from rramvmm.device import c2c_noise_scale, preset
from rramvmm.workload import generate_trial, programming_noise


def _simulate_args(trials):
    p = preset("Ag:a-Si")
    A = np.stack([generate_trial(0, t)[0] for t in range(trials)])
    x = np.stack([generate_trial(0, t)[1] for t in range(trials)])
    noise = np.stack([programming_noise(0, t, 32, 32) for t in range(trials)])
    return (A, x, noise, ladder_levels(p), p.g_min, p.g_max, float(c2c_noise_scale(p)),
            False, False)


def _em_args():
    rng = np.random.default_rng(0)
    x = np.concatenate([rng.normal(-1, 0.5, 16000), rng.normal(1, 0.8, 16000)])
    return x, np.array([0.4, 0.6]), np.array([-0.8, 0.9]), np.array([0.6, 0.7])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    cases = {
        f"simulate ({args.trials} trials, 32x32)": (kernels.simulate, _simulate_args(args.trials)),
        "em_step (32000 samples, k=2)": (kernels.em_step, _em_args()),
    }
    print(f"available backends: {', '.join(sorted(kernels.BACKENDS))}")
    for label, (fn, fargs) in cases.items():
        times = {}
        for backend in sorted(kernels.BACKENDS):
            t = timeit.repeat(lambda: fn(*fargs, backend=backend), number=1, repeat=args.repeat)
            times[backend] = min(t)
            print(f"{label:<36} {backend:>7}: {1e3 * times[backend]:9.2f} ms")
        if "cython" in times:
            print(f"{'':<36} speedup: {times['python'] / times['cython']:9.1f}x")
        if label.startswith("simulate") and "cython" in times:
            same = np.array_equal(fn(*fargs, backend="python"), fn(*fargs, backend="cython"))
            print(f"{'':<36} bit-identical outputs: {same}")


if __name__ == "__main__":
    main()
