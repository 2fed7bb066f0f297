"""Timing comparison of the compiled Bellman kernels against the numpy
fallback. Both backends run the same synchronous sweeps, so the interesting
number is the per-call wall time on solver-sized problems.

Usage: python benchmarks/bench_kernels.py [--repeats N] [--tol T]
"""

import argparse
import time

import numpy as np

from construal_irl import backend

SIZES = ((25, 4), (122, 4), (500, 4), (1000, 8))


def random_problem(rng, n_states, n_actions):
    dynamics = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    reward = rng.standard_normal((n_states, n_actions))
    return np.ascontiguousarray(dynamics), np.ascontiguousarray(reward)


def time_kernel(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timed runs per cell (best kept)")
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--gamma", type=float, default=0.95)
    parser.add_argument("--beta", type=float, default=0.1)
    args = parser.parse_args()

    backends = backend.available_backends()
    if "compiled" not in backends:
        print("compiled kernels are not built; run pip install -e . first")
        return 1

    rng = np.random.default_rng(0)
    print(f"active backend: {backend.backend_name()}")
    print(f"{'kernel':<6} {'S':>5} {'A':>3} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for n_states, n_actions in SIZES:
        dynamics, reward = random_problem(rng, n_states, n_actions)
        v0 = np.zeros(n_states)
        for kernel_name, extra in (("hard", ()), ("soft", (args.beta,))):
            times = {}
            results = {}
            for name, module in backends.items():
                fn = getattr(module, f"{kernel_name}_value_iteration")
                call = (dynamics, reward, args.gamma, *extra, args.tol, 100_000, v0)
                results[name] = fn(*call)[0]
                times[name] = time_kernel(fn, call, args.repeats)
            drift = np.abs(results["python"] - results["compiled"]).max()
            if drift > 1e-10:
                print(f"backends disagree by {drift:.2e} on {kernel_name} S={n_states}")
                return 1
            speedup = times["python"] / times["compiled"]
            print(
                f"{kernel_name:<6} {n_states:>5} {n_actions:>3} "
                f"{times['python'] * 1e3:>8.2f}ms {times['compiled'] * 1e3:>8.2f}ms "
                f"{speedup:>7.2f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
