"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints the best-of-N wall time per kernel and backend, and the speedup of the
compiled core over the fallback. Outputs of both backends are checked for
equality before timing.
"""

import argparse
import timeit

import numpy as np

from fgcoupled import _kernels


def _picard_case(dx, dy):
    rng = np.random.default_rng(0)
    args = (rng.uniform(0, 0.3 / dx, (dx, dx)), -rng.uniform(0, 0.3 / dy, (dx, dy)),
            rng.normal(size=dx), rng.uniform(0, 0.3 / dy, (dy, dy)),
            -rng.uniform(0, 0.3 / dx, (dy, dx)), rng.normal(size=dy),
            rng.normal(size=dx), rng.normal(size=dy), 1e-14, 1e-14, 200, 1e12)
    return lambda k: k.picard_affine(*args)


def _grid_case(n):
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    px, py = X.reshape(-1, 1), Y.reshape(-1, 1)
    Fp, Gp = px / 3 - py / 4, py / 8 - px / 6
    consts = np.array([1 / 3, 1 / 4, 1 / 8, 1 / 6])
    return lambda k: k.grid_scan(_kernels.BANACH, consts, px, py, Fp, Gp, 1e-12, 100)


def _slack_case(n, dx, dy):
    rng = np.random.default_rng(1)
    arrs = [rng.normal(size=(n, d)) for d in (dx, dy, dx, dy, dx, dx, dy, dy)]
    consts = np.array([0.2, 0.15, 0.1, 0.05])
    return lambda k: k.pair_slacks(_kernels.REICH, consts, *arrs)


CASES = {
    "picard_affine 1x1": _picard_case(1, 1),
    "picard_affine 8x8": _picard_case(8, 8),
    "grid_scan 21^2 points": _grid_case(21),
    "grid_scan 61^2 points": _grid_case(61),
    "pair_slacks 10^4 pairs, 2x2": _slack_case(10_000, 2, 2),
}


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled core not built; timing the fallback only")
    print(f"{'kernel':30s}" + "".join(f"{b:>14s}" for b in backends) + "   speedup")
    for label, run in CASES.items():
        if "cython" in backends:
            assert _same(run(backends["cython"]), run(backends["python"])), label
        times = {}
        for name, mod in backends.items():
            number = max(1, int(0.2 / max(timeit.timeit(lambda r=run, m=mod: r(m), number=1), 1e-6)))
            best = min(timeit.repeat(lambda r=run, m=mod: r(m), number=number, repeat=args.repeat))
            times[name] = best / number
        row = "".join(f"{times[b] * 1e3:11.3f} ms" for b in backends)
        speed = f"{times['python'] / times['cython']:9.1f}x" if "cython" in times else ""
        print(f"{label:30s}{row}{speed}")


if __name__ == "__main__":
    main()
