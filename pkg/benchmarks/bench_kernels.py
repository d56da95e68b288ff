"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json OUT]

Times each kernel on inputs shaped like the default 64 x 64, S=5, K=8 run,
then one end-to-end ``scatter_reduce`` and one object Hausdorff score per
backend.
"""

import argparse
import json
import timeit

import numpy as np

from frscat import kernels
from frscat.filterbank import FilterBankSpec, cached_bank
from frscat.metrics import object_hausdorff
from frscat.scattering import scatter_reduce

NAMES = ("gather_multiply", "broadcast_multiply", "modulus_energy", "block_means", "directed_hausdorff", "contingency")


def kernel_cases(rng):
    shape = (64, 64)
    spec = rng.standard_normal((41,) + shape) + 1j * rng.standard_normal((41,) + shape)
    filt = rng.standard_normal((5, 8) + shape) + 1j * rng.standard_normal((5, 8) + shape)
    n = 128
    pidx = rng.integers(0, 41, n).astype(np.intp)
    js = rng.integers(0, 5, n).astype(np.intp)
    ks = rng.integers(0, 8, n).astype(np.intp)
    cbuf = np.empty((n,) + shape, np.complex128)
    rbuf = np.empty((n,) + shape, np.float64)
    z = rng.standard_normal((n,) + shape) + 1j * rng.standard_normal((n,) + shape)
    means = np.empty(n)
    a = np.argwhere(rng.random((120, 120)) < 0.3).astype(np.float64)
    b = np.argwhere(rng.random((120, 120)) < 0.05).astype(np.float64)
    seg = rng.integers(0, 30, (256, 256))
    gt = rng.integers(0, 30, (256, 256))
    return {
        "gather_multiply": lambda k: k.gather_multiply(spec, pidx, filt, js, ks, cbuf),
        "broadcast_multiply": lambda k: k.broadcast_multiply(spec, filt[0, 0], cbuf[:41]),
        "modulus_energy": lambda k: k.modulus_energy(z, rbuf),
        "block_means": lambda k: k.block_means(rbuf, 16, 48, 16, 48, means),
        "directed_hausdorff": lambda k: k.directed_hausdorff(a, b),
        "contingency": lambda k: k.contingency(seg, gt, 29, 29),
    }


def use_backend(name):
    impl = kernels.get_backend(name)
    for n in NAMES:
        setattr(kernels, n, getattr(impl, n))


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results as JSON")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing the Python fallback only")
    results = {}
    for label, fn in kernel_cases(rng).items():
        results[label] = {b: best_time(lambda: fn(kernels.get_backend(b)), args.repeat) for b in backends}

    bank = cached_bank(FilterBankSpec())
    x = rng.standard_normal((64, 64))
    mask_a = np.zeros((256, 256), int)
    mask_b = np.zeros((256, 256), int)
    for i in range(12):
        r, c = divmod(i, 4)
        mask_a[20 + 60 * r : 60 + 60 * r, 10 + 60 * c : 50 + 60 * c] = i + 1
        mask_b[24 + 60 * r : 66 + 60 * r, 12 + 60 * c : 48 + 60 * c] = i + 1
    end_to_end = {
        "scatter_reduce (64x64, 681 paths)": lambda: scatter_reduce(x, bank, (1, 0.7)),
        "object_hausdorff (256x256, 12 objects)": lambda: object_hausdorff(mask_a, mask_b),
    }
    for label, fn in end_to_end.items():
        results[label] = {}
        for b in backends:
            use_backend(b)
            fn()
            results[label][b] = best_time(fn, args.repeat)
    use_backend(kernels.BACKEND)

    width = max(map(len, results))
    print(f"{'case':<{width}}  " + "  ".join(f"{b:>10}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, t in results.items():
        row = f"{label:<{width}}  " + "  ".join(f"{t[b] * 1e3:8.2f}ms" for b in backends)
        if len(backends) > 1:
            row += f"  {t['python'] / t['compiled']:9.2f}x"
        print(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
