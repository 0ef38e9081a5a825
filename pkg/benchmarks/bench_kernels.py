"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both variants are called directly on the same inputs, so one process covers
both backends. Results are checked for agreement before timing. The last
section runs the finite enumeration end to end in two subprocesses, one with
COARSEKIT_DISABLE_NUMBA=1.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from coarsekit import kernels as K


def cases(rng):
    n = 6
    d = K.diag_mask(n)
    A = rng.integers(0, 1 << (n * n), 20000, dtype=np.int64) | d
    B = rng.integers(0, 1 << (n * n), 20000, dtype=np.int64) | d
    fam3 = np.unique(K._np_downset(int(rng.integers(0, 1 << 9)) | K.diag_mask(3), K.diag_mask(3)))
    gens = np.array(sorted({int(x) | K.diag_mask(4) for x in rng.integers(0, 1 << 16, 3)}), dtype=np.int64)
    vals = rng.random(200000)
    mask = rng.random(200000) < 0.01
    top = (1 << 20) - 1 | d
    return [
        ("compose_arrays n=6 x20000", "compose_arrays", (A, B, n)),
        ("invert_arrays n=6 x20000", "invert_arrays", (A, n)),
        ("downset of a 20-pair relation", "downset", (np.int64(top), np.int64(d))),
        ("check_family n=3", "check_family", (fam3, 3, np.int64(K.diag_mask(3)))),
        ("word_closure n=4", "word_closure", (gens, 4)),
        ("sliding_diam r=16 on 2e5", "sliding_diam", (vals, 16)),
        ("distance_transform on 2e5", "distance_transform", (mask,)),
    ]


def same(a, b):
    if isinstance(a, tuple):
        return all(int(x) == int(y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        return np.allclose(a, b)
    return np.array_equal(np.sort(a.ravel()), np.sort(b.ravel()))


def end_to_end(disable):
    env = dict(os.environ)
    if disable:
        env["COARSEKIT_DISABLE_NUMBA"] = "1"
    code = ("import time; from coarsekit.core import enumerate_coarse_structures as e; "
            "e(2, exhaustive_families=True); t=time.perf_counter(); e(2, exhaustive_families=True); e(4); "
            "print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba backend unavailable; only end-to-end numpy timing is shown")
    else:
        rng = np.random.default_rng(0)
        print(f"{'kernel':34} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
        for label, name, inputs in cases(rng):
            nb, npf = getattr(K, "_nb_" + name), getattr(K, "_np_" + name)
            assert same(nb(*inputs), npf(*inputs)), label  # also warms up the jit
            t_nb = min(timeit.repeat(lambda: nb(*inputs), number=1, repeat=args.repeat)) * 1e3
            t_np = min(timeit.repeat(lambda: npf(*inputs), number=1, repeat=args.repeat)) * 1e3
            print(f"{label:34} {t_nb:10.2f} {t_np:10.2f} {t_np / t_nb:8.1f}x")
    print()
    for disable in (False, True):
        tag = "numpy" if disable else "default"
        print(f"enumeration (2 exhaustive, 4 principal), {tag} backend: {end_to_end(disable):.2f}s")


if __name__ == "__main__":
    main()
