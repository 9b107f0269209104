"""Time the compiled and pure-Python kernels on identical workloads.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Each workload is run once per backend to check that the results agree,
then timed; the table reports the best of ``--repeat`` runs.
"""

import argparse
import random
import time

from anomalous import _kernels


def workloads(seed: int):
    rng = random.Random(seed)

    def mat(r, c, lo, hi):
        return [[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)]

    ranks = [mat(rng.randint(2, 8), rng.randint(2, 12), -3, 3) for _ in range(3000)]
    hnfs = [mat(rng.randint(2, 6), 8, -4, 4) for _ in range(3000)]
    taus = [(mat(r, c, -3, 3), mat(r, c, -3, 3))
            for r, c in ((rng.randint(2, 4), rng.randint(2, 6)) for _ in range(500))]
    box = [[a, b] for a, b in zip(mat(4000, 4, -2, 2), mat(4000, 4, -2, 2))]
    return {
        "int_rank (3000 mats, <=8x12)": (lambda k: [k.int_rank(m) for m in ranks]),
        "int_det (3000 mats, 6x6)": (lambda k, d=[mat(6, 6, -5, 5) for _ in range(3000)]: [k.int_det(m) for m in d]),
        "hnf (3000 mats, <=6x8)": (lambda k: [k.hnf(m, 8) for m in hnfs]),
        "hnf (4000 scan pairs, 2x4)": (lambda k: [k.hnf(m, 4) for m in box]),
        "tau_minor_rank (500 mats, <=4x6)": (lambda k: [k.tau_minor_rank(a, b) for a, b in taus]),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the Python backend will be timed")
    mods = {"python": _kernels._pykernels, "cython": _kernels._ckernels}
    print(f"{'workload':36} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for name, fn in workloads(args.seed).items():
        results = {b: fn(mods[b]) for b in backends}
        if len({repr(r) for r in results.values()}) != 1:
            raise SystemExit(f"backends disagree on {name}")
        best = {}
        for b in backends:
            times = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                fn(mods[b])
                times.append(time.perf_counter() - t0)
            best[b] = min(times)
        speed = f"{best['python'] / best['cython']:8.1f}x" if "cython" in best else ""
        print(f"{name:36} " + " ".join(f"{best[b]:9.4f}s" for b in backends) + f"  {speed}")


if __name__ == "__main__":
    main()
