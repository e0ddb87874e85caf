"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Each kernel is timed on the same inputs under both backends and the results
are checked for equality first.  ``--end-to-end`` also times a full
paper-10node run in a subprocess per backend.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from meshfwd import kernels
from meshfwd.kernels import _pykernels

try:
    from meshfwd.kernels import _ckernels
except ImportError:
    _ckernels = None


def random_graph(n: int, degree: int, seed: int = 0):
    rng = random.Random(seed)
    adj = {i: set() for i in range(n)}
    for i in range(1, n):
        j = rng.randrange(i)
        adj[i].add(j)
        adj[j].add(i)
    for _ in range(n * (degree - 2) // 2):
        a, b = rng.sample(range(n), 2)
        adj[a].add(b)
        adj[b].add(a)
    return kernels.csr(adj)


def cases():
    _, indptr200, indices200 = random_graph(200, 6)
    _, indptr60, indices60 = random_graph(60, 4)
    rng = random.Random(1)
    sizes = [rng.randint(40, 400) for _ in range(64)]
    weights = [6e6, 2e6, 11e6, 6e6]

    def swrr(mod):
        credits = [0.0] * len(weights)
        for _ in range(10_000):
            mod.swrr_pick(credits, weights)

    return {
        "bfs_routes n=200": lambda m: m.bfs_routes(indptr200, indices200, 0),
        "all_pairs_hops n=60": lambda m: m.all_pairs_hops(indptr60, indices60),
        "swrr_pick x10k": swrr,
        "greedy_pack 64 pkts": lambda m: m.greedy_pack(sizes, 28, 1500),
    }


def end_to_end(backend_env: dict) -> float:
    code = (
        "import time; from meshfwd.runner import run; from meshfwd.scenario import preset;"
        "s = preset('paper-10node'); t = time.perf_counter();"
        "run(s, 'gsr'); run(s, 'aal2r'); print(time.perf_counter() - t)"
    )
    env = {**os.environ, **backend_env}
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1

    print(f"{'kernel':24s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        py_out, c_out = fn(_pykernels), fn(_ckernels)
        if py_out != c_out:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        number = 20
        py = min(timeit.repeat(lambda: fn(_pykernels), number=number, repeat=args.repeat)) / number
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=number, repeat=args.repeat)) / number
        print(f"{name:24s} {py * 1e3:10.3f} {cy * 1e3:10.3f} {py / cy:7.1f}x")

    if args.end_to_end:
        py = end_to_end({"MESHFWD_PURE_PYTHON": "1"})
        cy = end_to_end({"MESHFWD_PURE_PYTHON": "0"})
        print(f"{'paper-10node gsr+aal2r':24s} {py * 1e3:10.1f} {cy * 1e3:10.1f} {py / cy:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
