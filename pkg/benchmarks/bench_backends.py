"""Compiled vs pure-Python kernel timings on identical inputs.

    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse

from simclust import _backend
from simclust.bench import backend_timings


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _backend.has_compiled():
        print("compiled kernels not built; timing the Python fallback only")
    rows = backend_timings(args.repeats, args.seed)
    by_method = {r.method: r.seconds for r in rows}
    print(f"{'kernel':<14}{'compiled (s)':>14}{'python (s)':>14}{'speedup':>10}")
    for kernel in ("sinkhorn", "linkage", "simulate_day"):
        py = by_method[f"{kernel}-python"]
        comp = by_method.get(f"{kernel}-compiled")
        if comp is None:
            print(f"{kernel:<14}{'-':>14}{py:>14.5f}{'-':>10}")
        else:
            print(f"{kernel:<14}{comp:>14.5f}{py:>14.5f}{py / comp:>9.1f}x")


if __name__ == "__main__":
    main()
