"""Compare the compiled and numpy triangulation kernels.

    python3 benchmarks/bench_kernels.py --tracks 20000 --repeat 5
"""

import argparse
import time

import numpy as np

from lcfactor import kernels


def make_tracks(rng, n_tracks, kmin, kmax):
    k = rng.integers(kmin, kmax + 1, n_tracks)
    offsets = np.concatenate([[0], np.cumsum(k)])
    anchors = rng.normal(size=(offsets[-1], 3))
    dirs = rng.normal(size=(offsets[-1], 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return anchors, dirs, offsets


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tracks", type=int, default=20000)
    ap.add_argument("--min-views", type=int, default=2)
    ap.add_argument("--max-views", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    a, w, off = make_tracks(rng, args.tracks, args.min_views, args.max_views)
    print(f"{args.tracks} tracks, {len(a)} lines, best of {args.repeat}")
    results = {}
    for name in kernels.AVAILABLE:
        solve = lambda: kernels.symmedian_batch(a, w, off, backend=name)  # noqa: E731
        X = solve()[0]
        dist = lambda: kernels.line_distances(X, a, w, off, backend=name)  # noqa: E731
        results[name] = (best_of(solve, args.repeat), best_of(dist, args.repeat), X)
        t_s, t_d, _ = results[name]
        print(f"  {name:7s} solve {t_s * 1e3:8.2f} ms   distances {t_d * 1e3:8.2f} ms")
    if len(results) == 2:
        (ts_c, td_c, Xc), (ts_p, td_p, Xp) = results["cython"], results["python"]
        diff = np.nanmax(np.abs(Xc - Xp))
        print(f"  speedup solve {ts_p / ts_c:.1f}x, distances {td_p / td_c:.1f}x; max |dX| {diff:.1e}")
    else:
        print("  compiled extension not built; only the numpy backend is available")


if __name__ == "__main__":
    main()
