"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both variants are imported directly, so the ``EPRPHASE_DISABLE_NUMBA`` flag
does not matter here.  Each case also checks that the two variants agree.
"""

import argparse
import timeit

import numpy as np

from eprphase import kernels


def _best(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_displacement(sizes, repeat):
    for size in sizes:
        x = 4.0
        t_nb = _best(lambda: kernels.displacement_table_numba(x, size), repeat)
        t_np = _best(lambda: kernels.displacement_table_numpy(x, size), repeat)
        diff = np.max(np.abs(kernels.displacement_table_numba(x, size) - kernels.displacement_table_numpy(x, size)))
        yield f"displacement_table N={size}", t_nb, t_np, f"max |diff| {diff:.1e}"


def bench_tally(cells, n_draws, repeat):
    rng = np.random.default_rng(0)
    u = rng.random(n_draws)
    for n_cells in cells:
        cdf = np.cumsum(rng.random(n_cells))
        cdf /= cdf[-1]
        t_nb = _best(lambda: kernels.tally_cells_numba(cdf, u), repeat)
        t_np = _best(lambda: kernels.tally_cells_numpy(cdf, u), repeat)
        same = np.array_equal(kernels.tally_cells_numba(cdf, u), kernels.tally_cells_numpy(cdf, u))
        yield f"tally_cells cells={n_cells} draws={n_draws}", t_nb, t_np, "identical" if same else "MISMATCH"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--draws", type=int, default=1 << 18)
    args = p.parse_args()

    rows = [
        *bench_displacement([64, 256, 1024], args.repeat),
        *bench_tally([16**2, 64**2, 160**2], args.draws, args.repeat),
    ]
    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numba [ms]':>11}  {'numpy [ms]':>11}  {'speedup':>8}  check")
    for name, t_nb, t_np, check in rows:
        print(f"{name:<{width}}  {t_nb * 1e3:11.3f}  {t_np * 1e3:11.3f}  {t_np / t_nb:8.1f}  {check}")


if __name__ == "__main__":
    main()
