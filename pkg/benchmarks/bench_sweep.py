"""Time the compiled and numpy fast sweeping kernels on strip grids of growing size.

    python3 benchmarks/bench_sweep.py --sizes 64 128 256 --repeat 3
"""
import argparse
import time

import numpy as np

from geosigma import kernels
from geosigma.eikonal import make_strip_grid, _speed
from geosigma.medium import direction_frame, make_field


def best_time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256],
                    help="nodes per unit length (delta = 1/size)")
    ap.add_argument("--expr", default="1+0.5*sin(2*pi*x1)^2*sin(2*pi*x2)^2")
    ap.add_argument("--p", default="1,2")
    ap.add_argument("--H", type=float, default=4.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    field = make_field(args.expr)
    frame = direction_frame(tuple(int(v) for v in args.p.split(",")))
    compiled = kernels.sweep_half_compiled
    print(f"{'delta':>8} {'nodes':>9} {'compiled s':>11} {'python s':>10} {'speedup':>8} {'max|diff|':>10}")
    for n in args.sizes:
        grid = make_strip_grid(frame, 1.0 / n, args.H)
        speed = np.ascontiguousarray(np.sqrt(_speed(field, grid))[grid.M:])
        call = lambda k: k(speed, grid.delta, grid.dt, True, 1e-10 * grid.delta, 1000)
        tp, (dp, _, _) = best_time(lambda: call(kernels.sweep_half_python), args.repeat)
        if compiled is None:
            print(f"{grid.delta:8.5f} {speed.size:9d} {'n/a':>11} {tp:10.4f} {'n/a':>8} {'n/a':>10}")
            continue
        tc, (dc, _, _) = best_time(lambda: call(compiled), args.repeat)
        diff = float(np.max(np.abs(dc - dp)))
        print(f"{grid.delta:8.5f} {speed.size:9d} {tc:11.4f} {tp:10.4f} {tp / tc:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
