"""Compare the numba and pure-numpy kernels on the two hot loops.

    python3 benchmarks/bench_backends.py [--sizes 32 64 128] [--iters 2000] [--repeat 3]

Prints one line per (kernel, size) with the best-of-``repeat`` wall time for
each backend and the speed-up. The two backends are also checked to agree.
"""
import argparse
import time

import numpy as np

from tvpath.dynamics import HyperParams
from tvpath.kernels import get_backend
from tvpath.lattice import build_lattice
from tvpath.samples import synthetic_image


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def iterate(impl, x, g, alpha, iters, hp):
    def run():
        u = np.zeros((g.pixel_count, 1))
        z = np.zeros((g.edge_count, 1))
        gamma = np.zeros_like(z)
        impl.advance(x, u, z, gamma, g.height, g.width, hp.kappa, alpha, hp.beta,
                     g.edge_count + 1, iters)
        return u, gamma
    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    nb, npy = get_backend("numba"), get_backend("numpy")
    hp = HyperParams()
    print(f"{'kernel':<11}{'size':>9}{'numba s':>11}{'numpy s':>11}{'speed-up':>10}")
    for n in args.sizes:
        g = build_lattice(n, n)
        x = synthetic_image(n, n).reshape(-1, 1)
        alpha = hp.resolve_alpha(g)
        # compile outside the timed region
        iterate(nb, x, g, alpha, 1, hp)()

        t_nb, (u1, g1) = best_of(iterate(nb, x, g, alpha, args.iters, hp), args.repeat)
        t_np, (u2, g2) = best_of(iterate(npy, x, g, alpha, args.iters, hp), args.repeat)
        assert np.allclose(u1, u2, atol=1e-9) and np.array_equal(g1 != 0, g2 != 0)
        print(f"{'advance':<11}{n:>4}x{n:<4}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}x")

        active = np.any(g1 != 0, axis=1)
        nb.components(active, n, n)
        t_nb, (l1, c1) = best_of(lambda: nb.components(active, n, n), args.repeat)
        t_np, (l2, c2) = best_of(lambda: npy.components(active, n, n), args.repeat)
        assert c1 == c2 and np.array_equal(l1, l2)
        print(f"{'components':<11}{n:>4}x{n:<4}{t_nb:>11.4f}{t_np:>11.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
