"""Compare the compiled and numpy kernel backends.

Times the fused operator apply, the CG vector update and one full shifted
solve at a few grid sizes. Usage::

    python3 benchmarks/bench_kernels.py [--n 127 255 511] [--repeat 20]
"""

import argparse
import time

import numpy as np

from gpflow import FrozenHamiltonian, GridSpec, PhysicsParams, WaveField, l2_norm
from gpflow import _kernels_py, linalg

try:
    from gpflow import _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def problem(n):
    g = GridSpec(4.0, 8.0 / (n + 1))
    X, Y = g.mesh()
    G = np.exp(-(X ** 2 + Y ** 2) / 2)
    psi = WaveField.from_components(g, G, G)
    psi = psi / l2_norm(psi)
    p = PhysicsParams(k11=100, k12=94, k22=97, beta=-5, omega1=0.5, omega2=0.5)
    return g, psi, FrozenHamiltonian.at(psi, p)


def bench(n, repeat, backends):
    g, psi, Hf = problem(n)
    p = Hf.params
    u = np.ascontiguousarray(psi.data)
    out = np.empty_like(u)
    rng = np.random.default_rng(0)
    vecs = [rng.standard_normal(u.shape) + 1j * rng.standard_normal(u.shape) for _ in range(4)]
    rows = {}
    for name, mod in backends:
        t_apply = best_of(lambda: mod.apply_shifted_dot(u, Hf.w, g.coords, g.h, p.omega1, p.omega2,
                                                        p.beta, 1.0, 1.0, out), repeat)
        x, r, d, ad = (v.copy() for v in vecs)
        t_upd = best_of(lambda: mod.cg_update(x, r, d, ad, 1e-3), repeat)
        linalg.backend = mod
        try:
            t_solve = best_of(lambda: linalg.solve_shifted(Hf, 1.0, psi), max(1, repeat // 10))
            iters = linalg.solve_shifted(Hf, 1.0, psi)[1].iterations
        finally:
            linalg.backend = backends[0][1]
        rows[name] = (t_apply, t_upd, t_solve, iters)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[127, 255, 511], help="interior points per axis")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = [("numpy", _kernels_py)]
    if _kernels_c is not None:
        backends.insert(0, ("cython", _kernels_c))
    else:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'n':>5} {'backend':>8} {'apply ms':>10} {'update ms':>10} {'solve s':>9} {'CG its':>7}")
    for n in args.n:
        rows = bench(n, args.repeat, backends)
        for name, (ta, tu, ts, its) in rows.items():
            print(f"{n:>5} {name:>8} {1e3 * ta:>10.2f} {1e3 * tu:>10.2f} {ts:>9.3f} {its:>7d}")
        if len(rows) == 2:
            (_, a), (_, b) = rows.items()
            print(f"{n:>5} {'speedup':>8} {b[0] / a[0]:>10.1f} {b[1] / a[1]:>10.1f} {b[2] / a[2]:>9.1f}")


if __name__ == "__main__":
    main()
