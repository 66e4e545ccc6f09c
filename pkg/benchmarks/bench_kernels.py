"""Numba kernels vs their numpy twins, plus one end-to-end solve.

    python benchmarks/bench_kernels.py [--repeat N]

Per-call times in microseconds. The end-to-end row times one reduced and one
full vector-field evaluation of the ball-HOCS system under the active flavour
(set HDPREDUCE_DISABLE_JIT=1 to time the numpy path).
"""
import argparse
import timeit

import numpy as np

from hdpreduce import _kernels as K
from hdpreduce._jit import JIT_AVAILABLE, JIT_ENABLED


def cases(rng):
    v = rng.normal(size=3)
    m = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    e = v / np.linalg.norm(v)
    a = rng.normal(size=(8, 11))
    E = rng.normal(size=(11, 13))
    r = E @ rng.normal(size=13)
    L = rng.normal(size=(8, 13))
    c = rng.normal(size=8)
    return {
        "hat": (v,),
        "cross": (v, m[0].copy()),
        "exp_so3": (v,),
        "polar": (m,),
        "sphere_frame": (e,),
        "orth_basis": (a, 1e-10),
        "null_basis": (a, 1e-10),
        "min_norm_constrained": (E, r, L, c, 1e-10),
        "so3_defect": (m,),
    }


def bench(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for name, args in cases(rng).items():
        t_np = min(timeit.repeat(lambda: K.flavour(name, False)(*args), number=repeat, repeat=3))
        if JIT_AVAILABLE:
            fn = K.flavour(name, True)
            fn(*args)  # compile
            t_nb = min(timeit.repeat(lambda: fn(*args), number=repeat, repeat=3))
        else:
            t_nb = float("nan")
        rows.append((name, 1e6 * t_np / repeat, 1e6 * t_nb / repeat))
    return rows


def bench_solve(n=20):
    from hdpreduce.bundle import atiyah_cotangent
    from hdpreduce.fullspace import full_vector_field
    from hdpreduce.reduction import solve_reduced_step
    from hdpreduce.scenarios import ball_hocs
    sc = ball_hocs()
    s = sc.near_top_state(0)
    r = atiyah_cotangent(s, sc.problem.conn)
    solve_reduced_step(sc.problem, r)
    full_vector_field(sc.dynamics, s)
    t_red = min(timeit.repeat(lambda: solve_reduced_step(sc.problem, r), number=n, repeat=3)) / n
    t_full = min(timeit.repeat(lambda: full_vector_field(sc.dynamics, s), number=n, repeat=3)) / n
    return 1e6 * t_red, 1e6 * t_full


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    print(f"numba available: {JIT_AVAILABLE}, active flavour: {'numba' if JIT_ENABLED else 'numpy'}")
    print(f"{'kernel':<22}{'numpy us':>12}{'numba us':>12}{'speedup':>10}")
    for name, t_np, t_nb in bench(args.repeat):
        print(f"{name:<22}{t_np:12.2f}{t_nb:12.2f}{t_np / t_nb:10.1f}")
    t_red, t_full = bench_solve()
    print(f"reduced solve {t_red:.0f} us, full solve {t_full:.0f} us")


if __name__ == "__main__":
    main()
