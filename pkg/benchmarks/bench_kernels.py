"""Compiled vs interpreted kernels.

Times the numba and pure-numpy paths of each hot kernel on the same inputs
and checks that they agree. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from lhvprobe import _jit
from lhvprobe._fused import MARGINALS, admixture_threshold
from lhvprobe.lhv import build_feasibility
from lhvprobe.lp import FEAS_TOL, OPT_TOL, PIVOT_TOL, REFACTOR_EVERY, _simplex_kernel
from lhvprobe.measurements import _su3_kernel, _table_kernel, haar_random_settings, probability_table
from lhvprobe.states import bound_entangled_state, canonical_psi


def best_of(func, args, repeat):
    func(*args)  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = func(*args)
        times.append(time.perf_counter() - t)
    return min(times), out


def cases():
    rho = np.ascontiguousarray(bound_entangled_state().matrix, dtype=complex)
    mix = np.ascontiguousarray(canonical_psi().projector())
    settings = haar_random_settings(0)
    us = settings.unitaries()
    alice, bob = np.ascontiguousarray(np.stack(us[:2])), np.ascontiguousarray(np.stack(us[2:]))
    problem = build_feasibility(probability_table(rho, settings))
    lp_args = (
        problem.constraint_matrix, problem.rhs, -problem.objective, problem.upper,
        20_000, PIVOT_TOL, FEAS_TOL, OPT_TOL, REFACTOR_EVERY,
    )
    yield "su3 unitary", _su3_kernel, (settings.as_array()[:8].copy(),), lambda r: r
    yield "probability table", _table_kernel, (rho, alice, bob), lambda r: r
    # feasibility LPs have many optimal vertices, so compare the constraint residuals
    a, b = problem.constraint_matrix, problem.rhs
    yield "feasibility simplex", _simplex_kernel, lp_args, lambda r: [r[0], np.max(np.abs(a @ r[1] - b))]
    yield "fused admixture threshold", admixture_threshold, (settings.as_array(), rho, mix, MARGINALS, 20_000), lambda r: r[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()
    if not _jit.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':28s} {'numpy':>12s} {'numba':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, k, call_args, key in cases():
        t_py, out_py = best_of(k.py, call_args, args.repeat)
        t_jit, out_jit = best_of(k.jit, call_args, args.repeat)
        diff = float(np.max(np.abs(np.asarray(key(out_py)) - np.asarray(key(out_jit)))))
        print(f"{name:28s} {t_py * 1e6:10.1f}us {t_jit * 1e6:10.1f}us {t_py / t_jit:7.1f}x {diff:10.1e}")


if __name__ == "__main__":
    main()
