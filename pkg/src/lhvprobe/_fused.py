"""Fused angles -> tables -> admixture-LP kernel used as the minimizer's objective."""

import numpy as np

from ._jit import Kernel
from .lp import _simplex_kernel
from .measurements import _su3_kernel, _table_kernel


def _marginal_matrix():
    mat = np.zeros((36, 81))
    col = 0
    for k in range(3):
        for l in range(3):
            for m in range(3):
                for n in range(3):
                    mat[3 * k + m, col] = 1.0
                    mat[9 + 3 * k + n, col] = 1.0
                    mat[18 + 3 * l + m, col] = 1.0
                    mat[27 + 3 * l + n, col] = 1.0
                    col += 1
    return mat


def _make_threshold(su3, table, simplex):
    def admixture_threshold(angles, rho_base, rho_mix, marginals, max_iter):
        """Largest local-model admixture F at 32 setting angles (a1, a2, b1, b2).

        Returns (status, F, joint distribution); status is the simplex code.
        """
        alice = np.empty((2, 3, 3), dtype=np.complex128)
        bob = np.empty((2, 3, 3), dtype=np.complex128)
        alice[0] = su3(angles[0:8])
        alice[1] = su3(angles[8:16])
        bob[0] = su3(angles[16:24])
        bob[1] = su3(angles[24:32])
        base = table(rho_base, alice, bob).reshape(36)
        mix = table(rho_mix, alice, bob).reshape(36)
        a = np.zeros((37, 82))
        a[:36, :81] = marginals
        a[:36, 81] = base - mix
        a[36, :81] = 1.0
        b = np.zeros(37)
        b[:36] = base
        b[36] = 1.0
        cost = np.zeros(82)
        cost[81] = -1.0
        upper = np.full(82, np.inf)
        upper[81] = 1.0
        status, x, _, _, _ = simplex(a, b, cost, upper, max_iter, 1e-10, 1e-9, 1e-9, 40)
        return status, x[81], x[:81]

    return admixture_threshold


admixture_threshold = Kernel.from_factory(_make_threshold, _su3_kernel, _table_kernel, _simplex_kernel)
MARGINALS = _marginal_matrix()
