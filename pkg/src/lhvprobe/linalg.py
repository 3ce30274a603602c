"""Dense complex linear algebra for two qutrits.

The tensor basis is fixed project-wide: ``|i>_A |j>_B`` sits at flat index
``3*i + j``. All approximate comparisons use an absolute max-norm tolerance.
"""

from dataclasses import dataclass

import numpy as np

ATOL = 1e-10
DIM = 3


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def min(self):
        return float(self.eigenvalues[-1])

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m):
    return np.asarray(m, dtype=complex)


def max_abs_diff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def allclose(a, b, atol=ATOL):
    return max_abs_diff(a, b) <= atol


def dagger(m):
    return np.conj(np.asarray(m)).T


def kron(a, b):
    return np.kron(as_matrix(a), as_matrix(b))


def _check_two_qutrit(m):
    m = as_matrix(m)
    if m.shape != (DIM * DIM, DIM * DIM):
        raise DimensionError(f"expected a 9x9 operator, got shape {m.shape}")
    return m


def partial_transpose_B(m):
    """Transpose Bob's indices: block (i, j) entry (k, l) -> block (i, j) entry (l, k)."""
    t = _check_two_qutrit(m).reshape(DIM, DIM, DIM, DIM)
    return t.transpose(0, 3, 2, 1).reshape(DIM * DIM, DIM * DIM)


def partial_trace_A(m):
    """Trace out Alice; ``out[k, l] = sum_i m[(i, k), (i, l)]``."""
    t = _check_two_qutrit(m).reshape(DIM, DIM, DIM, DIM)
    return np.einsum("ikil->kl", t)


def partial_trace_B(m):
    t = _check_two_qutrit(m).reshape(DIM, DIM, DIM, DIM)
    return np.einsum("ikjk->ij", t)


def hermitian_eig(m, atol=ATOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Raises NotHermitianError when ``max|m - m^dagger| > atol``.
    """
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if max_abs_diff(m, dagger(m)) > atol:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    order = np.argsort(w)[::-1]
    return HermitianSpectrum(eigenvalues=w[order], eigenvectors=v[:, order])


def min_eigenvalue(m):
    return hermitian_eig(m).min


def ket(i, j):
    """Computational product basis vector |i>|j>."""
    v = np.zeros(DIM * DIM, dtype=complex)
    v[DIM * i + j] = 1.0
    return v


def outer(u, v=None):
    u = np.asarray(u, dtype=complex)
    v = u if v is None else np.asarray(v, dtype=complex)
    return np.outer(u, v.conj())
