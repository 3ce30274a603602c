import numpy as np
import pytest

from conftest import random_complex, random_hermitian
from lhvprobe import linalg as la


def test_kron_identity():
    assert la.allclose(la.kron(np.eye(3), np.eye(3)), np.eye(9), atol=0)


def test_kron_basis_bookkeeping():
    p0 = np.diag([1, 0, 0])
    p1 = np.diag([0, 1, 0])
    out = la.kron(p0, p1)
    expected = np.zeros((9, 9))
    expected[1, 1] = 1
    assert la.allclose(out, expected, atol=0)


def test_kron_acts_factorwise(rng):
    for _ in range(20):
        x, y = random_complex(rng, (3, 3)), random_complex(rng, (3, 3))
        u, v = random_complex(rng, 3), random_complex(rng, 3)
        lhs = la.kron(x, y) @ np.kron(u, v)
        # direct multiplication oracle, no Kronecker shortcut on the right
        rhs = np.array([(x @ u)[i] * (y @ v)[j] for i in range(3) for j in range(3)])
        assert la.allclose(lhs, rhs, atol=1e-12)


def test_kron_associative(rng):
    a, b, c = (random_complex(rng, (3, 3)) for _ in range(3))
    assert la.allclose(la.kron(la.kron(a, b), c), la.kron(a, la.kron(b, c)), atol=1e-12)


def test_partial_transpose_of_product(rng):
    a, b = random_complex(rng, (3, 3)), random_complex(rng, (3, 3))
    assert la.allclose(la.partial_transpose_B(la.kron(a, b)), la.kron(a, b.T), atol=1e-12)


def test_partial_transpose_identity_and_involution(rng):
    assert la.allclose(la.partial_transpose_B(np.eye(9)), np.eye(9), atol=0)
    h = random_hermitian(rng)
    assert la.allclose(la.partial_transpose_B(la.partial_transpose_B(h)), h, atol=0)


def test_partial_transpose_block_rule(rng):
    m = random_complex(rng, (9, 9))
    out = la.partial_transpose_B(m)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    assert out[3 * i + k, 3 * j + l] == m[3 * i + l, 3 * j + k]


def test_partial_trace_of_product(rng):
    a, b = random_complex(rng, (3, 3)), random_complex(rng, (3, 3))
    assert la.allclose(la.partial_trace_A(la.kron(a, b)), np.trace(a) * b, atol=1e-12)
    assert la.allclose(la.partial_trace_A(np.eye(9)), 3 * np.eye(3), atol=0)


def test_partial_trace_preserves_trace(rng):
    m = random_complex(rng, (9, 9))
    assert abs(np.trace(la.partial_trace_A(m)) - np.trace(m)) < 1e-12


@pytest.mark.parametrize("op", [la.partial_trace_A, la.partial_transpose_B])
def test_dimension_mismatch(op):
    with pytest.raises(la.DimensionError):
        op(np.eye(4))


def test_eig_examples():
    assert np.allclose(la.hermitian_eig(np.eye(9)).eigenvalues, 1.0)
    assert np.allclose(la.hermitian_eig(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(la.NotHermitianError):
        la.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_eig_contract(rng):
    for _ in range(20):
        h = random_hermitian(rng)
        spec = la.hermitian_eig(h)
        v = spec.eigenvectors
        assert np.all(np.diff(spec.eigenvalues) <= 0)
        assert la.max_abs_diff(spec.reconstruct(), h) <= 1e-10
        assert la.max_abs_diff(v.conj().T @ v, np.eye(9)) <= 1e-10
        assert abs(spec.eigenvalues.sum() - np.trace(h).real) <= 1e-10


def test_gram_matrix_is_psd(rng):
    vecs = random_complex(rng, (4, 9))
    gram = vecs.conj().T @ vecs
    assert la.hermitian_eig(gram).min >= -1e-10
