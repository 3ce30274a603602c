"""Tiles UPB, its bound entangled complement state, and admixtures.

All vectors use the flat two-qutrit ordering of :mod:`lhvprobe.linalg`.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .linalg import ket

SQRT2 = np.sqrt(2.0)
NORM_TOL = 1e-12


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(9)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm - 1.0) <= tol

    def projector(self):
        return la.outer(self.amplitudes)

    def as_matrix(self):
        """Amplitudes reshaped to 3x3 (Alice row index, Bob column index)."""
        return self.amplitudes.reshape(3, 3)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (9, 9):
            raise la.DimensionError(f"density operator must be 9x9, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def violations(self, herm_tol=1e-10, trace_tol=1e-10, psd_tol=1e-9):
        """Names of violated density-operator invariants (empty when valid)."""
        bad = []
        if la.max_abs_diff(self.matrix, la.dagger(self.matrix)) > herm_tol:
            bad.append("hermitian")
            return bad
        if abs(np.trace(self.matrix) - 1.0) > trace_tol:
            bad.append("trace")
        if la.min_eigenvalue(self.matrix) < -psd_tol:
            bad.append("psd")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise StateError(f"invalid density operator: {', '.join(bad)}")
        return self

    def partial_transpose_min_eigenvalue(self):
        return la.min_eigenvalue(la.partial_transpose_B(self.matrix))


@dataclass(frozen=True)
class StateAngles:
    """Six angles for a superposition of |v5>..|v8>.

    a5 = sin(psi) sin(theta) cos(phi)
    a6 = e^{i chi1} sin(psi) sin(theta) sin(phi)
    a7 = e^{i chi2} sin(psi) cos(theta)
    a8 = e^{i chi3} cos(psi)
    """

    psi: float
    theta: float
    phi: float
    chi1: float
    chi2: float
    chi3: float

    def as_array(self):
        return np.array([self.psi, self.theta, self.phi, self.chi1, self.chi2, self.chi3])

    @classmethod
    def from_array(cls, values):
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValueError(f"expected 6 state angles, got {len(values)}")
        return cls(*values)

    def coefficients(self):
        sp, cp = np.sin(self.psi), np.cos(self.psi)
        st, ct = np.sin(self.theta), np.cos(self.theta)
        coeffs = np.array(
            [
                sp * st * np.cos(self.phi),
                np.exp(1j * self.chi1) * sp * st * np.sin(self.phi),
                np.exp(1j * self.chi2) * sp * ct,
                np.exp(1j * self.chi3) * cp,
            ]
        )
        assert abs(np.linalg.norm(coeffs) - 1.0) <= NORM_TOL
        return coeffs


CANONICAL_ANGLES = StateAngles(np.pi / 2, np.pi / 2, np.pi / 4, 0.0, 0.0, 0.0)


def _upb_vectors(v4_coefficient=1.0 / 3.0):
    ones = ket(0, 0) * 0
    for i in range(3):
        for j in range(3):
            ones = ones + ket(i, j)
    return [
        (ket(0, 0) - ket(0, 1)) / SQRT2,
        (ket(0, 2) - ket(1, 2)) / SQRT2,
        (ket(2, 1) - ket(2, 2)) / SQRT2,
        (ket(1, 0) - ket(2, 0)) / SQRT2,
        v4_coefficient * ones,
    ]


def tiles_upb(v4_coefficient=1.0 / 3.0):
    """The five Tiles product vectors |v0>..|v4>.

    ``v4_coefficient`` exists only so diagnostics can inject a broken
    normalization; the default makes |v4> a unit vector.
    """
    return [PureState(v) for v in _upb_vectors(v4_coefficient)]


def _plus_vectors():
    return [
        (ket(0, 0) + ket(0, 1)) / SQRT2,
        (ket(0, 2) + ket(1, 2)) / SQRT2,
        (ket(2, 1) + ket(2, 2)) / SQRT2,
        (ket(1, 0) + ket(2, 0)) / SQRT2,
    ]


def complement_basis():
    """|v5>..|v8>, an orthonormal basis of the UPB's orthogonal complement."""
    p0, p1, p2, p3 = _plus_vectors()
    return [
        PureState((p0 - p1) / SQRT2),
        PureState((p2 - p3) / SQRT2),
        PureState((p0 + p1 - p2 - p3) / 2),
        PureState((p0 + p1 + p2 + p3) / 6 - (2 * SQRT2 / 3) * ket(1, 1)),
    ]


def full_basis(v4_coefficient=1.0 / 3.0):
    return tiles_upb(v4_coefficient) + complement_basis()


def upb_projector(v4_coefficient=1.0 / 3.0):
    return sum(v.projector() for v in tiles_upb(v4_coefficient))


def bound_entangled_state():
    """(I - P_upb) / (N^2 - d) with N = 3 and d = 5."""
    return DensityOperator((np.eye(9) - upb_projector()) / 4.0)


def state_from_angles(angles):
    coeffs = angles.coefficients()
    amps = sum(c * v.amplitudes for c, v in zip(coeffs, complement_basis()))
    return PureState(amps)


def complement_coefficients(psi):
    """Coordinates of ``psi`` in the |v5>..|v8> basis."""
    basis = np.array([v.amplitudes for v in complement_basis()])
    return basis.conj() @ psi.amplitudes


def fix_global_phase(coeffs, tol=1e-14):
    """Rotate the global phase so the first nonzero coefficient is real and nonnegative.

    The angle map makes a5 real, so the cascade starts at a5 and falls back to
    a6, a7, a8 in turn when earlier coefficients vanish.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    for c in coeffs:
        if abs(c) > tol:
            return coeffs * (abs(c) / c)
    return coeffs


def angles_from_coefficients(coeffs):
    """Inverse of the six-angle map, for coefficients already phase-fixed."""
    a5, a6, a7, a8 = np.asarray(coeffs, dtype=complex)
    psi = np.arctan2(np.sqrt(abs(a5) ** 2 + abs(a6) ** 2 + abs(a7) ** 2), abs(a8))
    theta = np.arctan2(np.hypot(abs(a5), abs(a6)), abs(a7))
    phi = np.arctan2(abs(a6), a5.real)
    chi = [float(np.angle(a)) if abs(a) > 0 else 0.0 for a in (a6, a7, a8)]
    return StateAngles(float(psi), float(theta), float(phi), *chi)


def admixture(F, psi):
    """(1 - F) rho_B + F |psi><psi| for 0 <= F <= 1."""
    F = float(F)
    if not 0.0 <= F <= 1.0:
        raise StateError(f"admixture fraction must lie in [0, 1], got {F}")
    if not psi.is_normalized():
        raise StateError("admixed state must be normalized")
    rho_b = bound_entangled_state().matrix
    return DensityOperator((1.0 - F) * rho_b + F * psi.projector())


def canonical_psi():
    """(|v5> + |v6>) / sqrt(2)."""
    v5, v6 = complement_basis()[:2]
    return PureState((v5.amplitudes + v6.amplitudes) / SQRT2)


def maximally_entangled():
    return PureState((ket(0, 0) + ket(1, 1) + ket(2, 2)) / np.sqrt(3.0))


def linear_entanglement_degree(psi):
    """(3/2) (1 - Tr[rho_B^2]) for the reduced state of Bob; 0 for products, 1 when maximal."""
    reduced = la.partial_trace_A(psi.projector())
    purity = float(np.real(np.trace(reduced @ reduced)))
    return 1.5 * (1.0 - purity)


def upb_overlap(a, b, projector=None):
    """||P_upb (a (x) b)||^2 for normalized single-qutrit vectors a and b."""
    p = upb_projector() if projector is None else projector
    v = np.kron(a, b)
    return float(np.real(np.vdot(v, p @ v)))


def min_product_overlap(restarts=50, iterations=200, seed=0):
    """Smallest ||P_upb |a>|b>||^2 found by alternating minimization over product states.

    With a fixed, the overlap is a quadratic form in b whose minimizer is the
    lowest eigenvector of a 3x3 matrix, and symmetrically for a.
    """
    rng = np.random.default_rng(seed)
    p = upb_projector().reshape(3, 3, 3, 3)
    best = np.inf
    for _ in range(restarts):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        a /= np.linalg.norm(a)
        for _ in range(iterations):
            mb = np.einsum("i,ikjl,j->kl", a.conj(), p, a)
            b = np.linalg.eigh(mb)[1][:, 0]
            ma = np.einsum("k,ikjl,l->ij", b.conj(), p, b)
            w, vecs = np.linalg.eigh(ma)
            a = vecs[:, 0]
        best = min(best, float(w[0]))
    return best
