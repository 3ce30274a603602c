"""Trichotomic qutrit measurements and their joint outcome statistics.

A measurement basis is the column set of an SU(3) matrix written in the
generalized Euler form

    U = R3(p1) R2(p2) R3(p3) R5(p4) R3(p5) R2(p6) R3(p7) R8(p8),

with ``Rg(x) = exp(i x lambda_g)`` for Gell-Mann matrices lambda_g. Outcome
k of a setting is the projector onto column k of U. Only projectors enter
the statistics, so observable eigenvalues are never stored.
"""

from dataclasses import dataclass

import numpy as np

from ._jit import kernel

SQRT3 = np.sqrt(3.0)
# Order of the setting pairs in every table and file: (A1,B1), (A1,B2), (A2,B1), (A2,B2).
SETTING_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Su3Angles:
    phi: tuple

    def __post_init__(self):
        phi = tuple(float(x) for x in self.phi)
        if len(phi) != 8:
            raise ValueError(f"SU(3) angles need 8 entries, got {len(phi)}")
        if not all(np.isfinite(phi)):
            raise ValueError("SU(3) angles must be finite")
        object.__setattr__(self, "phi", phi)

    def as_array(self):
        return np.array(self.phi)


@dataclass(frozen=True)
class SettingsQuad:
    """Alice's two settings a1, a2 and Bob's two settings b1, b2."""

    a1: Su3Angles
    a2: Su3Angles
    b1: Su3Angles
    b2: Su3Angles

    def as_array(self):
        """The 32 angles in the order a1, a2, b1, b2."""
        return np.concatenate([s.as_array() for s in (self.a1, self.a2, self.b1, self.b2)])

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float).reshape(4, 8)
        return cls(*(Su3Angles(row) for row in values))

    def unitaries(self):
        return [su3_unitary(s) for s in (self.a1, self.a2, self.b1, self.b2)]


@dataclass(frozen=True)
class ProbabilityTable:
    """p[pair, k, l] with pairs ordered as SETTING_PAIRS."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(4, 3, 3)
        object.__setattr__(self, "p", p)

    def flat(self):
        """The 36 entries, pair-major then Alice outcome then Bob outcome."""
        return self.p.reshape(36)

    def rows(self):
        """4x9 row-major layout used by the JSON format."""
        return self.p.reshape(4, 9)

    def violations(self, tol=1e-12):
        bad = []
        if np.any(self.p < -tol) or np.any(self.p > 1 + tol):
            bad.append("range")
        if np.max(np.abs(self.p.sum(axis=(1, 2)) - 1.0)) > tol:
            bad.append("normalization")
        return bad


@kernel
def _su3_kernel(phi):
    """Right-multiply the identity by the eight Euler factors, acting on column pairs."""
    u = np.eye(3, dtype=np.complex128)
    # (factor kind, angle index): 3 -> R3, 2 -> R2, 5 -> R5, 8 -> R8
    kinds = (3, 2, 3, 5, 3, 2, 3, 8)
    for f in range(8):
        x = phi[f]
        kind = kinds[f]
        if kind == 3:
            e = np.exp(1j * x)
            u[:, 0] *= e
            u[:, 1] *= np.conj(e)
        elif kind == 8:
            e = np.exp(1j * x / np.sqrt(3.0))
            u[:, 0] *= e
            u[:, 1] *= e
            u[:, 2] *= np.conj(e) * np.conj(e)
        else:
            c, s = np.cos(x), np.sin(x)
            other = 1 if kind == 2 else 2
            col0 = u[:, 0].copy()
            col1 = u[:, other].copy()
            u[:, 0] = c * col0 - s * col1
            u[:, other] = s * col0 + c * col1
    return u


def su3_unitary_array(phi):
    return _su3_kernel(np.ascontiguousarray(phi, dtype=np.float64))


def su3_unitary(angles):
    return su3_unitary_array(angles.phi)


def _phase(z, tol=1e-15):
    return float(np.angle(z)) if abs(z) > tol else 0.0


def angles_from_su3(u):
    """Euler angles reproducing the SU(3) matrix ``u``.

    The third row of U fixes p4, p5, p6, p7, p8; what remains is an SU(2)
    block on the first two coordinates giving p1, p2, p3.
    """
    u = np.asarray(u, dtype=complex)
    r0, r1, r2 = u[2]
    cos4 = abs(r2)
    # from the other two entries rather than sqrt(1 - cos^2), which loses half the digits near 0
    sin4 = float(np.hypot(abs(r0), abs(r1)))
    p4 = float(np.arctan2(sin4, cos4))
    p8 = -SQRT3 / 2.0 * _phase(r2) if cos4 > 1e-15 else 0.0
    p6 = float(np.arctan2(abs(r1), abs(r0))) if sin4 > 1e-15 else 0.0
    shift = p8 / SQRT3
    plus = _phase(-r0) - shift
    minus = _phase(-r1) - shift
    if abs(r0) <= 1e-15:
        plus = minus
    if abs(r1) <= 1e-15:
        minus = plus
    p5, p7 = 0.5 * (plus + minus), 0.5 * (plus - minus)
    tail = su3_unitary_array([0.0, 0.0, 0.0, p4, p5, p6, p7, p8])
    head = u @ tail.conj().T
    m00, m01 = head[0, 0], head[0, 1]
    p2 = float(np.arctan2(abs(m01), abs(m00)))
    plus = _phase(m00)
    minus = _phase(m01) if abs(m01) > 1e-15 else plus
    if abs(m00) <= 1e-15:
        plus = minus
    p1, p3 = 0.5 * (plus + minus), 0.5 * (plus - minus)
    return Su3Angles((p1, p2, p3, p4, p5, p6, p7, p8))


def measurement_projectors(angles):
    u = su3_unitary(angles)
    return [np.outer(u[:, k], u[:, k].conj()) for k in range(3)]


def _table_numpy(rho, alice, bob):
    r = rho.reshape(3, 3, 3, 3)
    out = np.einsum(
        "xik,yjl,ijmn,xmk,ynl->xykl", alice.conj(), bob.conj(), r, alice, bob, optimize=True
    )
    return np.ascontiguousarray(out.real.reshape(4, 3, 3))


@kernel(fallback=_table_numpy)
def _table_kernel(rho, alice, bob):
    """Joint outcome probabilities for all four setting pairs.

    ``alice`` and ``bob`` are (2, 3, 3) stacks of basis matrices whose columns
    are the measurement vectors.
    """
    out = np.empty((4, 3, 3))
    r = rho.reshape(3, 3, 3, 3)
    for pair in range(4):
        ua = alice[pair // 2]
        ub = bob[pair % 2]
        for k in range(3):
            for l in range(3):
                acc = 0.0 + 0.0j
                for i in range(3):
                    for j in range(3):
                        left = np.conj(ua[i, k] * ub[j, l])
                        for i2 in range(3):
                            for j2 in range(3):
                                acc += left * r[i, j, i2, j2] * ua[i2, k] * ub[j2, l]
                out[pair, k, l] = acc.real
    return out


def _table_array(rho, unitaries):
    ua1, ua2, ub1, ub2 = unitaries
    alice = np.ascontiguousarray(np.stack([ua1, ua2]))
    bob = np.ascontiguousarray(np.stack([ub1, ub2]))
    rho = np.ascontiguousarray(rho, dtype=complex)
    return _table_kernel(rho, alice, bob)


def probability_table(rho, settings):
    """Tr[(Pi_k^{A,i} (x) Pi_l^{B,j}) rho] for the four setting pairs."""
    matrix = getattr(rho, "matrix", rho)
    return ProbabilityTable(_table_array(matrix, settings.unitaries()))


def table_from_unitaries(rho, unitaries):
    matrix = getattr(rho, "matrix", rho)
    return ProbabilityTable(_table_array(matrix, unitaries))


def haar_unitary(rng):
    """Haar-random U(3) via QR of a complex Ginibre matrix with the R-diagonal phase fix."""
    z = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_su3(rng):
    u = haar_unitary(rng)
    return u / np.linalg.det(u) ** (1.0 / 3.0)


def settings_rng(seed, trial=None):
    """Counter-based generator: independent stream per (seed, trial) pair."""
    key = seed if trial is None else (seed, trial)
    return np.random.Generator(np.random.Philox(key=_philox_key(key)))


def _philox_key(key):
    seq = np.random.SeedSequence(key if isinstance(key, int) else list(key))
    return seq.generate_state(2, dtype=np.uint64)


def haar_random_settings(seed, trial=None):
    """Four independent Haar-random measurement bases, stored as Euler angles."""
    rng = settings_rng(seed, trial)
    return SettingsQuad(*(angles_from_su3(haar_su3(rng)) for _ in range(4)))


def uniform_angle_settings(seed, trial=None):
    """Each of the 32 Euler angles uniform in [0, 2 pi)."""
    rng = settings_rng(seed, trial)
    return SettingsQuad.from_array(rng.uniform(0.0, 2.0 * np.pi, 32))


def random_settings(seed, trial=None, mode="haar"):
    if mode == "haar":
        return haar_random_settings(seed, trial)
    if mode == "uniform-angles":
        return uniform_angle_settings(seed, trial)
    raise ValueError(f"unknown sampling mode {mode!r}")


def degenerate_settings(alice, bob):
    """Settings with A1 = A2 and B1 = B2."""
    a = alice if isinstance(alice, Su3Angles) else Su3Angles(alice)
    b = bob if isinstance(bob, Su3Angles) else Su3Angles(bob)
    return SettingsQuad(a, a, b, b)
