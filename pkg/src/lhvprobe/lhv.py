"""Local hidden variable models for the two-setting qutrit Bell scenario.

A local model is a joint distribution over the outcomes (k, l, m, n) of
(A1, A2, B1, B2); it reproduces a probability table when its four pairwise
marginals match the table. Existence is an LP feasibility question, and the
Farkas dual of an empty LP is a Bell functional violated by the table.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import lp
from .measurements import ProbabilityTable, probability_table
from .states import StateAngles, bound_entangled_state, state_from_angles

FEASIBILITY_RESIDUAL = 1e-8
STRATEGY_TOL = 1e-9
MARGIN_TOL = 1e-7

# (A setting, B setting) per table pair; joint axes are (A1, A2, B1, B2)
_PAIR_AXES = ((0, 2), (0, 3), (1, 2), (1, 3))


class LhvError(RuntimeError):
    pass


class NoLocalModelAtZero(LhvError):
    """The base state alone already has no local model at the given settings."""


@dataclass(frozen=True)
class JointDistribution:
    """P(a1=k, a2=l, b1=m, b2=n) stored as a (3, 3, 3, 3) array."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3, 3, 3, 3))

    def flat(self):
        return self.p.reshape(81)

    def marginals(self):
        """The implied 4x3x3 table, computed by summing out the two free outcomes."""
        out = np.empty((4, 3, 3))
        for pair, axes in enumerate(_PAIR_AXES):
            free = tuple(ax for ax in range(4) if ax not in axes)
            out[pair] = self.p.sum(axis=free)
        return out

    def violations(self, tol=1e-9):
        bad = []
        if np.min(self.p) < -tol:
            bad.append("negative")
        if abs(self.p.sum() - 1.0) > tol:
            bad.append("normalization")
        return bad


@dataclass(frozen=True)
class BellCertificate:
    """A Bell functional (one coefficient per table entry) violated by a table."""

    coefficients: np.ndarray
    lhv_bound: float
    quantum_value: float

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=float).reshape(4, 3, 3)
        )

    @property
    def margin(self):
        return self.quantum_value - self.lhv_bound

    def strategy_values(self):
        return deterministic_tables().reshape(81, 36) @ self.coefficients.reshape(36)

    def audit(self):
        """(max strategy value - bound, margin), recomputed by enumerating all 81 strategies."""
        return float(np.max(self.strategy_values()) - self.lhv_bound), self.margin

    def is_sound(self):
        excess, margin = self.audit()
        return excess <= STRATEGY_TOL and margin > MARGIN_TOL


@dataclass(frozen=True)
class FThreshold:
    value: float
    witness_distribution: JointDistribution
    settings: object
    state_angles: StateAngles


def marginal_matrix():
    """36x81 incidence matrix: row (pair, a, b) has a one for every joint outcome consistent with it."""
    mat = np.zeros((36, 81))
    for col, outcome in enumerate(itertools.product(range(3), repeat=4)):
        for pair, (ax, bx) in enumerate(_PAIR_AXES):
            mat[9 * pair + 3 * outcome[ax] + outcome[bx], col] = 1.0
    return mat


_MARGINALS = marginal_matrix()


def build_feasibility(table):
    """81 joint-outcome variables, 36 marginal rows plus one normalization row, zero objective."""
    a = np.vstack([_MARGINALS, np.ones((1, 81))])
    b = np.concatenate([table.flat(), [1.0]])
    return lp.LpProblem(a, b)


def certificate_from_dual(y, table):
    """Turn a Farkas dual of the feasibility LP into a normalized Bell functional.

    Each pair block is shifted so its smallest coefficient is zero and the
    whole functional scaled so its largest coefficient is one; the violation
    is then read in probability units. Shifts leave the margin unchanged since
    every block of a table sums to one.
    """
    coeffs = np.asarray(y[:36], dtype=float).reshape(4, 9)
    shifted = coeffs - coeffs.min(axis=1, keepdims=True)
    top = shifted.max()
    candidates = [coeffs]
    if top > 0:
        candidates.insert(0, shifted / top)
    strategies = deterministic_tables().reshape(81, 36)
    q = table.flat()
    for c in candidates:
        c = c.reshape(36)
        bound = float(np.max(strategies @ c))
        cert = BellCertificate(c, bound, float(c @ q))
        if cert.margin > MARGIN_TOL:
            return cert
    return cert


def lhv_feasible(table):
    """A JointDistribution reproducing ``table``, or a BellCertificate proving none exists."""
    outcome = lp.solve(build_feasibility(table))
    if outcome.feasible:
        dist = JointDistribution(outcome.solution)
        if check_marginals(dist, table) > FEASIBILITY_RESIDUAL:
            raise LhvError("solver returned a distribution that misses the marginals")
        return dist
    if outcome.status != lp.INFEASIBLE:
        raise LhvError(f"unexpected LP status {outcome.status}")
    return certificate_from_dual(outcome.farkas_dual, table)


def is_local(table):
    return isinstance(lhv_feasible(table), JointDistribution)


def check_marginals(dist, table):
    """Largest absolute mismatch over the 36 marginal equations."""
    return float(np.max(np.abs(dist.marginals() - table.p)))


def deterministic_tables():
    """(81, 4, 3, 3): the table of each outcome assignment (k, l, m, n) to (A1, A2, B1, B2)."""
    out = np.zeros((81, 4, 3, 3))
    for s, (k, l, m, n) in enumerate(itertools.product(range(3), repeat=4)):
        out[s, 0, k, m] = 1.0
        out[s, 1, k, n] = 1.0
        out[s, 2, l, m] = 1.0
        out[s, 3, l, n] = 1.0
    return out


def vertex_oracle(table):
    """Membership of ``table`` in the convex hull of the 81 deterministic strategy tables.

    Solved with HiGHS over hull weights, independently of :func:`build_feasibility`
    and of the in-house simplex.
    """
    vertices = deterministic_tables().reshape(81, 36).T
    a_eq = np.vstack([vertices, np.ones((1, 81))])
    b_eq = np.concatenate([table.flat(), [1.0]])
    res = linprog(np.zeros(81), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise LhvError(f"hull-membership LP failed: {res.message}")


def build_admixture_lp(base, admixed):
    """Maximize F with marginals = (1 - F) base + F admixed, 0 <= F <= 1."""
    delta = admixed.flat() - base.flat()
    a = np.zeros((37, 82))
    a[:36, :81] = _MARGINALS
    a[:36, 81] = -delta
    a[36, :81] = 1.0
    b = np.concatenate([base.flat(), [1.0]])
    c = np.zeros(82)
    c[81] = 1.0
    upper = np.full(82, np.inf)
    upper[81] = 1.0
    return lp.LpProblem(a, b, c, upper)


def critical_admixture_tables(base, admixed):
    """(largest F keeping a local model, witnessing distribution) for two fixed tables."""
    outcome = lp.solve(build_admixture_lp(base, admixed))
    if outcome.status == lp.INFEASIBLE:
        raise NoLocalModelAtZero("base table has no local model")
    if not outcome.feasible:
        raise LhvError(f"unexpected LP status {outcome.status}")
    value = float(min(max(outcome.solution[81], 0.0), 1.0))
    return value, JointDistribution(outcome.solution[:81])


def critical_admixture(settings, state_angles, base_state=None):
    """Largest admixture of the state given by ``state_angles`` into rho_B that stays local."""
    base_state = bound_entangled_state() if base_state is None else base_state
    psi = state_from_angles(state_angles)
    base = probability_table(base_state, settings)
    admixed = probability_table(psi.projector(), settings)
    value, dist = critical_admixture_tables(base, admixed)
    return FThreshold(value, dist, settings, state_angles)


def mixed_table(base, admixed, F):
    return ProbabilityTable((1.0 - F) * base.p + F * admixed.p)
