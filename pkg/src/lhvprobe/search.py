"""Experiment drivers: random-settings campaigns and downhill-simplex threshold search."""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lp
from ._fused import MARGINALS, admixture_threshold
from .lhv import BellCertificate, JointDistribution, critical_admixture, lhv_feasible
from .measurements import SettingsQuad, probability_table, random_settings
from .states import (
    CANONICAL_ANGLES,
    PureState,
    StateAngles,
    admixture,
    bound_entangled_state,
    linear_entanglement_degree,
    state_from_angles,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- campaigns


@dataclass
class CampaignConfig:
    trials: int = 10_000
    seed: int = 0
    sampling_mode: str = "haar"
    state_source: str = "rho_b"
    admixture_F: float = None
    psi: np.ndarray = None
    worker_count: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("a campaign needs at least one trial")
        if self.sampling_mode not in ("haar", "uniform-angles"):
            raise ValueError(f"unknown sampling mode {self.sampling_mode!r}")
        if self.state_source not in ("rho_b", "mixture", "custom"):
            raise ValueError(f"unknown state source {self.state_source!r}")
        if self.state_source == "mixture" and self.admixture_F is None:
            raise ValueError("a mixture campaign needs an admixture fraction")
        if self.worker_count < 1:
            raise ValueError("worker_count must be positive")

    def state(self):
        if self.state_source == "rho_b":
            return bound_entangled_state().matrix
        if self.state_source == "mixture":
            psi = PureState(self.psi) if self.psi is not None else None
            if psi is None:
                from .states import canonical_psi

                psi = canonical_psi()
            return admixture(self.admixture_F, psi).matrix
        return np.asarray(self.psi, dtype=complex)

    def echo(self):
        out = {
            "trials": self.trials,
            "seed": self.seed,
            "sampling_mode": self.sampling_mode,
            "state_source": self.state_source,
            "admixture_F": self.admixture_F,
            "worker_count": self.worker_count,
        }
        if self.psi is not None:
            psi = np.asarray(self.psi)
            out["psi"] = np.stack([psi.real, psi.imag], axis=-1).tolist()
        return out


@dataclass
class TrialRecord:
    index: int
    feasible: bool
    # marginal residual when feasible, certificate margin otherwise
    value: float
    settings: SettingsQuad = None
    certificate: BellCertificate = None
    error: str = None


@dataclass
class CampaignReport:
    trials_run: int
    feasible_count: int
    infeasible_records: list
    error_records: list
    wall_time: float
    config: dict
    rows: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        assert self.feasible_count + len(self.infeasible_records) + len(self.error_records) == self.trials_run


def run_trial(rho, seed, index, mode):
    settings = random_settings(seed, index, mode)
    table = probability_table(rho, settings)
    try:
        verdict = lhv_feasible(table)
    except Exception as exc:  # recorded per trial, the campaign keeps going
        return TrialRecord(index, False, math.nan, settings, error=f"{type(exc).__name__}: {exc}")
    if isinstance(verdict, JointDistribution):
        from .lhv import check_marginals

        return TrialRecord(index, True, check_marginals(verdict, table))
    return TrialRecord(index, False, verdict.margin, settings, certificate=verdict)


def _run_chunk(args):
    rho, seed, indices, mode = args
    return [run_trial(rho, seed, i, mode) for i in indices]


def _chunks(n, parts):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [range(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


def run_campaign(config, progress=None):
    """Decide LHV feasibility for ``config.trials`` random settings quadruples.

    Trial t draws its settings from the counter-based stream (seed, t), so the
    report does not depend on ``worker_count``.
    """
    start = time.perf_counter()
    rho = config.state()
    workers = config.worker_count
    if workers == 1:
        records = []
        for i in range(config.trials):
            records.append(run_trial(rho, config.seed, i, config.sampling_mode))
            if progress is not None:
                progress(i + 1)
    else:
        jobs = [(rho, config.seed, r, config.sampling_mode) for r in _chunks(config.trials, 4 * workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [rec for chunk in pool.map(_run_chunk, jobs) for rec in chunk]
    records.sort(key=lambda r: r.index)
    return CampaignReport(
        trials_run=len(records),
        feasible_count=sum(r.feasible for r in records),
        infeasible_records=[r for r in records if not r.feasible and r.error is None],
        error_records=[r for r in records if r.error is not None],
        wall_time=time.perf_counter() - start,
        config=config.echo(),
        rows=records,
    )


# ---------------------------------------------------------------- Nelder-Mead


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool
    reason: str
    trace: list = field(default_factory=list, repr=False)


def nelder_mead(
    func,
    x0,
    step=0.25,
    max_iterations=20_000,
    spread_tol=1e-6,
    value_tol=1e-7,
    reflection=1.0,
    expansion=2.0,
    contraction=0.5,
    shrink=0.5,
    initial_simplex=None,
):
    """Downhill simplex minimization.

    The initial simplex is ``x0`` plus ``step`` along each coordinate unless an
    explicit ``initial_simplex`` of shape (n + 1, n) is given. Stops when every
    vertex is within ``spread_tol`` of the best one (max-norm), when the
    function values span less than ``value_tol``, or after ``max_iterations``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if initial_simplex is None:
        simplex = np.vstack([x0, x0 + step * np.eye(n)])
    else:
        simplex = np.array(initial_simplex, dtype=float)
    values = np.array([func(v) for v in simplex])
    evaluations = n + 1
    trace = []
    iterations = 0
    reason = "max_iterations"
    converged = False
    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        trace.append(float(values[0]))
        if values[-1] - values[0] < value_tol:
            reason, converged = "value_tolerance", True
            break
        if np.max(np.abs(simplex[1:] - simplex[0])) < spread_tol:
            reason, converged = "spread_tolerance", True
            break
        if iterations >= max_iterations:
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + reflection * (centroid - worst)
        fr = func(xr)
        evaluations += 1
        if fr < values[0]:
            xe = centroid + expansion * (xr - centroid)
            fe = func(xe)
            evaluations += 1
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + contraction * (xr - centroid)
            fc = func(xc)
            evaluations += 1
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + contraction * (worst - centroid)
            fc = func(xc)
            evaluations += 1
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        best = simplex[0]
        simplex[1:] = best + shrink * (simplex[1:] - best)
        values[1:] = [func(v) for v in simplex[1:]]
        evaluations += n
    return NelderMeadResult(simplex[0].copy(), float(values[0]), iterations, evaluations, converged, reason, trace)


# ---------------------------------------------------------------- threshold search


@dataclass
class AmoebaConfig:
    restarts: int = 20
    seed: int = 0
    max_iterations: int = 20_000
    simplex_spread_tolerance: float = 1e-6
    value_tolerance: float = 1e-7
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.25
    fixed_state: StateAngles = None
    fixed_settings: SettingsQuad = None
    # starting points are redrawn while the objective sits on the F = 1 plateau
    start_draws: int = 200
    # the simplex is rebuilt around the optimum this many times after convergence
    polish_rounds: int = 1
    worker_count: int = 1

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be positive")
        if not self.expansion > 1:
            raise ValueError("expansion coefficient must exceed 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("at least one restart is required")
        if self.start_draws < 1:
            raise ValueError("start_draws must be positive")

    def echo(self):
        out = asdict(self)
        out["fixed_state"] = None if self.fixed_state is None else self.fixed_state.as_array().tolist()
        out["fixed_settings"] = (
            None if self.fixed_settings is None else self.fixed_settings.as_array().tolist()
        )
        return out


@dataclass
class RestartRecord:
    restart: int
    start_F: float
    best_F: float
    evaluations: int
    iterations: int
    reason: str
    x: np.ndarray = field(repr=False, default=None)


@dataclass
class MinimizationResult:
    best_F: float
    best_settings: SettingsQuad
    best_state_angles: StateAngles
    best_state_vector: PureState
    per_restart_F: list
    evaluations: int
    restarts: list = field(default_factory=list, repr=False)
    config: dict = None

    def audit(self):
        """|critical_admixture(best point) - best_F|."""
        again = critical_admixture(self.best_settings, self.best_state_angles).value
        return abs(again - self.best_F)


class ThresholdObjective:
    """Critical admixture as a function of the free angles, memoized on exact matches.

    Free coordinates are the 32 setting angles followed by the 6 state angles,
    minus whichever block is held fixed.
    """

    def __init__(self, fixed_state=None, fixed_settings=None, base_state=None, max_iter=20_000):
        self.fixed_state = fixed_state
        self.fixed_settings = fixed_settings
        rho = bound_entangled_state().matrix if base_state is None else base_state
        self.rho_base = np.ascontiguousarray(rho, dtype=complex)
        self.max_iter = max_iter
        self.cache = {}
        self.evaluations = 0
        self.failures = 0
        if fixed_state is not None:
            self._mix = np.ascontiguousarray(state_from_angles(fixed_state).projector())
        self.dimension = (0 if fixed_settings is not None else 32) + (0 if fixed_state is not None else 6)
        if self.dimension == 0:
            raise ValueError("nothing left to optimize")

    def split(self, x):
        x = np.asarray(x, dtype=float)
        if self.fixed_settings is None:
            settings, rest = x[:32], x[32:]
        else:
            settings, rest = self.fixed_settings.as_array(), x
        state = self.fixed_state if self.fixed_state is not None else StateAngles.from_array(rest[:6])
        return settings, state

    def __call__(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        settings, state = self.split(x)
        if self.fixed_state is not None:
            mix = self._mix
        else:
            mix = np.ascontiguousarray(state_from_angles(state).projector())
        status, value, _ = admixture_threshold(
            np.ascontiguousarray(settings), self.rho_base, mix, MARGINALS, self.max_iter
        )
        self.evaluations += 1
        if status != 0:
            # no local model for the base state, or a solver failure: worst possible value
            self.failures += 1
            value = 0.0 if status == 1 else 1.0
        value = float(min(max(value, 0.0), 1.0))
        self.cache[key] = value
        return value


def _restart_rng(seed, restart):
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence([seed, restart]).generate_state(2, np.uint64)))


def _one_restart(config, restart):
    objective = ThresholdObjective(config.fixed_state, config.fixed_settings)
    rng = _restart_rng(config.seed, restart)
    x0 = rng.uniform(0.0, TWO_PI, objective.dimension)
    f0 = objective(x0)
    for _ in range(config.start_draws - 1):
        if f0 < 1.0:
            break
        x0 = rng.uniform(0.0, TWO_PI, objective.dimension)
        f0 = objective(x0)
    opts = dict(
        step=config.initial_step,
        max_iterations=config.max_iterations,
        spread_tol=config.simplex_spread_tolerance,
        value_tol=config.value_tolerance,
        reflection=config.reflection,
        expansion=config.expansion,
        contraction=config.contraction,
        shrink=config.shrink,
    )
    res = nelder_mead(objective, x0, **opts)
    iterations = res.iterations
    for _ in range(config.polish_rounds):
        again = nelder_mead(objective, res.x, **opts)
        iterations += again.iterations
        improved = again.fun < res.fun - config.value_tolerance
        if again.fun <= res.fun:
            res = again
        if not improved:
            break
    return RestartRecord(restart, f0, res.fun, objective.evaluations, iterations, res.reason, res.x)


def _restart_job(args):
    config, restart = args
    return _one_restart(config, restart)


def minimize_F(config, progress=None):
    """Minimize the critical admixture over settings (and the admixed state unless fixed)."""
    if config.worker_count == 1:
        records = []
        for r in range(config.restarts):
            records.append(_one_restart(config, r))
            if progress is not None:
                progress(records[-1])
    else:
        with ProcessPoolExecutor(max_workers=config.worker_count) as pool:
            records = list(pool.map(_restart_job, [(config, r) for r in range(config.restarts)]))
    best = min(records, key=lambda rec: (rec.best_F, rec.restart))
    objective = ThresholdObjective(config.fixed_state, config.fixed_settings)
    settings_arr, state = objective.split(best.x)
    settings = SettingsQuad.from_array(settings_arr)
    result = MinimizationResult(
        best_F=best.best_F,
        best_settings=settings,
        best_state_angles=state,
        best_state_vector=state_from_angles(state),
        per_restart_F=[rec.best_F for rec in records],
        evaluations=sum(rec.evaluations for rec in records),
        restarts=records,
        config=config.echo(),
    )
    drift = result.audit()
    if drift > 1e-8:
        raise lp.LpError(f"best point does not reproduce its threshold (drift {drift:.2e})")
    return result


# ---------------------------------------------------------------- entanglement


def max_entanglement_check(restarts=20, seed=0):
    """Most entangled superposition of |v5>..|v8> by downhill simplex over the six state angles."""
    rng = _restart_rng(seed, 0)

    def negative_degree(x):
        return -linear_entanglement_degree(state_from_angles(StateAngles.from_array(x)))

    best = None
    for _ in range(restarts):
        x0 = rng.uniform(0.0, TWO_PI, 6)
        res = nelder_mead(negative_degree, x0, step=0.5, spread_tol=1e-10, value_tol=1e-14)
        res = nelder_mead(negative_degree, res.x, step=0.05, spread_tol=1e-10, value_tol=1e-14)
        if best is None or res.fun < best.fun:
            best = res
    state = state_from_angles(StateAngles.from_array(best.x))
    return state, -best.fun


def default_workers():
    env = os.environ.get("LHVPROBE_WORKERS")
    return int(env) if env else 1
