import numpy as np
import pytest

from lhvprobe import search
from lhvprobe.lhv import critical_admixture
from lhvprobe.measurements import degenerate_settings, haar_random_settings
from lhvprobe.states import (
    CANONICAL_ANGLES,
    StateAngles,
    complement_basis,
    linear_entanglement_degree,
    state_from_angles,
)


def test_campaign_on_maximally_mixed_state():
    report = search.run_campaign(search.CampaignConfig(trials=100, seed=3, state_source="custom", psi=np.eye(9) / 9))
    assert report.feasible_count == 100
    assert report.infeasible_records == [] and report.error_records == []
    assert all(r.value <= 1e-8 for r in report.rows)


def test_campaign_above_threshold_finds_violations():
    report = search.run_campaign(search.CampaignConfig(trials=1000, seed=0, state_source="mixture", admixture_F=0.9))
    # observed when frozen: 45 of 1000 (seed 0)
    assert len(report.infeasible_records) == 45
    assert report.feasible_count == 955
    for rec in report.infeasible_records:
        assert rec.certificate.is_sound()


def test_campaign_independent_of_workers():
    base = dict(trials=60, seed=11, state_source="mixture", admixture_F=0.9)
    one = search.run_campaign(search.CampaignConfig(**base, worker_count=1))
    two = search.run_campaign(search.CampaignConfig(**base, worker_count=2))
    assert [(r.index, r.feasible, r.value) for r in one.rows] == [(r.index, r.feasible, r.value) for r in two.rows]


@pytest.mark.parametrize(
    "kwargs",
    [dict(trials=0), dict(sampling_mode="sobol"), dict(state_source="mixture"), dict(worker_count=0)],
)
def test_campaign_config_validation(kwargs):
    with pytest.raises(ValueError):
        search.CampaignConfig(**kwargs)


def test_nelder_mead_quadratic():
    res = search.nelder_mead(lambda x: float(np.sum((x - np.arange(4)) ** 2)), np.zeros(4), step=1.0, value_tol=1e-16, spread_tol=1e-10)
    assert res.converged
    assert np.allclose(res.x, np.arange(4), atol=1e-6)


def test_nelder_mead_rosenbrock():
    def rosen(x):
        return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)

    res = search.nelder_mead(rosen, [-1.2, 1.0], step=0.5, value_tol=1e-18, spread_tol=1e-12)
    assert np.allclose(res.x, [1, 1], atol=1e-5)


def test_nelder_mead_flat_objective_stops_at_once():
    res = search.nelder_mead(lambda x: 1.0, np.zeros(5))
    assert res.reason == "value_tolerance" and res.iterations == 0 and res.evaluations == 6


def test_nelder_mead_iteration_cap():
    res = search.nelder_mead(lambda x: float(np.sum(x**2)), np.ones(3), max_iterations=2)
    assert res.iterations == 2 and not res.converged


@pytest.mark.parametrize(
    "kwargs",
    [dict(reflection=0), dict(expansion=1), dict(contraction=1), dict(shrink=0), dict(restarts=0)],
)
def test_amoeba_config_validation(kwargs):
    with pytest.raises(ValueError):
        search.AmoebaConfig(**kwargs)


def test_frozen_degenerate_settings_give_flat_objective():
    settings = degenerate_settings(*_pair(haar_random_settings(1)))
    config = search.AmoebaConfig(restarts=1, seed=0, fixed_settings=settings, start_draws=1)
    result = search.minimize_F(config)
    assert result.best_F == 1.0
    assert result.restarts[0].reason == "value_tolerance"
    assert result.restarts[0].iterations == 0


def test_tiny_budget_result_is_consistent():
    config = search.AmoebaConfig(restarts=2, seed=4, max_iterations=1, fixed_state=CANONICAL_ANGLES, start_draws=3)
    result = search.minimize_F(config)
    assert result.best_F == min(result.per_restart_F)
    assert 0.0 <= result.best_F <= 1.0
    assert result.audit() <= 1e-8
    assert len(result.restarts) == 2


def test_objective_memoizes_exact_matches():
    objective = search.ThresholdObjective(fixed_state=CANONICAL_ANGLES)
    x = haar_random_settings(2).as_array()
    first = objective(x)
    assert objective(x.copy()) == first
    assert objective.evaluations == 1
    assert first == pytest.approx(
        critical_admixture(haar_random_settings(2), CANONICAL_ANGLES).value, abs=1e-12
    )


def test_objective_dimension():
    assert search.ThresholdObjective().dimension == 38
    assert search.ThresholdObjective(fixed_state=CANONICAL_ANGLES).dimension == 32
    assert search.ThresholdObjective(fixed_settings=haar_random_settings(0)).dimension == 6


def test_restarts_repeat_with_same_seed():
    config = search.AmoebaConfig(restarts=1, seed=9, max_iterations=50, fixed_state=CANONICAL_ANGLES)
    a, b = search.minimize_F(config), search.minimize_F(config)
    assert a.best_F == b.best_F
    assert a.best_settings.as_array().tobytes() == b.best_settings.as_array().tobytes()


def test_max_entanglement_check():
    state, degree = search.max_entanglement_check()
    assert abs(degree - 15 / 16) <= 1e-6
    assert linear_entanglement_degree(state) == pytest.approx(degree, abs=1e-12)


def test_v8_is_less_entangled():
    v8 = state_from_angles(StateAngles(0, 0, 0, 0, 0, 0))
    assert np.allclose(np.abs(v8.amplitudes), np.abs(complement_basis()[3].amplitudes))
    degree = linear_entanglement_degree(v8)
    # oracle: reduced state from the 3x3 coefficient matrix
    m = v8.as_matrix()
    red = m.T @ m.conj()
    assert degree == pytest.approx(1.5 * (1 - np.trace(red @ red).real), abs=1e-12)
    assert degree < 15 / 16


def test_degree_bounded_by_one():
    rng = np.random.default_rng(8)
    for x in rng.uniform(0, 2 * np.pi, (10_000, 6)):
        assert linear_entanglement_degree(state_from_angles(StateAngles.from_array(x))) <= 1 + 1e-12


def _pair(settings):
    return settings.a1, settings.b1
