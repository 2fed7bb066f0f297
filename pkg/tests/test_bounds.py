import numpy as np
import pytest

from construal_irl import (
    FULLY_AWARE,
    NOTCH_UNAWARE,
    BoundReport,
    RewardHypothesis,
    ValidationError,
    compile_mdp,
    dynamics_l1_gap,
    empirical_gap,
    performance_gap_bound,
    verify_bound,
)

from conftest import random_mdp
from oracles import elementwise_l1_gap

REWARDS = RewardHypothesis({"pink": 1.0, "yellow": 0.5}, step_reward=-0.01)


def test_bound_formula():
    assert performance_gap_bound(1.0, 0.5, 2.0) == 0.5 * 1.0 / 0.25 * 2.0
    assert performance_gap_bound(3.0, 0.0, 1.0) == 0.0
    assert performance_gap_bound(0.0, 0.9, 2.0) == 0.0


def test_bound_formula_validation():
    with pytest.raises(ValidationError):
        performance_gap_bound(-1.0, 0.5, 1.0)
    with pytest.raises(ValidationError):
        performance_gap_bound(1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        performance_gap_bound(1.0, 0.5, 2.5)


def test_bound_monotone_in_each_argument():
    gammas = np.linspace(0.1, 0.95, 8)
    r_maxes = np.linspace(0.5, 3.0, 6)
    l1s = np.linspace(0.0, 2.0, 5)
    for r in r_maxes:
        for l1 in l1s:
            vals = [performance_gap_bound(r, g, l1) for g in gammas]
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    for g in gammas:
        for l1 in l1s:
            vals = [performance_gap_bound(r, g, l1) for r in r_maxes]
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    for g in gammas:
        for r in r_maxes:
            vals = [performance_gap_bound(r, g, l1) for l1 in l1s]
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_l1_gap_matches_loop_oracle_and_is_symmetric():
    rng = np.random.default_rng(60)
    for _ in range(10):
        a = random_mdp(rng, n_states=5, n_actions=3).dynamics
        b = random_mdp(rng, n_states=5, n_actions=3).dynamics
        gap = dynamics_l1_gap(a, b)
        assert gap == pytest.approx(elementwise_l1_gap(a, b), abs=1e-12)
        assert gap == dynamics_l1_gap(b, a)
        assert 0.0 <= gap <= 2.0 + 1e-12
    assert dynamics_l1_gap(a, a) == 0.0
    with pytest.raises(ValidationError):
        dynamics_l1_gap(a, a[:, :2])


def test_empirical_gap_zero_for_same_policy():
    rng = np.random.default_rng(61)
    mdp = random_mdp(rng)
    from construal_irl import Policy

    probs = rng.dirichlet(np.ones(mdp.n_actions), size=mdp.n_states)
    policy = Policy(probs)
    assert empirical_gap(mdp, policy, policy) == 0.0


def test_verify_bound_on_random_pairs():
    rng = np.random.default_rng(62)
    for _ in range(25):
        true_mdp = random_mdp(rng, n_states=6, n_actions=3, gamma=0.9)
        # perturbed dynamics, shared reward and discount
        noise = rng.dirichlet(np.ones(6), size=(6, 3))
        mix = 0.5 * true_mdp.dynamics + 0.5 * noise
        construed = type(true_mdp)(
            n_states=6,
            n_actions=3,
            initial_dist=true_mdp.initial_dist,
            dynamics=mix,
            reward=true_mdp.reward,
            discount=0.9,
            terminal_states=frozenset(),
        )
        report = verify_bound(true_mdp, construed, beta=0.1)
        assert report.satisfied
        assert report.empirical_gap <= report.bound_value + 1e-9
        assert report.l1_gap == dynamics_l1_gap(true_mdp.dynamics, construed.dynamics)
        assert report.r_max == np.abs(true_mdp.reward).max()


def test_verify_bound_on_notch_pair(shipped_grids):
    for grid in shipped_grids.values():
        true_mdp = compile_mdp(grid, FULLY_AWARE, REWARDS)
        construed = compile_mdp(grid, NOTCH_UNAWARE, REWARDS)
        report = verify_bound(true_mdp, construed)
        assert report.satisfied
        assert report.l1_gap == 2.0
        assert report.r_max == 1.0
        assert report.gamma == true_mdp.discount


def test_verify_bound_identical_dynamics_gives_zero_gap():
    rng = np.random.default_rng(63)
    mdp = random_mdp(rng, gamma=0.8)
    report = verify_bound(mdp, mdp, beta=0.2)
    assert report.empirical_gap == 0.0
    assert report.l1_gap == 0.0
    assert report.bound_value == 0.0
    assert report.satisfied


def test_verify_bound_rejects_mismatched_pairs():
    rng = np.random.default_rng(64)
    a = random_mdp(rng, n_states=5)
    b = random_mdp(rng, n_states=6)
    with pytest.raises(ValidationError):
        verify_bound(a, b)
    c = random_mdp(rng, n_states=5)
    with pytest.raises(ValidationError, match="reward"):
        verify_bound(a, c)


def test_bound_report_validates_consistency():
    with pytest.raises(ValidationError):
        BoundReport(
            r_max=1.0, gamma=0.5, l1_gap=1.0, bound_value=99.0, empirical_gap=0.0, satisfied=True
        )
    with pytest.raises(ValidationError):
        BoundReport(
            r_max=1.0, gamma=0.5, l1_gap=1.0, bound_value=2.0, empirical_gap=3.0, satisfied=True
        )
    with pytest.raises(ValidationError):
        BoundReport(
            r_max=1.0, gamma=0.5, l1_gap=1.0, bound_value=2.0, empirical_gap=-1.0, satisfied=False
        )


def test_bound_report_json_round_trip():
    report = BoundReport(
        r_max=1.0,
        gamma=0.5,
        l1_gap=1.0,
        bound_value=performance_gap_bound(1.0, 0.5, 1.0),
        empirical_gap=0.25,
        satisfied=True,
    )
    data = report.to_json_dict()
    assert data["satisfied"] is True
    assert BoundReport(**data) == report
