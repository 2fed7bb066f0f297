import numpy as np
import pytest

from construal_irl import (
    FULLY_AWARE,
    NOTCH_UNAWARE,
    HypothesisSpace,
    Posterior,
    RewardHypothesis,
    Trajectory,
    ValidationError,
    compile_mdp,
    default_hypothesis_space,
    greedy_policy,
    joint_posterior,
    marginal,
    reward_only_posterior,
    to_judgment_scale,
    trajectory_log_likelihood,
    value_iteration,
)
from construal_irl.inference import (
    clear_planning_cache,
    planning_cache_size,
    posterior_to_json_dict,
)

from conftest import random_walk_steps, tiny_open_grid
from oracles import mp_posterior, mp_soft_plan

BETA = 0.1
GAMMA = 0.7  # keeps the mpmath sweep count small


def _walk(grid, space, rng, length=6):
    mdp = compile_mdp(grid, FULLY_AWARE, space.rewards[0], discount=GAMMA)
    start = grid.state_index(grid.start)
    return Trajectory(steps=tuple(random_walk_steps(rng, mdp, start, length)))


def _mp_policies(grid, space, hypotheses):
    policies = []
    for reward, construal in hypotheses:
        mdp = compile_mdp(grid, construal, reward, discount=GAMMA)
        _, _, policy = mp_soft_plan(mdp.dynamics, mdp.reward, GAMMA, BETA, sweeps=160)
        policies.append(policy)
    return policies


def test_joint_posterior_matches_mpmath_oracle():
    rng = np.random.default_rng(40)
    space = default_hypothesis_space()
    for _ in range(3):
        grid = tiny_open_grid(rng)
        traj = _walk(grid, space, rng)
        post = joint_posterior([traj], space, grid, beta=BETA, discount=GAMMA, tol=1e-12)
        hypotheses = [(r, c) for r in space.rewards for c in space.construals]
        policies = _mp_policies(grid, space, hypotheses)
        ref_probs, ref_logz = mp_posterior(traj.steps, policies, [0.25] * 4)
        assert np.abs(post.probabilities.ravel() - np.array(ref_probs)).max() < 1e-8
        assert post.normalizer == pytest.approx(ref_logz, abs=1e-7)


def test_reward_only_posterior_matches_mpmath_oracle():
    rng = np.random.default_rng(41)
    space = default_hypothesis_space()
    for _ in range(2):
        grid = tiny_open_grid(rng)
        traj = _walk(grid, space, rng)
        post = reward_only_posterior([traj], space, grid, beta=BETA, discount=GAMMA, tol=1e-12)
        policies = _mp_policies(grid, space, [(r, FULLY_AWARE) for r in space.rewards])
        ref_probs, ref_logz = mp_posterior(traj.steps, policies, [0.5, 0.5])
        assert np.abs(post.probabilities - np.array(ref_probs)).max() < 1e-8
        assert post.normalizer == pytest.approx(ref_logz, abs=1e-7)


def test_zero_evidence_returns_prior_bitwise():
    rng = np.random.default_rng(42)
    grid = tiny_open_grid(rng)
    prior = np.array([[0.7, 0.1], [0.15, 0.05]])
    space = default_hypothesis_space()
    space = HypothesisSpace(rewards=space.rewards, construals=space.construals, prior=prior)
    post = joint_posterior([], space, grid, beta=BETA, discount=GAMMA)
    assert np.array_equal(post.probabilities, prior)
    assert post.normalizer == 0.0
    flat = reward_only_posterior([Trajectory(steps=())], space, grid, beta=BETA, discount=GAMMA)
    assert np.array_equal(flat.probabilities, prior.sum(axis=1))
    assert flat.normalizer == 0.0


def test_chained_updates_equal_batch():
    rng = np.random.default_rng(43)
    space = default_hypothesis_space()
    grid = tiny_open_grid(rng)
    t1 = _walk(grid, space, rng, length=5)
    t2 = _walk(grid, space, rng, length=5)
    batch = joint_posterior([t1, t2], space, grid, beta=BETA, discount=GAMMA)
    first = joint_posterior([t1], space, grid, beta=BETA, discount=GAMMA)
    chained_space = HypothesisSpace(
        rewards=space.rewards, construals=space.construals, prior=first.probabilities
    )
    second = joint_posterior([t2], chained_space, grid, beta=BETA, discount=GAMMA)
    assert np.abs(second.probabilities - batch.probabilities).max() < 1e-12
    assert first.normalizer + second.normalizer == pytest.approx(batch.normalizer, abs=1e-10)


def test_singleton_construal_axis_collapses_to_reward_only():
    rng = np.random.default_rng(44)
    base = default_hypothesis_space()
    space = HypothesisSpace(
        rewards=base.rewards, construals=(FULLY_AWARE,), prior=np.full((2, 1), 0.5)
    )
    grid = tiny_open_grid(rng)
    traj = _walk(grid, base, rng)
    joint = joint_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    flat = reward_only_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    assert np.abs(joint.probabilities[:, 0] - flat.probabilities).max() < 1e-15
    assert joint.normalizer == pytest.approx(flat.normalizer, abs=1e-12)


def test_marginals():
    probs = np.array([[0.5, 0.2], [0.1, 0.2]])
    space = default_hypothesis_space()
    post = Posterior(
        log_weights=np.log(probs),
        normalizer=-1.0,
        rewards=space.rewards,
        construals=space.construals,
        probabilities=probs,
    )
    assert np.allclose(marginal(post, "reward"), [0.7, 0.3])
    assert np.allclose(marginal(post, "construal"), [0.6, 0.4])
    with pytest.raises(ValidationError):
        marginal(post, "goal")
    flat = Posterior(
        log_weights=np.log([0.7, 0.3]),
        normalizer=-1.0,
        rewards=space.rewards,
        construals=None,
        probabilities=np.array([0.7, 0.3]),
    )
    assert np.allclose(marginal(flat, "reward"), [0.7, 0.3])
    with pytest.raises(ValidationError):
        marginal(flat, "construal")


def test_judgment_scale():
    assert to_judgment_scale(0.0) == -1.0
    assert to_judgment_scale(0.5) == 0.0
    assert to_judgment_scale(1.0) == 1.0
    with pytest.raises(ValidationError):
        to_judgment_scale(1.5)
    with pytest.raises(ValidationError):
        to_judgment_scale(-0.1)


def test_log_likelihood_edge_cases():
    rng = np.random.default_rng(45)
    space = default_hypothesis_space()
    grid = tiny_open_grid(rng)
    mdp = compile_mdp(grid, FULLY_AWARE, space.rewards[0], discount=GAMMA)
    policy = greedy_policy(value_iteration(mdp, tol=1e-10), mdp)
    assert trajectory_log_likelihood(Trajectory(steps=()), policy) == 0.0
    off = int(np.argmin(policy.probs[0]))
    assert trajectory_log_likelihood(Trajectory(steps=((0, off),)), policy) == float("-inf")


def test_planning_cache_reuse_and_equivalence():
    rng = np.random.default_rng(46)
    space = default_hypothesis_space()
    grid = tiny_open_grid(rng)
    traj = _walk(grid, space, rng)
    clear_planning_cache()
    assert planning_cache_size() == 0
    cold = joint_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    assert planning_cache_size() == 4
    warm = joint_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    assert planning_cache_size() == 4
    assert np.array_equal(cold.probabilities, warm.probabilities)
    reward_only_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    # reward-only reuses the two fully-aware plans
    assert planning_cache_size() == 4


def test_hypothesis_space_validation():
    base = default_hypothesis_space()
    with pytest.raises(ValidationError):
        HypothesisSpace(rewards=base.rewards, construals=base.construals, prior=np.full((2, 2), 0.3))
    with pytest.raises(ValidationError):
        HypothesisSpace(rewards=base.rewards, construals=base.construals, prior=np.full((2, 1), 0.5))
    with pytest.raises(ValidationError):
        HypothesisSpace(rewards=(), construals=base.construals, prior=np.zeros((0, 2)))
    bad = np.array([[1.5, -0.5], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        HypothesisSpace(rewards=base.rewards, construals=base.construals, prior=bad)


def test_default_space_shape():
    space = default_hypothesis_space()
    assert [r.preferred_goal for r in space.rewards] == ["pink", "yellow"]
    assert space.construals == (FULLY_AWARE, NOTCH_UNAWARE)
    assert np.array_equal(space.prior, np.full((2, 2), 0.25))


def test_posterior_json_dict():
    rng = np.random.default_rng(47)
    space = default_hypothesis_space()
    grid = tiny_open_grid(rng)
    traj = _walk(grid, space, rng)
    joint = posterior_to_json_dict(joint_posterior([traj], space, grid, beta=BETA, discount=GAMMA))
    assert joint["mode"] == "joint"
    assert set(joint["hypotheses"]) == {
        "pink_preferred|notch_aware",
        "pink_preferred|notch_unaware",
        "yellow_preferred|notch_aware",
        "yellow_preferred|notch_unaware",
    }
    assert sum(joint["hypotheses"].values()) == pytest.approx(1.0, abs=1e-10)
    assert set(joint["reward_marginal"]) == {"pink_preferred", "yellow_preferred"}
    assert set(joint["construal_marginal"]) == {"notch_aware", "notch_unaware"}
    flat = posterior_to_json_dict(
        reward_only_posterior([traj], space, grid, beta=BETA, discount=GAMMA)
    )
    assert flat["mode"] == "reward_only"
    assert set(flat["hypotheses"]) == {"pink_preferred", "yellow_preferred"}
    assert "construal_marginal" not in flat


def test_json_labels_deduplicate():
    rewards = (
        RewardHypothesis({"pink": 1.0, "yellow": 0.5}),
        RewardHypothesis({"pink": 0.9, "yellow": 0.5}),
    )
    space = HypothesisSpace(rewards=rewards, construals=(FULLY_AWARE,), prior=np.full((2, 1), 0.5))
    rng = np.random.default_rng(48)
    grid = tiny_open_grid(rng)
    out = posterior_to_json_dict(
        reward_only_posterior([_walk(grid, space, rng)], space, grid, beta=BETA, discount=GAMMA)
    )
    assert set(out["hypotheses"]) == {"pink_preferred", "pink_preferred_2"}
