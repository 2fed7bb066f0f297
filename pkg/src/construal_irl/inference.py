"""Posterior inference over reward and construal hypotheses.

Two observer models share one likelihood: the probability of a trajectory is
the product of soft-policy action probabilities along it (successor states
contribute nothing, since the observer conditions on them).

* ``reward_only_posterior`` assumes the demonstrator plans with the true
  dynamics and infers the reward alone.
* ``joint_posterior`` scores every (reward, construal) pair, planning in the
  correspondingly construed MDP, and so can explain away detours that the
  reward-only observer must blame on preferences.

Everything runs in log space with max-shifted normalization. Per-hypothesis
plans are cached keyed by (grid, construal, reward, beta, discount, solver
settings); results are identical with a cold or warm cache.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .demonstrator import Trajectory
from .errors import ValidationError
from .gridworld import (
    FULLY_AWARE,
    NOTCH_UNAWARE,
    Construal,
    GridSpec,
    RewardHypothesis,
    compile_mdp,
)
from .mdp import (
    DEFAULT_BETA,
    DEFAULT_DISCOUNT,
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    Policy,
    soft_policy,
    soft_value_iteration,
)

_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class HypothesisSpace:
    """A finite grid of reward and construal hypotheses with a joint prior.

    ``prior[i, j]`` is the prior mass on (rewards[i], construals[j]); the
    table must sum to 1.
    """

    rewards: tuple[RewardHypothesis, ...]
    construals: tuple[Construal, ...]
    prior: np.ndarray

    def __post_init__(self):
        rewards = tuple(self.rewards)
        construals = tuple(self.construals)
        if not rewards or not construals:
            raise ValidationError("hypothesis space must have at least one hypothesis per axis")
        prior = np.ascontiguousarray(self.prior, dtype=np.float64)
        if prior.shape != (len(rewards), len(construals)):
            raise ValidationError(
                f"prior shape {prior.shape} does not match "
                f"({len(rewards)}, {len(construals)})"
            )
        if prior.min() < 0:
            raise ValidationError("prior has negative entries")
        if abs(prior.sum() - 1.0) > _ATOL:
            raise ValidationError(f"prior must sum to 1, got {prior.sum()!r}")
        prior.setflags(write=False)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "construals", construals)
        object.__setattr__(self, "prior", prior)


def default_hypothesis_space(
    preferred_reward: float = 1.0,
    other_reward: float = 0.5,
    step_reward: float = -0.01,
) -> HypothesisSpace:
    """The four-hypothesis space of the maze experiments: {pink, yellow}
    preference crossed with {aware, unaware}, uniform prior."""
    rewards = (
        RewardHypothesis({"pink": preferred_reward, "yellow": other_reward}, step_reward),
        RewardHypothesis({"pink": other_reward, "yellow": preferred_reward}, step_reward),
    )
    construals = (FULLY_AWARE, NOTCH_UNAWARE)
    prior = np.full((2, 2), 0.25)
    return HypothesisSpace(rewards=rewards, construals=construals, prior=prior)


@dataclass(frozen=True, eq=False)
class Posterior:
    """A normalized posterior over one or two hypothesis axes.

    ``construals`` is None for reward-only posteriors, in which case
    ``log_weights`` and ``probabilities`` are vectors over rewards; otherwise
    they are (rewards x construals) tables. ``normalizer`` is the log
    marginal likelihood of the evidence.
    """

    log_weights: np.ndarray
    normalizer: float
    rewards: tuple[RewardHypothesis, ...]
    construals: tuple[Construal, ...] | None
    probabilities: np.ndarray

    def __post_init__(self):
        lw = np.ascontiguousarray(self.log_weights, dtype=np.float64)
        probs = np.ascontiguousarray(self.probabilities, dtype=np.float64)
        expected = (len(self.rewards),) if self.construals is None else (
            len(self.rewards),
            len(self.construals),
        )
        if lw.shape != expected or probs.shape != expected:
            raise ValidationError(
                f"posterior shapes {lw.shape}/{probs.shape} do not match {expected}"
            )
        if probs.min() < 0:
            raise ValidationError("posterior has negative probabilities")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValidationError(f"posterior must sum to 1, got {probs.sum()!r}")
        lw.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "normalizer", float(self.normalizer))

    @property
    def mode(self):
        return "reward_only" if self.construals is None else "joint"


def trajectory_log_likelihood(traj: Trajectory, policy: Policy) -> float:
    """Sum of log action probabilities along the trajectory (0.0 if empty).

    Soft policies have full support, so this is finite for them; a hypothesis
    whose policy puts zero mass on an observed action scores -inf.
    """
    if len(traj) == 0:
        return 0.0
    probs = policy.probs[list(traj.states), list(traj.actions)]
    if np.any(probs <= 0.0):
        return float("-inf")
    return float(np.log(probs).sum())


_PLAN_CACHE = {}


def clear_planning_cache() -> None:
    _PLAN_CACHE.clear()


def planning_cache_size() -> int:
    return len(_PLAN_CACHE)


def _policy_for(grid, construal, reward, beta, discount, tol, max_iters):
    key = (grid, construal, reward, float(beta), float(discount), float(tol), int(max_iters))
    policy = _PLAN_CACHE.get(key)
    if policy is None:
        mdp = compile_mdp(grid, construal, reward, discount)
        values = soft_value_iteration(mdp, beta, tol=tol, max_iters=max_iters)
        policy = soft_policy(values, mdp, beta)
        _PLAN_CACHE[key] = policy
    return policy


def _normalize(log_unnorm):
    """Return (log_weights, normalizer, probabilities) for unnormalized log
    weights, max-shifted inside logsumexp."""
    normalizer = float(logsumexp(log_unnorm))
    if not np.isfinite(normalizer):
        raise ValidationError("evidence has zero probability under every hypothesis")
    log_weights = log_unnorm - normalizer
    with np.errstate(under="ignore"):
        probs = np.exp(log_weights)
    return log_weights, normalizer, probs / probs.sum()


def _as_trajectories(trajs):
    trajs = list(trajs)
    for traj in trajs:
        if not isinstance(traj, Trajectory):
            raise ValidationError(f"expected Trajectory, got {type(traj).__name__}")
    return trajs


def reward_only_posterior(
    trajs,
    space: HypothesisSpace,
    true_grid: GridSpec,
    beta: float = DEFAULT_BETA,
    discount: float = DEFAULT_DISCOUNT,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Posterior:
    """Posterior over rewards assuming full knowledge of the dynamics.

    The construal axis of ``space`` only contributes its prior marginal.
    """
    trajs = _as_trajectories(trajs)
    prior_r = space.prior.sum(axis=1)
    loglik = np.zeros(len(space.rewards))
    for i, reward in enumerate(space.rewards):
        policy = _policy_for(true_grid, FULLY_AWARE, reward, beta, discount, tol, max_iters)
        loglik[i] = sum(trajectory_log_likelihood(t, policy) for t in trajs)
    if np.all(loglik == 0.0):
        # Zero evidence must reproduce the prior exactly, not exp(log(prior)).
        return Posterior(
            log_weights=np.log(prior_r, where=prior_r > 0, out=np.full_like(prior_r, -np.inf)),
            normalizer=0.0,
            rewards=space.rewards,
            construals=None,
            probabilities=prior_r.copy(),
        )
    with np.errstate(divide="ignore"):
        log_unnorm = np.log(prior_r) + loglik
    log_weights, normalizer, probs = _normalize(log_unnorm)
    return Posterior(
        log_weights=log_weights,
        normalizer=normalizer,
        rewards=space.rewards,
        construals=None,
        probabilities=probs,
    )


def joint_posterior(
    trajs,
    space: HypothesisSpace,
    true_grid: GridSpec,
    beta: float = DEFAULT_BETA,
    discount: float = DEFAULT_DISCOUNT,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Posterior:
    """Joint posterior over (reward, construal) pairs.

    Each hypothesis plans in the maze as it construes it; the likelihood then
    scores the observed actions under that plan.
    """
    trajs = _as_trajectories(trajs)
    loglik = np.zeros(space.prior.shape)
    for i, reward in enumerate(space.rewards):
        for j, construal in enumerate(space.construals):
            policy = _policy_for(true_grid, construal, reward, beta, discount, tol, max_iters)
            loglik[i, j] = sum(trajectory_log_likelihood(t, policy) for t in trajs)
    if np.all(loglik == 0.0):
        prior = space.prior
        return Posterior(
            log_weights=np.log(prior, where=prior > 0, out=np.full_like(prior, -np.inf)),
            normalizer=0.0,
            rewards=space.rewards,
            construals=space.construals,
            probabilities=prior.copy(),
        )
    with np.errstate(divide="ignore"):
        log_unnorm = np.log(space.prior) + loglik
    log_weights, normalizer, probs = _normalize(log_unnorm)
    return Posterior(
        log_weights=log_weights,
        normalizer=normalizer,
        rewards=space.rewards,
        construals=space.construals,
        probabilities=probs,
    )


def marginal(posterior: Posterior, axis: str) -> np.ndarray:
    """Marginal probability vector over ``axis`` ('reward' or 'construal')."""
    if axis == "reward":
        if posterior.construals is None:
            return posterior.probabilities.copy()
        return posterior.probabilities.sum(axis=1)
    if axis == "construal":
        if posterior.construals is None:
            raise ValidationError("reward-only posterior has no construal axis")
        return posterior.probabilities.sum(axis=0)
    raise ValidationError(f"axis must be 'reward' or 'construal', got {axis!r}")


def to_judgment_scale(probability: float) -> float:
    """Map a probability to the [-1, 1] judgment scale via 2p - 1."""
    p = float(probability)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p}")
    return 2.0 * p - 1.0


def _axis_labels(items):
    labels = []
    seen = {}
    for item in items:
        base = item.label()
        seen[base] = seen.get(base, 0) + 1
        labels.append(base if seen[base] == 1 else f"{base}_{seen[base]}")
    return labels


def posterior_to_json_dict(posterior: Posterior) -> dict:
    """Hypothesis-label to probability mapping plus the log marginal."""
    reward_labels = _axis_labels(posterior.rewards)
    out = {"mode": posterior.mode, "log_marginal_likelihood": posterior.normalizer}
    if posterior.construals is None:
        out["hypotheses"] = {
            label: float(p) for label, p in zip(reward_labels, posterior.probabilities)
        }
    else:
        construal_labels = _axis_labels(posterior.construals)
        out["hypotheses"] = {
            f"{rl}|{cl}": float(posterior.probabilities[i, j])
            for i, rl in enumerate(reward_labels)
            for j, cl in enumerate(construal_labels)
        }
        out["reward_marginal"] = {
            rl: float(p) for rl, p in zip(reward_labels, marginal(posterior, "reward"))
        }
        out["construal_marginal"] = {
            cl: float(p)
            for cl, p in zip(construal_labels, marginal(posterior, "construal"))
        }
    return out
