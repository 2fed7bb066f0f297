"""Performance-loss guarantees for planning under misconstrued dynamics.

A plan made against construed dynamics T~ and executed in the true dynamics T
cannot lose more than ``gamma * r_max / (1 - gamma)^2`` times the largest
per-state-action L1 dynamics gap, relative to planning against T directly.
``verify_bound`` checks that empirically for a (true, construed) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .mdp import (
    DEFAULT_BETA,
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    Policy,
    TabularMDP,
    policy_return,
    soft_policy,
    soft_value_iteration,
)

_SLACK = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """One bound verification: the ingredients, the bound, and the outcome."""

    r_max: float
    gamma: float
    l1_gap: float
    bound_value: float
    empirical_gap: float
    satisfied: bool

    def __post_init__(self):
        expected = performance_gap_bound(self.r_max, self.gamma, self.l1_gap)
        if abs(expected - self.bound_value) > 1e-12 * max(1.0, abs(expected)):
            raise ValidationError(
                f"bound_value {self.bound_value!r} is not gamma*r_max/(1-gamma)^2 * l1_gap"
            )
        if self.empirical_gap < 0:
            raise ValidationError("empirical_gap must be nonnegative")
        if self.satisfied != (self.empirical_gap <= self.bound_value + _SLACK):
            raise ValidationError("satisfied flag is inconsistent with the gap and bound")

    def to_json_dict(self):
        return {
            "r_max": self.r_max,
            "gamma": self.gamma,
            "l1_gap": self.l1_gap,
            "bound_value": self.bound_value,
            "empirical_gap": self.empirical_gap,
            "satisfied": self.satisfied,
        }


def dynamics_l1_gap(T: np.ndarray, T_construed: np.ndarray) -> float:
    """max over (s, a) of the L1 distance between next-state distributions."""
    T = np.asarray(T, dtype=np.float64)
    T_construed = np.asarray(T_construed, dtype=np.float64)
    if T.shape != T_construed.shape or T.ndim != 3:
        raise ValidationError(
            f"dynamics shapes must match and be (S, A, S), got {T.shape} vs {T_construed.shape}"
        )
    return float(np.abs(T - T_construed).sum(axis=2).max())


def performance_gap_bound(r_max: float, gamma: float, l1_gap: float) -> float:
    """The worst-case return gap: gamma * r_max / (1 - gamma)^2 * l1_gap."""
    r_max = float(r_max)
    gamma = float(gamma)
    l1_gap = float(l1_gap)
    if r_max < 0:
        raise ValidationError(f"r_max must be nonnegative, got {r_max}")
    if not 0.0 <= gamma < 1.0:
        raise ValidationError(f"gamma must lie in [0, 1), got {gamma}")
    if not 0.0 <= l1_gap <= 2.0 + 1e-12:
        raise ValidationError(f"l1_gap must lie in [0, 2], got {l1_gap}")
    return gamma * r_max / (1.0 - gamma) ** 2 * l1_gap


def empirical_gap(true_mdp: TabularMDP, policy_a: Policy, policy_b: Policy) -> float:
    """|return(policy_a) - return(policy_b)|, both evaluated on the true MDP."""
    return abs(policy_return(true_mdp, policy_a) - policy_return(true_mdp, policy_b))


def verify_bound(
    true_mdp: TabularMDP,
    construed_mdp: TabularMDP,
    beta: float = DEFAULT_BETA,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> BoundReport:
    """Plan soft-optimally under each dynamics model, execute both plans in
    the true MDP, and compare the realized return gap against the bound.

    The two MDPs must share state/action spaces, reward, and discount.
    """
    if (true_mdp.n_states, true_mdp.n_actions) != (
        construed_mdp.n_states,
        construed_mdp.n_actions,
    ):
        raise ValidationError("true and construed MDPs must share state/action spaces")
    if true_mdp.discount != construed_mdp.discount:
        raise ValidationError("true and construed MDPs must share the discount")
    if not np.array_equal(true_mdp.reward, construed_mdp.reward):
        raise ValidationError("true and construed MDPs must share the reward table")

    plans = []
    for model in (construed_mdp, true_mdp):
        values = soft_value_iteration(model, beta, tol=tol, max_iters=max_iters)
        plans.append(soft_policy(values, model, beta))
    construed_plan, true_plan = plans

    gap = empirical_gap(true_mdp, construed_plan, true_plan)
    l1 = dynamics_l1_gap(true_mdp.dynamics, construed_mdp.dynamics)
    r_max = float(np.abs(true_mdp.reward).max())
    bound = performance_gap_bound(r_max, true_mdp.discount, l1)
    return BoundReport(
        r_max=r_max,
        gamma=true_mdp.discount,
        l1_gap=l1,
        bound_value=bound,
        empirical_gap=gap,
        satisfied=gap <= bound + _SLACK,
    )
