"""Tabular MDP types and exact solvers.

Conventions used throughout the package:

* ``dynamics`` has shape ``(S, A, S)``: ``dynamics[s, a, s']`` is the
  probability of landing in ``s'`` after taking action ``a`` in state ``s``.
* ``reward`` has shape ``(S, A)`` and is collected on the transition out of
  ``(s, a)``.
* Terminal states self-transition with probability 1 under every action and
  pay zero reward from then on, so value functions need no special casing.
* All arrays are float64, C-contiguous, and frozen read-only at construction;
  solver outputs are fresh arrays. Nothing here mutates shared state, so
  concurrent readers are safe.

The iterative solvers (``value_iteration``, ``soft_value_iteration``) run on
the backend selected in :mod:`construal_irl.backend`; the linear-algebra ones
(``policy_evaluation``, ``occupancy``) use a direct dense solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConvergenceError, ValidationError

DEFAULT_DISCOUNT = 0.95
DEFAULT_BETA = 0.1
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 100_000

_ATOL = 1e-12


def _frozen_array(values, shape, name):
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.shape != shape:
        raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TabularMDP:
    """An explicit finite MDP.

    Attributes:
        n_states: number of states S.
        n_actions: number of actions A.
        initial_dist: shape (S,) start-state distribution.
        dynamics: shape (S, A, S) transition probabilities.
        reward: shape (S, A) rewards.
        discount: discount factor in [0, 1).
        terminal_states: absorbing states with zero reward after entry.
    """

    n_states: int
    n_actions: int
    initial_dist: np.ndarray
    dynamics: np.ndarray
    reward: np.ndarray
    discount: float
    terminal_states: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        S, A = int(self.n_states), int(self.n_actions)
        if S < 1 or A < 1:
            raise ValidationError("n_states and n_actions must be positive")
        object.__setattr__(self, "n_states", S)
        object.__setattr__(self, "n_actions", A)
        object.__setattr__(self, "discount", float(self.discount))
        if not 0.0 <= self.discount < 1.0:
            raise ValidationError(f"discount must lie in [0, 1), got {self.discount}")
        object.__setattr__(
            self, "initial_dist", _frozen_array(self.initial_dist, (S,), "initial_dist")
        )
        object.__setattr__(
            self, "dynamics", _frozen_array(self.dynamics, (S, A, S), "dynamics")
        )
        object.__setattr__(self, "reward", _frozen_array(self.reward, (S, A), "reward"))
        object.__setattr__(self, "terminal_states", frozenset(int(t) for t in self.terminal_states))

        if self.initial_dist.min() < 0:
            raise ValidationError("initial_dist has negative entries")
        if abs(self.initial_dist.sum() - 1.0) > _ATOL:
            raise ValidationError("initial_dist must sum to 1")
        if self.dynamics.min() < 0:
            raise ValidationError("dynamics has negative entries")
        row_sums = self.dynamics.sum(axis=2)
        if np.abs(row_sums - 1.0).max() > _ATOL:
            bad = np.unravel_index(np.abs(row_sums - 1.0).argmax(), row_sums.shape)
            raise ValidationError(f"dynamics row {bad} sums to {row_sums[bad]!r}, not 1")
        for t in self.terminal_states:
            if not 0 <= t < S:
                raise ValidationError(f"terminal state {t} out of range")
            if np.abs(self.dynamics[t, :, t] - 1.0).max() > _ATOL:
                raise ValidationError(f"terminal state {t} must self-transition with probability 1")
            if np.abs(self.reward[t]).max() > _ATOL:
                raise ValidationError(f"terminal state {t} must have zero reward")


@dataclass(frozen=True, eq=False)
class Policy:
    """A stationary stochastic policy: ``probs[s, a]`` rows sum to 1."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.probs, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"policy must be 2-D (S, A), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("policy contains non-finite entries")
        if arr.min() < 0:
            raise ValidationError("policy has negative probabilities")
        if np.abs(arr.sum(axis=1) - 1.0).max() > _ATOL:
            raise ValidationError("policy rows must sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n_states(self):
        return self.probs.shape[0]

    @property
    def n_actions(self):
        return self.probs.shape[1]


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """State and action values from one solver run.

    ``regularization_weight`` is the entropy weight beta for the soft solver
    and ``None`` for the unregularized ones. For the optimal-control solvers
    the state values are exactly the row reduction of the action values
    (max, or beta-weighted log-sum-exp); ``policy_evaluation`` returns the
    policy-weighted fixed point instead, so that relation is not enforced
    here.
    """

    state_values: np.ndarray
    action_values: np.ndarray
    regularization_weight: float | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.state_values, dtype=np.float64)
        q = np.ascontiguousarray(self.action_values, dtype=np.float64)
        if v.ndim != 1 or q.ndim != 2 or q.shape[0] != v.shape[0]:
            raise ValidationError(
                f"inconsistent value shapes: V {v.shape}, Q {q.shape}"
            )
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(q))):
            raise ValidationError("value function contains non-finite entries")
        if self.regularization_weight is not None:
            w = float(self.regularization_weight)
            if not w > 0:
                raise ValidationError("regularization_weight must be positive when present")
            object.__setattr__(self, "regularization_weight", w)
        v.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "state_values", v)
        object.__setattr__(self, "action_values", q)


@dataclass(frozen=True, eq=False)
class OccupancyMatrix:
    """Discounted expected visit counts: ``visits[s, s+]`` starting from s."""

    visits: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.visits, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"occupancy must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "visits", arr)


def _check_policy_for(mdp, policy):
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise ValidationError(
            f"policy shape {policy.probs.shape} does not match MDP "
            f"({mdp.n_states}, {mdp.n_actions})"
        )


def _policy_dynamics(mdp, policy):
    # T_pi[s, s'] = sum_a pi(a|s) T(s'|s, a)
    return np.einsum("sa,sat->st", policy.probs, mdp.dynamics)


def policy_evaluation(mdp: TabularMDP, policy: Policy) -> ValueFunction:
    """Exact V^pi and Q^pi via the dense linear fixed point.

    Solves (I - gamma T_pi) V = r_pi, then Q = R + gamma T V.
    """
    _check_policy_for(mdp, policy)
    T_pi = _policy_dynamics(mdp, policy)
    r_pi = (policy.probs * mdp.reward).sum(axis=1)
    lhs = np.eye(mdp.n_states) - mdp.discount * T_pi
    V = np.linalg.solve(lhs, r_pi)
    Q = mdp.reward + mdp.discount * (mdp.dynamics @ V)
    return ValueFunction(V, Q, None)


def occupancy(mdp: TabularMDP, policy: Policy) -> OccupancyMatrix:
    """Discounted successor-visit matrix rho = (I - gamma T_pi)^-1.

    rho[s, s+] = E[sum_t gamma^t 1(s_t = s+) | s_0 = s], so the diagonal is
    at least 1 and every entry lies in [0, 1/(1-gamma)].
    """
    _check_policy_for(mdp, policy)
    T_pi = _policy_dynamics(mdp, policy)
    lhs = np.eye(mdp.n_states) - mdp.discount * T_pi
    visits = np.linalg.solve(lhs, np.eye(mdp.n_states))
    return OccupancyMatrix(visits)


def _run_iterative(kernel_args, kernel, what, tol, max_iters):
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    max_iters = int(max_iters)
    if max_iters < 1:
        raise ValidationError(f"max_iters must be at least 1, got {max_iters}")
    V, Q, iters, residuals = kernel(*kernel_args, tol, max_iters)
    if residuals[-1] >= tol:
        raise ConvergenceError(f"{what} did not converge", float(residuals[-1]), iters)
    return V, Q


def value_iteration(
    mdp: TabularMDP, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS
) -> ValueFunction:
    """Optimal values by synchronous max-Bellman sweeps from V = 0."""
    v0 = np.zeros(mdp.n_states)
    V, Q = _run_iterative(
        (mdp.dynamics, mdp.reward, mdp.discount),
        lambda T, R, g, t, m: backend.hard_value_iteration(T, R, g, t, m, v0),
        "value iteration",
        tol,
        max_iters,
    )
    return ValueFunction(V, Q, None)


def soft_value_iteration(
    mdp: TabularMDP,
    beta: float,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> ValueFunction:
    """Entropy-regularized optimal values.

    The backup is V(s) = beta * log sum_a exp(Q(s, a) / beta), computed with a
    max shift so sharp betas do not overflow. As beta -> 0 this approaches the
    unregularized optimum from above, staying within beta * log(A) / (1 - gamma).
    """
    if not (np.isfinite(beta) and beta > 0):
        raise ValidationError(f"beta must be positive, got {beta}")
    v0 = np.zeros(mdp.n_states)
    V, Q = _run_iterative(
        (mdp.dynamics, mdp.reward, mdp.discount),
        lambda T, R, g, t, m: backend.soft_value_iteration(T, R, g, float(beta), t, m, v0),
        "soft value iteration",
        tol,
        max_iters,
    )
    return ValueFunction(V, Q, float(beta))


def soft_policy(values: ValueFunction, mdp: TabularMDP, beta: float) -> Policy:
    """Boltzmann policy pi(a|s) proportional to exp(Q(s, a) / beta).

    ``values`` must come from ``soft_value_iteration`` on the same MDP with
    the same beta. Rows are max-shifted before exponentiation; every action
    keeps nonzero mass whenever exp(-gap/beta) is representable in float64.
    """
    if not (np.isfinite(beta) and beta > 0):
        raise ValidationError(f"beta must be positive, got {beta}")
    if values.regularization_weight is None or values.regularization_weight != float(beta):
        raise ValidationError(
            "soft_policy requires values solved at the same beta "
            f"(values: {values.regularization_weight}, got {beta})"
        )
    if values.action_values.shape != (mdp.n_states, mdp.n_actions):
        raise ValidationError("value function shape does not match the MDP")
    Q = values.action_values
    shifted = (Q - Q.max(axis=1, keepdims=True)) / beta
    weights = np.exp(shifted)
    return Policy(weights / weights.sum(axis=1, keepdims=True))


def greedy_policy(values: ValueFunction, mdp: TabularMDP) -> Policy:
    """Deterministic argmax policy; ties break to the lowest action index."""
    if values.action_values.shape != (mdp.n_states, mdp.n_actions):
        raise ValidationError("value function shape does not match the MDP")
    best = values.action_values.argmax(axis=1)
    probs = np.zeros((mdp.n_states, mdp.n_actions))
    probs[np.arange(mdp.n_states), best] = 1.0
    return Policy(probs)


def policy_return(mdp: TabularMDP, policy: Policy) -> float:
    """Expected discounted return of ``policy`` from the initial distribution."""
    values = policy_evaluation(mdp, policy)
    return float(mdp.initial_dist @ values.state_values)
