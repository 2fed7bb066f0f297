"""Independent reference implementations used to freeze expected values.

Everything here is written the slow, obvious way: long fixed-point iteration,
exact rationals, arbitrary precision. Nothing imports the package under test,
so agreement is a genuine cross-check rather than a tautology.
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np


def iterative_policy_values(dynamics, reward, policy, gamma, sweeps=6000):
    """Fixed-point iteration for V^pi; error decays as gamma^sweeps."""
    v = np.zeros(reward.shape[0])
    for _ in range(sweeps):
        q = reward + gamma * dynamics @ v
        v = (policy * q).sum(axis=1)
    return v


def iterative_occupancy(dynamics, policy, gamma, sweeps=6000):
    """Fixed-point iteration for (I - gamma T_pi)^-1 as a Neumann series."""
    n = dynamics.shape[0]
    t_pi = np.einsum("sa,sat->st", policy, dynamics)
    eye = np.eye(n)
    rho = eye.copy()
    for _ in range(sweeps):
        rho = eye + gamma * t_pi @ rho
    return rho


def horizon_optimal_values(dynamics, reward, gamma, horizon):
    """Finite-horizon optimal state values; tail error gamma^H * rmax/(1-gamma)."""
    v = np.zeros(reward.shape[0])
    for _ in range(horizon):
        v = (reward + gamma * dynamics @ v).max(axis=1)
    return v


def _mp_logsumexp(values):
    top = max(values)
    if mp.isinf(top) and top < 0:
        return top
    return top + mp.log(mp.fsum(mp.e ** (x - top) for x in values))


def mp_soft_plan(dynamics, reward, gamma, beta, sweeps=150, dps=30):
    """Entropy-regularized optimal values and policy in arbitrary precision.

    Returns (V, Q, policy) as nested lists of mpf. Choose sweeps so that
    gamma**sweeps is far below the comparison tolerance.
    """
    n_states, n_actions = reward.shape[0], reward.shape[1]
    with mp.workdps(dps):
        t = [
            [[mp.mpf(float(dynamics[s, a, u])) for u in range(n_states)] for a in range(n_actions)]
            for s in range(n_states)
        ]
        r = [[mp.mpf(float(reward[s, a])) for a in range(n_actions)] for s in range(n_states)]
        g = mp.mpf(float(gamma))
        b = mp.mpf(float(beta))
        v = [mp.mpf(0)] * n_states
        q = [[mp.mpf(0)] * n_actions for _ in range(n_states)]
        for _ in range(sweeps):
            q = [
                [
                    r[s][a] + g * mp.fsum(t[s][a][u] * v[u] for u in range(n_states))
                    for a in range(n_actions)
                ]
                for s in range(n_states)
            ]
            v = [b * _mp_logsumexp([q_sa / b for q_sa in q[s]]) for s in range(n_states)]
        policy = []
        for s in range(n_states):
            logits = [(q[s][a] - v[s]) / b for a in range(n_actions)]
            total = mp.fsum(mp.e**x for x in logits)
            policy.append([mp.e**x / total for x in logits])
        return v, q, policy


def mp_posterior(steps, policies, prior, dps=30):
    """Exact-normalization posterior over hypotheses from action likelihoods.

    ``policies`` maps hypothesis index -> mp policy (nested lists), ``prior``
    is a list of floats. Returns (probabilities, log_marginal) as floats.
    """
    with mp.workdps(dps):
        weights = []
        for h, policy in enumerate(policies):
            w = mp.mpf(float(prior[h]))
            for state, action in steps:
                w *= policy[state][action]
            weights.append(w)
        total = mp.fsum(weights)
        probs = [float(w / total) for w in weights]
        return probs, float(mp.log(total))


def exact_binomial_tail(k, n, p0):
    """P(X >= k) for X ~ Binomial(n, p0) in exact rational arithmetic."""
    p = Fraction(p0).limit_denominator(10**12) if not isinstance(p0, Fraction) else p0
    total = Fraction(0)
    for i in range(k, n + 1):
        total += math.comb(n, i) * p**i * (1 - p) ** (n - i)
    return total


def direct_pearson_r(xs, ys):
    """Pearson r by the textbook covariance formula in exact rationals."""
    x = [Fraction(v).limit_denominator(10**12) for v in xs]
    y = [Fraction(v).limit_denominator(10**12) for v in ys]
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return float(cov) / math.sqrt(float(vx) * float(vy))


def elementwise_l1_gap(dynamics_a, dynamics_b):
    """Max row L1 distance by explicit loops."""
    worst = 0.0
    n_states, n_actions = dynamics_a.shape[0], dynamics_a.shape[1]
    for s in range(n_states):
        for a in range(n_actions):
            total = 0.0
            for u in range(n_states):
                total += abs(float(dynamics_a[s, a, u]) - float(dynamics_b[s, a, u]))
            worst = max(worst, total)
    return worst
