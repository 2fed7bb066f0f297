"""Pure-numpy Bellman backup loops: the fallback solver backend.

Both backends implement the same contract: synchronous sweeps starting from
``v0``, one recorded residual per sweep, stopping as soon as
``max|V_new - V| < tol``. The returned state values are exactly the reduction
of the returned action values (same final sweep), so consumers may rely on
that identity holding bitwise. Convergence is the caller's job to check:
``residuals[-1] < tol``.
"""

import numpy as np

BACKEND_NAME = "python"


def hard_value_iteration(T, R, gamma, tol, max_iters, v0):
    """Max-Bellman sweeps. Returns ``(V, Q, n_sweeps, residuals)``."""
    V = np.array(v0, dtype=np.float64)
    residuals = np.empty(max_iters, dtype=np.float64)
    for k in range(max_iters):
        Q = R + gamma * (T @ V)
        V_new = Q.max(axis=1)
        res = np.abs(V_new - V).max()
        residuals[k] = res
        V = V_new
        if res < tol:
            return V, Q, k + 1, residuals[: k + 1].copy()
    return V, Q, max_iters, residuals.copy()


def soft_value_iteration(T, R, gamma, beta, tol, max_iters, v0):
    """Entropy-regularized sweeps: V(s) = beta * logsumexp_a Q(s, a) / beta.

    The log-sum-exp is max-shifted so sharp temperatures stay finite.
    Returns ``(V, Q, n_sweeps, residuals)``.
    """
    V = np.array(v0, dtype=np.float64)
    residuals = np.empty(max_iters, dtype=np.float64)
    for k in range(max_iters):
        Q = R + gamma * (T @ V)
        m = Q.max(axis=1)
        V_new = m + beta * np.log(np.exp((Q - m[:, None]) / beta).sum(axis=1))
        res = np.abs(V_new - V).max()
        residuals[k] = res
        V = V_new
        if res < tol:
            return V, Q, k + 1, residuals[: k + 1].copy()
    return V, Q, max_iters, residuals.copy()
