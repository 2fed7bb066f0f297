"""Trajectory generation: plan under the construed model, act in the true one.

The demonstrator solves its (possibly misconstrued) MDP and samples actions
from the resulting policy, while successor states always come from the true
dynamics. A notch-unaware demonstrator therefore never enters a notch cell:
its plan treats those moves as bumps and routes around them.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .mdp import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    TabularMDP,
    greedy_policy,
    soft_policy,
    soft_value_iteration,
    value_iteration,
)

DEFAULT_DEMO_BETA = 1e-3
DEFAULT_MAX_STEPS = 100


@dataclass(frozen=True)
class Trajectory:
    """A finite state-action record ``((s_0, a_0), ..., (s_T, a_T))``.

    ``truncated`` marks runs stopped by the step cap rather than by entering
    a terminal state. ``seed`` and ``grid_id`` identify how it was generated.
    """

    steps: tuple[tuple[int, int], ...]
    grid_id: str = ""
    seed: int | None = None
    truncated: bool = False

    def __post_init__(self):
        norm = []
        for step in self.steps:
            s, a = step
            s, a = int(s), int(a)
            if s < 0 or a < 0:
                raise ValidationError(f"negative state/action in step {step!r}")
            norm.append((s, a))
        object.__setattr__(self, "steps", tuple(norm))

    def __len__(self):
        return len(self.steps)

    @property
    def states(self):
        return tuple(s for s, _ in self.steps)

    @property
    def actions(self):
        return tuple(a for _, a in self.steps)

    def consistent_with(self, mdp: TabularMDP) -> bool:
        """True when every recorded transition has positive probability."""
        for (s, a), (s_next, _) in zip(self.steps, self.steps[1:]):
            if mdp.dynamics[s, a, s_next] <= 0.0:
                return False
        return True


def _check_construal_pair(true_mdp, construed_mdp):
    if (true_mdp.n_states, true_mdp.n_actions) != (
        construed_mdp.n_states,
        construed_mdp.n_actions,
    ):
        raise ValidationError("true and construed MDPs must share state/action spaces")
    if true_mdp.discount != construed_mdp.discount:
        raise ValidationError("true and construed MDPs must share the discount")
    if not np.array_equal(true_mdp.reward, construed_mdp.reward):
        raise ValidationError("true and construed MDPs must share the reward table")


def simulate(
    true_mdp: TabularMDP,
    construed_mdp: TabularMDP,
    beta: float = DEFAULT_DEMO_BETA,
    seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    grid_id: str = "",
    mode: str = "soft",
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Trajectory:
    """Roll out one episode; returns at least one step.

    ``mode`` picks the demonstrator policy: ``soft`` samples the Boltzmann
    policy of the construed MDP at ``beta``; ``greedy`` follows its argmax
    plan deterministically. Episodes stop on entering a terminal state of the
    true MDP or after ``max_steps`` recorded steps (setting ``truncated``).
    """
    _check_construal_pair(true_mdp, construed_mdp)
    max_steps = int(max_steps)
    if max_steps < 1:
        raise ValidationError(f"max_steps must be at least 1, got {max_steps}")
    if mode == "soft":
        values = soft_value_iteration(construed_mdp, beta, tol=tol, max_iters=max_iters)
        policy = soft_policy(values, construed_mdp, beta)
    elif mode == "greedy":
        values = value_iteration(construed_mdp, tol=tol, max_iters=max_iters)
        policy = greedy_policy(values, construed_mdp)
    else:
        raise ValidationError(f"mode must be 'soft' or 'greedy', got {mode!r}")

    rng = np.random.default_rng(seed)
    n_states = true_mdp.n_states
    n_actions = true_mdp.n_actions
    state = int(rng.choice(n_states, p=true_mdp.initial_dist))
    steps = []
    truncated = False
    while True:
        action = int(rng.choice(n_actions, p=policy.probs[state]))
        steps.append((state, action))
        state = int(rng.choice(n_states, p=true_mdp.dynamics[state, action]))
        if state in true_mdp.terminal_states:
            break
        if len(steps) >= max_steps:
            truncated = True
            break
    return Trajectory(steps=tuple(steps), grid_id=grid_id, seed=int(seed), truncated=truncated)


def trajectory_to_json_dict(traj: Trajectory) -> dict:
    return {
        "grid_id": traj.grid_id,
        "seed": traj.seed,
        "truncated": traj.truncated,
        "steps": [
            {"t": t, "state": s, "action": a} for t, (s, a) in enumerate(traj.steps)
        ],
    }


def trajectory_from_json_dict(data: dict) -> Trajectory:
    steps = sorted(data["steps"], key=lambda step: step["t"])
    return Trajectory(
        steps=tuple((step["state"], step["action"]) for step in steps),
        grid_id=data.get("grid_id", ""),
        seed=data.get("seed"),
        truncated=bool(data.get("truncated", False)),
    )


def dump_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(
        json.dumps(trajectory_to_json_dict(traj), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_trajectory(path) -> Trajectory:
    return trajectory_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def trajectory_to_csv(traj: Trajectory) -> str:
    """Compact tabular form with a ``t,state,action`` header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "state", "action"])
    for t, (s, a) in enumerate(traj.steps):
        writer.writerow([t, s, a])
    return buf.getvalue()


def trajectory_from_csv(text: str, grid_id: str = "") -> Trajectory:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["t", "state", "action"]:
        raise ValidationError("trajectory CSV must start with header t,state,action")
    steps = [(int(s), int(a)) for _, s, a in rows[1:]]
    return Trajectory(steps=tuple(steps), grid_id=grid_id)
