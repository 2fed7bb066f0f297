from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from construal_irl import GridSpec, TabularMDP, load_grid, parse_grid

# One line per acceptance criterion, echoed after the run so the verdicts
# survive pytest's output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(resources.files("construal_irl.fixtures"))


@pytest.fixture(scope="session")
def shipped_grids(fixture_dir):
    return {name: load_grid(fixture_dir / f"{name}.grid") for name in ("grid1", "grid2", "grid3")}


def random_mdp(rng, n_states=5, n_actions=3, gamma=0.9) -> TabularMDP:
    """Dense random MDP with Dirichlet rows and standard-normal rewards."""
    dynamics = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    reward = rng.standard_normal((n_states, n_actions))
    initial = rng.dirichlet(np.ones(n_states))
    return TabularMDP(
        n_states=n_states,
        n_actions=n_actions,
        initial_dist=initial,
        dynamics=dynamics,
        reward=reward,
        discount=gamma,
        terminal_states=frozenset(),
    )


def random_policy(rng, n_states, n_actions):
    return rng.dirichlet(np.ones(n_actions), size=n_states)


def tiny_open_grid(rng) -> GridSpec:
    """Small fully open grid (<= 8 states with the sink) with random S/P/Y."""
    sizes = ((2, 3), (3, 2), (7, 1), (1, 7))
    width, height = sizes[int(rng.integers(len(sizes)))]
    cells = np.full((height, width), ".", dtype="U1")
    spots = rng.choice(width * height, size=3, replace=False)
    for char, flat in zip("SPY", spots):
        cells[flat // width, flat % width] = char
    rows = "".join("".join(row) + "\n" for row in cells)
    return parse_grid(f"grid v1 {width} {height}\n{rows}")


def random_walk_steps(rng, mdp, start_state, length):
    """(state, action) rollout under uniform random actions."""
    steps = []
    state = int(start_state)
    for _ in range(length):
        action = int(rng.integers(mdp.n_actions))
        steps.append((state, action))
        if state in mdp.terminal_states:
            break
        state = int(rng.choice(mdp.n_states, p=mdp.dynamics[state, action]))
    return steps
