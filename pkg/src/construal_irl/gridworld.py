"""Blocks-and-notches mazes and their compilation to tabular MDPs.

Grid file format (UTF-8 text): a header line ``grid v1 <width> <height>``
followed by exactly ``<height>`` rows of ``<width>`` cells each::

    .   open floor
    #   block cell, never passable
    n   notch cell, passable only to a notch-aware construal
    S   start (exactly one)
    P   pink goal (exactly one)
    Y   yellow goal (exactly one)

Block and notch cells must tile into disjoint axis-aligned 3x3 regions: the
dark squares of the maze, some cells of which are notches that let an agent
who knows about them slip through. Coordinates are ``(x, y)`` with ``x``
increasing rightward and ``y`` increasing downward.

Compilation maps every cell to a state (row-major, ``y * width + x``) and
adds one absorbing sink state at index ``width * height``. Actions are
up/down/left/right; moves into impassable cells or off the edge leave the
state unchanged and cost the step reward; entering a goal pays that goal's
reward, after which the goal cell drains into the sink at zero reward.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import CompileError, GridParseError, ValidationError
from .mdp import DEFAULT_DISCOUNT, TabularMDP

OPEN = "."
BLOCK = "#"
NOTCH = "n"
START = "S"
GOAL_CHARS = {"P": "pink", "Y": "yellow"}
_LEGEND = set(OPEN + BLOCK + NOTCH + START) | set(GOAL_CHARS)

ACTIONS = ("up", "down", "left", "right")
ACTION_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0))

_KNOWN_FEATURE_CLASSES = ("notch",)


class Construal(object):
    """Which maze feature classes a planner is aware of.

    An unaware feature class degrades to its conservative reading: a notch
    cell is treated exactly like a block cell. ``feature_awareness`` entries
    override the ``notch_aware`` keyword for the classes they name; unknown
    feature classes are rejected.
    """

    __slots__ = ("_flags",)

    def __init__(self, notch_aware=True, feature_awareness=None):
        flags = {"notch": bool(notch_aware)}
        if feature_awareness is not None:
            for name, value in feature_awareness.items():
                if name not in _KNOWN_FEATURE_CLASSES:
                    raise ValidationError(
                        f"unknown feature class {name!r}; known: {_KNOWN_FEATURE_CLASSES}"
                    )
                flags[name] = bool(value)
        object.__setattr__(self, "_flags", tuple(sorted(flags.items())))

    def __setattr__(self, name, value):
        raise AttributeError("Construal is immutable")

    @property
    def notch_aware(self):
        return dict(self._flags)["notch"]

    @property
    def feature_awareness(self):
        return dict(self._flags)

    def is_fully_aware(self):
        return all(value for _, value in self._flags)

    def label(self):
        return "notch_aware" if self.notch_aware else "notch_unaware"

    def __eq__(self, other):
        return isinstance(other, Construal) and self._flags == other._flags

    def __hash__(self):
        return hash(self._flags)

    def __repr__(self):
        return f"Construal({dict(self._flags)!r})"


FULLY_AWARE = Construal(notch_aware=True)
NOTCH_UNAWARE = Construal(notch_aware=False)


class RewardHypothesis(object):
    """Goal payoffs plus a per-step living cost.

    Goal rewards must be pairwise distinct so "preferred goal" is
    well-defined; the step reward may not be positive.
    """

    __slots__ = ("_goal_rewards", "_step_reward")

    def __init__(self, goal_rewards, step_reward=-0.01):
        items = tuple(sorted((str(k), float(v)) for k, v in dict(goal_rewards).items()))
        if not items:
            raise ValidationError("goal_rewards must not be empty")
        values = [v for _, v in items]
        if len(set(values)) != len(values):
            raise ValidationError(f"goal rewards must be distinct, got {dict(items)!r}")
        step = float(step_reward)
        if step > 0:
            raise ValidationError(f"step_reward must be <= 0, got {step}")
        object.__setattr__(self, "_goal_rewards", items)
        object.__setattr__(self, "_step_reward", step)

    def __setattr__(self, name, value):
        raise AttributeError("RewardHypothesis is immutable")

    @property
    def goal_rewards(self):
        return dict(self._goal_rewards)

    @property
    def step_reward(self):
        return self._step_reward

    @property
    def preferred_goal(self):
        return max(self._goal_rewards, key=lambda item: item[1])[0]

    def label(self):
        return f"{self.preferred_goal}_preferred"

    def __eq__(self, other):
        return (
            isinstance(other, RewardHypothesis)
            and self._goal_rewards == other._goal_rewards
            and self._step_reward == other._step_reward
        )

    def __hash__(self):
        return hash((self._goal_rewards, self._step_reward))

    def __repr__(self):
        return f"RewardHypothesis({dict(self._goal_rewards)!r}, step_reward={self._step_reward!r})"


@dataclass(frozen=True)
class GridSpec:
    """A parsed maze. ``cells`` holds the raw rows; everything else derives."""

    width: int
    height: int
    cells: tuple[str, ...]

    @cached_property
    def start(self):
        return self._find(START)[0]

    @cached_property
    def goals(self):
        return {
            color: self._find(char)[0] for char, color in GOAL_CHARS.items()
        }

    @cached_property
    def block_regions(self):
        """Top-left corners of the 3x3 block regions, in scan order."""
        return _tile_3x3({(x, y) for x, y, c in self._scan() if c in (BLOCK, NOTCH)})

    @cached_property
    def notches(self):
        return tuple((x, y) for x, y, c in self._scan() if c == NOTCH)

    def _scan(self):
        for y, row in enumerate(self.cells):
            for x, c in enumerate(row):
                yield x, y, c

    def _find(self, char):
        return [(x, y) for x, y, c in self._scan() if c == char]

    def cell(self, x, y):
        return self.cells[y][x]

    def state_index(self, xy):
        x, y = xy
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValidationError(f"cell {xy} outside {self.width}x{self.height} grid")
        return y * self.width + x

    @property
    def sink_index(self):
        return self.width * self.height

    @property
    def n_states(self):
        return self.width * self.height + 1

    def cell_of_state(self, state):
        if not 0 <= state < self.sink_index:
            raise ValidationError(f"state {state} is not a grid cell")
        return state % self.width, state // self.width


def _tile_3x3(cells):
    """Decompose ``cells`` into disjoint axis-aligned 3x3 squares.

    Greedy scan-order peeling: the smallest remaining cell must be the
    top-left corner of a full square. Raises if the set does not tile.
    """
    remaining = set(cells)
    corners = []
    while remaining:
        x0, y0 = min(remaining, key=lambda xy: (xy[1], xy[0]))
        square = {(x0 + dx, y0 + dy) for dx in range(3) for dy in range(3)}
        if not square <= remaining:
            raise GridParseError(
                f"block/notch cells do not tile into 3x3 regions near ({x0}, {y0})"
            )
        remaining -= square
        corners.append((x0, y0))
    return tuple(corners)


_HEADER = re.compile(r"^grid v1 (\d+) (\d+)$")


def parse_grid(text: str) -> GridSpec:
    """Parse grid file text; errors carry 1-based line/column positions."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GridParseError("empty grid file", line=1)
    m = _HEADER.match(lines[0])
    if m is None:
        raise GridParseError(f"bad header {lines[0]!r}, expected 'grid v1 <width> <height>'", line=1)
    width, height = int(m.group(1)), int(m.group(2))
    if width < 1 or height < 1:
        raise GridParseError("width and height must be positive", line=1)
    if len(lines) - 1 != height:
        raise GridParseError(
            f"expected {height} rows, found {len(lines) - 1}", line=len(lines)
        )
    rows = []
    for i, row in enumerate(lines[1:], start=2):
        if len(row) != width:
            raise GridParseError(
                f"row has {len(row)} cells, expected {width}", line=i, column=len(row) + 1
            )
        for j, c in enumerate(row):
            if c not in _LEGEND:
                raise GridParseError(f"unknown cell character {c!r}", line=i, column=j + 1)
        rows.append(row)
    body = "\n".join(rows)
    for char, what in ((START, "start"), *((c, f"{color} goal") for c, color in GOAL_CHARS.items())):
        count = body.count(char)
        if count != 1:
            raise GridParseError(f"expected exactly one {what} ({char!r}), found {count}")
    spec = GridSpec(width=width, height=height, cells=tuple(rows))
    spec.block_regions  # validates the 3x3 tiling
    return spec


def serialize_grid(spec: GridSpec) -> str:
    """Canonical text form; ``parse_grid`` round-trips it byte-identically."""
    return "\n".join([f"grid v1 {spec.width} {spec.height}", *spec.cells]) + "\n"


def load_grid(path) -> GridSpec:
    return parse_grid(Path(path).read_text(encoding="utf-8"))


def save_grid(spec: GridSpec, path) -> None:
    Path(path).write_text(serialize_grid(spec), encoding="utf-8")


def apply_construal(grid: GridSpec, construal: Construal) -> np.ndarray:
    """Boolean passability map of shape (height, width) under ``construal``."""
    passable = np.zeros((grid.height, grid.width), dtype=bool)
    for x, y, c in grid._scan():
        if c == BLOCK:
            continue
        if c == NOTCH and not construal.notch_aware:
            continue
        passable[y, x] = True
    return passable


def reachable_cells(grid: GridSpec, construal: Construal) -> frozenset[tuple[int, int]]:
    """Cells reachable from the start under ``construal``'s passability."""
    return frozenset(_reachable_from(apply_construal(grid, construal), grid.start))


def _reachable_from(passable, start):
    height, width = passable.shape
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in ACTION_DELTAS:
            nxt = (x + dx, y + dy)
            nx, ny = nxt
            if 0 <= nx < width and 0 <= ny < height and passable[ny, nx] and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def compile_mdp(
    grid: GridSpec,
    construal: Construal,
    reward: RewardHypothesis,
    discount: float = DEFAULT_DISCOUNT,
) -> TabularMDP:
    """Compile the maze, as construed, into a TabularMDP.

    The dynamics are deterministic. Both goals must be reachable from the
    start under full awareness (otherwise the map itself is broken and this
    raises CompileError); under a partial construal unreachable goals are
    legal and simply worthless to the planner.
    """
    missing = set(grid.goals) - set(reward.goal_rewards)
    if missing:
        raise ValidationError(f"reward hypothesis lacks goal colors {sorted(missing)}")

    full = _reachable_from(apply_construal(grid, FULLY_AWARE), grid.start)
    for color, xy in sorted(grid.goals.items()):
        if xy not in full:
            raise CompileError(
                f"{color} goal at {xy} is unreachable even under full awareness"
            )

    passable = apply_construal(grid, construal)
    goal_cells = {xy: color for color, xy in grid.goals.items()}
    S = grid.n_states
    A = len(ACTIONS)
    sink = grid.sink_index
    T = np.zeros((S, A, S))
    R = np.zeros((S, A))
    T[sink, :, sink] = 1.0

    for x, y, c in grid._scan():
        s = grid.state_index((x, y))
        if (x, y) in goal_cells:
            T[s, :, sink] = 1.0
            continue
        if not passable[y, x]:
            T[s, :, s] = 1.0
            R[s, :] = reward.step_reward
            continue
        for a, (dx, dy) in enumerate(ACTION_DELTAS):
            nx, ny = x + dx, y + dy
            inside = 0 <= nx < grid.width and 0 <= ny < grid.height
            if inside and passable[ny, nx]:
                dest = (nx, ny)
            else:
                dest = (x, y)
            T[s, a, grid.state_index(dest)] = 1.0
            if dest in goal_cells:
                R[s, a] = reward.goal_rewards[goal_cells[dest]]
            else:
                R[s, a] = reward.step_reward

    P0 = np.zeros(S)
    P0[grid.state_index(grid.start)] = 1.0
    return TabularMDP(
        n_states=S,
        n_actions=A,
        initial_dist=P0,
        dynamics=T,
        reward=R,
        discount=discount,
        terminal_states=frozenset({sink}),
    )
