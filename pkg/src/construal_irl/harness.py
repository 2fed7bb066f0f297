"""Experiment harness: runs the maze scenarios end to end and compares the
two observer models against summarized human judgments.

An experiment is 3 mazes x 4 scenarios ({aware, unaware} x {pink preferred,
yellow preferred}). Each scenario pools its three trajectories (one per maze)
into a reward-only posterior and a joint posterior, then scales the relevant
probabilities to judgments on [-1, 1]. All emitted files are deterministic:
rerunning the same configuration reproduces them byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import logsumexp
from scipy.stats import t as t_dist

from .demonstrator import (
    DEFAULT_DEMO_BETA,
    DEFAULT_MAX_STEPS,
    simulate,
    trajectory_to_csv,
    trajectory_to_json_dict,
)
from .errors import ConfigError, IngestError, UndefinedCorrelationError, ValidationError
from .gridworld import (
    FULLY_AWARE,
    NOTCH_UNAWARE,
    compile_mdp,
    load_grid,
    reachable_cells,
)
from .inference import (
    HypothesisSpace,
    Posterior,
    default_hypothesis_space,
    joint_posterior,
    marginal,
    posterior_to_json_dict,
    reward_only_posterior,
    to_judgment_scale,
)
from .mdp import DEFAULT_BETA, DEFAULT_DISCOUNT, DEFAULT_MAX_ITERS, DEFAULT_TOL

SCENARIO_LABELS = ("aware_pink", "aware_yellow", "unaware_pink", "unaware_yellow")
QUESTIONS = ("reward", "construal")


def scenario_construal(label):
    return FULLY_AWARE if label.startswith("aware") else NOTCH_UNAWARE


def scenario_goal(label):
    return label.rsplit("_", 1)[1]


@dataclass(frozen=True)
class ScenarioResult:
    """Pooled judgments for one scenario (grid_id joins the pooled mazes)."""

    grid_id: str
    scenario: str
    reward_only_judgment: float
    joint_reward_judgment: float
    joint_construal_judgment: float
    human_mean: float | None = None
    human_se: float | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIO_LABELS:
            raise ValidationError(f"unknown scenario label {self.scenario!r}")
        for name in ("reward_only_judgment", "joint_reward_judgment", "joint_construal_judgment"):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [-1, 1], got {value}")

    def to_json_dict(self):
        return {
            "grid_id": self.grid_id,
            "scenario": self.scenario,
            "reward_only_judgment": self.reward_only_judgment,
            "joint_reward_judgment": self.joint_reward_judgment,
            "joint_construal_judgment": self.joint_construal_judgment,
            "human_mean": self.human_mean,
            "human_se": self.human_se,
        }


@dataclass(frozen=True)
class HumanRecord:
    """One summarized judgment question: n respondents, share answering in
    the positive direction of the scale (e.g. 'prefers pink', 'was aware')."""

    scenario: str
    question: str
    n: int
    proportion_positive: float

    @property
    def mean_score(self):
        return 2.0 * self.proportion_positive - 1.0

    @property
    def standard_error(self):
        p = self.proportion_positive
        return 2.0 * math.sqrt(p * (1.0 - p) / self.n)


@dataclass(frozen=True)
class HumanSummary:
    records: tuple[HumanRecord, ...]

    def lookup(self, scenario, question):
        for record in self.records:
            if record.scenario == scenario and record.question == question:
                return record
        return None


def ingest_human_summary(path) -> HumanSummary:
    """Read a summary CSV with header scenario,question,n,proportion_positive."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"human summary file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != ["scenario", "question", "n", "proportion_positive"]:
        raise IngestError("expected header scenario,question,n,proportion_positive", row=1)
    records = []
    seen = set()
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != 4:
            raise IngestError(f"expected 4 fields, found {len(row)}", row=i)
        scenario, question, n_text, p_text = row
        if question not in QUESTIONS:
            raise IngestError(f"unknown question {question!r}", row=i)
        try:
            n = int(n_text)
            p = float(p_text)
        except ValueError:
            raise IngestError(f"malformed numeric fields {n_text!r}, {p_text!r}", row=i)
        if n <= 0:
            raise IngestError(f"n must be positive, got {n}", row=i)
        if not 0.0 <= p <= 1.0:
            raise IngestError(f"proportion {p} outside [0, 1]", row=i)
        if (scenario, question) in seen:
            raise IngestError(f"duplicate record for {scenario}/{question}", row=i)
        seen.add((scenario, question))
        records.append(
            HumanRecord(scenario=scenario, question=question, n=n, proportion_positive=p)
        )
    return HumanSummary(records=tuple(records))


def pearson_correlation(xs, ys) -> tuple[float, float]:
    """Pearson r via the direct covariance formula, with the two-sided
    p-value from the t distribution on n - 2 degrees of freedom.

    Perfect correlations return the smallest positive float as the p-value.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"inputs must be equal-length vectors, got {x.shape} vs {y.shape}")
    n = x.shape[0]
    if n < 3:
        raise ValidationError(f"need at least 3 points for a p-value, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: an input has zero variance")
    r = float(dx @ dy) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, math.nextafter(0.0, 1.0)
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(t_dist.sf(abs(t_stat), df=n - 2))
    return r, min(p, 1.0)


def binomial_test_one_sided(k: int, n: int, p0: float = 0.5) -> float:
    """Exact one-sided tail P(X >= k) for X ~ Binomial(n, p0).

    Accumulates log binomial terms through a log-sum-exp, so extreme tails
    keep full relative precision.
    """
    k = int(k)
    n = int(n)
    p0 = float(p0)
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    if not 0 <= k <= n:
        raise ValidationError(f"k must lie in [0, {n}], got {k}")
    if not 0.0 < p0 < 1.0:
        raise ValidationError(f"p0 must lie in (0, 1), got {p0}")
    if k == 0:
        return 1.0
    i = np.arange(k, n + 1, dtype=np.float64)
    log_terms = (
        math.lgamma(n + 1)
        - np.array([math.lgamma(v + 1) + math.lgamma(n - v + 1) for v in i])
        + i * math.log(p0)
        + (n - i) * math.log1p(-p0)
    )
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def human_binomial_table(human: HumanSummary) -> dict:
    """Exact tests that each scenario's reward judgments beat chance.

    The positive direction of a record is 'prefers pink', so correctness
    flips for yellow-preferred scenarios.
    """
    table = {}
    for record in human.records:
        if record.question != "reward":
            continue
        correct = (
            record.proportion_positive
            if scenario_goal(record.scenario) == "pink"
            else 1.0 - record.proportion_positive
        )
        k = round(correct * record.n)
        table[record.scenario] = {
            "n": record.n,
            "proportion_correct": correct,
            "p_value": binomial_test_one_sided(k, record.n, 0.5),
        }
    return table


def compare_models(results, human: HumanSummary) -> dict:
    """Pearson comparison of each model's reward judgments to human means."""
    ordered = sorted(results, key=lambda res: SCENARIO_LABELS.index(res.scenario))
    human_means = []
    for res in ordered:
        record = human.lookup(res.scenario, "reward")
        if record is None:
            raise ValidationError(f"no human reward record for scenario {res.scenario!r}")
        human_means.append(record.mean_score)
    out = {"n_scenarios": len(ordered), "scenarios": [res.scenario for res in ordered]}
    for name, values in (
        ("reward_only", [res.reward_only_judgment for res in ordered]),
        ("joint", [res.joint_reward_judgment for res in ordered]),
    ):
        r, p = pearson_correlation(values, human_means)
        out[name] = {"pearson_r": r, "p_value": p}
    return out


# ---------------------------------------------------------------------------
# Experiment configuration


_CONFIG_DEFAULTS = {
    "gamma": DEFAULT_DISCOUNT,
    "beta_infer": DEFAULT_BETA,
    "beta_demo": DEFAULT_DEMO_BETA,
    "preferred_reward": 1.0,
    "other_reward": 0.5,
    "step_reward": -0.01,
    "seed": 7,
    "max_steps": DEFAULT_MAX_STEPS,
    "demo_mode": "soft",
    "tol": DEFAULT_TOL,
    "max_iters": DEFAULT_MAX_ITERS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    grid_paths: tuple[Path, ...]
    human_data: Path | None
    gamma: float
    beta_infer: float
    beta_demo: float
    preferred_reward: float
    other_reward: float
    step_reward: float
    seed: int
    max_steps: int
    demo_mode: str
    tol: float
    max_iters: int

    def __post_init__(self):
        if not self.grid_paths:
            raise ConfigError("at least one grid is required")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.beta_infer <= 0 or self.beta_demo <= 0:
            raise ConfigError("beta_infer and beta_demo must be positive")
        if self.preferred_reward <= self.other_reward:
            raise ConfigError("preferred_reward must exceed other_reward")
        if self.step_reward > 0:
            raise ConfigError(f"step_reward must be <= 0, got {self.step_reward}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if self.demo_mode not in ("soft", "greedy"):
            raise ConfigError(f"demo_mode must be 'soft' or 'greedy', got {self.demo_mode!r}")
        for path in self.grid_paths:
            if not Path(path).exists():
                raise ConfigError(f"grid file not found: {path}")
        if self.human_data is not None and not Path(self.human_data).exists():
            raise ConfigError(f"human summary file not found: {self.human_data}")


def default_config_path() -> Path:
    return Path(resources.files("construal_irl.fixtures") / "default.cfg")


def parse_config(path) -> ExperimentConfig:
    """Parse a key = value config file; paths resolve relative to the file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").split("\n"), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{i}: duplicate key {key!r}")
        raw[key] = value

    known = set(_CONFIG_DEFAULTS) | {"grids", "human_data"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "grids" not in raw:
        raise ConfigError("config must list grids")

    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    grid_paths = tuple(resolve(part.strip()) for part in raw["grids"].split(",") if part.strip())
    human = resolve(raw["human_data"].strip()) if raw.get("human_data") else None

    values = dict(_CONFIG_DEFAULTS)
    casts = {
        "gamma": float,
        "beta_infer": float,
        "beta_demo": float,
        "preferred_reward": float,
        "other_reward": float,
        "step_reward": float,
        "seed": int,
        "max_steps": int,
        "max_iters": int,
        "tol": float,
        "demo_mode": str,
    }
    for key, cast in casts.items():
        if key in raw:
            try:
                values[key] = cast(raw[key])
            except ValueError:
                raise ConfigError(f"config key {key!r} has malformed value {raw[key]!r}")
    return ExperimentConfig(grid_paths=grid_paths, human_data=human, **values)


# ---------------------------------------------------------------------------
# Running the experiment


def _hypothesis_space(config) -> HypothesisSpace:
    return default_hypothesis_space(
        preferred_reward=config.preferred_reward,
        other_reward=config.other_reward,
        step_reward=config.step_reward,
    )


def _reward_for(space, color):
    for reward in space.rewards:
        if reward.preferred_goal == color:
            return reward
    raise ConfigError(f"no hypothesis prefers goal {color!r}")


def _expected_goal(grid, construal, reward):
    reach = reachable_cells(grid, construal)
    reachable = {color for color, xy in grid.goals.items() if xy in reach}
    if not reachable:
        raise ConfigError(f"no goal reachable in {grid.width}x{grid.height} grid under {construal!r}")
    return max(reachable, key=lambda color: reward.goal_rewards[color])


def _validate_dominance(grid, grid_id, config, space):
    """The goal-reward gap must dominate path-length differences: for every
    scenario the construed greedy plan must reach the goal it should."""
    for label in SCENARIO_LABELS:
        construal = scenario_construal(label)
        reward = _reward_for(space, scenario_goal(label))
        true_mdp = compile_mdp(grid, FULLY_AWARE, reward, config.gamma)
        construed = compile_mdp(grid, construal, reward, config.gamma)
        expected = _expected_goal(grid, construal, reward)
        traj = simulate(
            true_mdp,
            construed,
            seed=0,
            max_steps=4 * grid.width * grid.height,
            mode="greedy",
            tol=config.tol,
            max_iters=config.max_iters,
        )
        if traj.truncated or traj.states[-1] != grid.state_index(grid.goals[expected]):
            raise ConfigError(
                f"goal preference does not dominate on {grid_id} / {label}: "
                f"greedy construed plan did not reach the {expected} goal"
            )


def generate_trajectories(config: ExperimentConfig):
    """One demonstration per (scenario, maze): plan under the scenario's
    construal and reward, act in the true maze. Seeds derive from the config
    seed, the maze index, and the scenario index."""
    grids = [(path.stem, load_grid(path)) for path in config.grid_paths]
    space = _hypothesis_space(config)
    trajectories = {}
    for gi, (grid_id, grid) in enumerate(grids):
        _validate_dominance(grid, grid_id, config, space)
        for si, label in enumerate(SCENARIO_LABELS):
            construal = scenario_construal(label)
            reward = _reward_for(space, scenario_goal(label))
            true_mdp = compile_mdp(grid, FULLY_AWARE, reward, config.gamma)
            construed = compile_mdp(grid, construal, reward, config.gamma)
            seed = int(np.random.SeedSequence([config.seed, gi, si]).generate_state(1)[0])
            trajectories[(label, grid_id)] = simulate(
                true_mdp,
                construed,
                beta=config.beta_demo,
                seed=seed,
                max_steps=config.max_steps,
                grid_id=grid_id,
                mode=config.demo_mode,
                tol=config.tol,
                max_iters=config.max_iters,
            )
    return grids, space, trajectories


def _chain_reward_only(pairs, space, config):
    """Pool trajectories from several mazes by sequential Bayesian updates."""
    current = space
    posterior = None
    total_log_marginal = 0.0
    construal_marginal = space.prior.sum(axis=0)
    for grid, traj in pairs:
        posterior = reward_only_posterior(
            [traj], current, grid, config.beta_infer, config.gamma, config.tol, config.max_iters
        )
        total_log_marginal += posterior.normalizer
        next_prior = np.outer(posterior.probabilities, construal_marginal)
        current = HypothesisSpace(space.rewards, space.construals, next_prior)
    if posterior is None:
        raise ValidationError("no trajectories to pool")
    return Posterior(
        log_weights=posterior.log_weights,
        normalizer=total_log_marginal,
        rewards=posterior.rewards,
        construals=None,
        probabilities=posterior.probabilities,
    )


def _chain_joint(pairs, space, config):
    current = space
    posterior = None
    total_log_marginal = 0.0
    for grid, traj in pairs:
        posterior = joint_posterior(
            [traj], current, grid, config.beta_infer, config.gamma, config.tol, config.max_iters
        )
        total_log_marginal += posterior.normalizer
        current = HypothesisSpace(space.rewards, space.construals, posterior.probabilities)
    if posterior is None:
        raise ValidationError("no trajectories to pool")
    return Posterior(
        log_weights=posterior.log_weights,
        normalizer=total_log_marginal,
        rewards=posterior.rewards,
        construals=posterior.construals,
        probabilities=posterior.probabilities,
    )


def _pink_probability(posterior):
    probs = marginal(posterior, "reward")
    return float(
        sum(p for p, reward in zip(probs, posterior.rewards) if reward.preferred_goal == "pink")
    )


def _aware_probability(posterior):
    probs = marginal(posterior, "construal")
    return float(
        sum(p for p, construal in zip(probs, posterior.construals) if construal.notch_aware)
    )


def run_experiment(config, out_dir=None):
    """Run the full experiment; optionally write all artifacts to ``out_dir``.

    Returns the four pooled ScenarioResults in canonical scenario order.
    """
    if not isinstance(config, ExperimentConfig):
        config = parse_config(config)
    grids, space, trajectories = generate_trajectories(config)
    grid_ids = [grid_id for grid_id, _ in grids]
    pooled_id = "+".join(grid_ids)
    by_grid = dict(grids)

    human = ingest_human_summary(config.human_data) if config.human_data else None

    results = []
    pooled_posteriors = {}
    per_traj_posteriors = {}
    for label in SCENARIO_LABELS:
        pairs = [(by_grid[grid_id], trajectories[(label, grid_id)]) for grid_id in grid_ids]
        ro = _chain_reward_only(pairs, space, config)
        joint = _chain_joint(pairs, space, config)
        pooled_posteriors[label] = {"reward_only": ro, "joint": joint}
        for grid_id in grid_ids:
            traj = trajectories[(label, grid_id)]
            per_traj_posteriors[(label, grid_id)] = {
                "reward_only": reward_only_posterior(
                    [traj], space, by_grid[grid_id], config.beta_infer, config.gamma,
                    config.tol, config.max_iters,
                ),
                "joint": joint_posterior(
                    [traj], space, by_grid[grid_id], config.beta_infer, config.gamma,
                    config.tol, config.max_iters,
                ),
            }
        record = human.lookup(label, "reward") if human else None
        results.append(
            ScenarioResult(
                grid_id=pooled_id,
                scenario=label,
                reward_only_judgment=to_judgment_scale(_pink_probability(ro)),
                joint_reward_judgment=to_judgment_scale(_pink_probability(joint)),
                joint_construal_judgment=to_judgment_scale(_aware_probability(joint)),
                human_mean=record.mean_score if record else None,
                human_se=record.standard_error if record else None,
            )
        )

    if out_dir is not None:
        _write_outputs(
            Path(out_dir), config, results, trajectories, pooled_posteriors,
            per_traj_posteriors, human,
        )
    return results


def _bar_plot_rows(results, human):
    rows = []
    for res in results:
        if res.human_mean is not None:
            rows.append(
                [res.scenario, "human", "reward", _fmt(res.human_mean), _fmt(res.human_se)]
            )
        rows.append([res.scenario, "reward_only", "reward", _fmt(res.reward_only_judgment), ""])
        rows.append([res.scenario, "joint", "reward", _fmt(res.joint_reward_judgment), ""])
        rows.append([res.scenario, "joint", "construal", _fmt(res.joint_construal_judgment), ""])
        if human is not None:
            record = human.lookup(res.scenario, "construal")
            if record is not None:
                rows.append(
                    [res.scenario, "human", "construal", _fmt(record.mean_score),
                     _fmt(record.standard_error)]
                )
    return rows


def _fmt(value):
    return "" if value is None else repr(float(value))


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_outputs(out_dir, config, results, trajectories, pooled, per_traj, human):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trajectories").mkdir(exist_ok=True)
    (out_dir / "posteriors").mkdir(exist_ok=True)
    (out_dir / "posteriors" / "per_trajectory").mkdir(exist_ok=True)

    _write_json(
        out_dir / "config_echo.json",
        {
            "grids": [path.stem for path in config.grid_paths],
            "gamma": config.gamma,
            "beta_infer": config.beta_infer,
            "beta_demo": config.beta_demo,
            "preferred_reward": config.preferred_reward,
            "other_reward": config.other_reward,
            "step_reward": config.step_reward,
            "seed": config.seed,
            "max_steps": config.max_steps,
            "demo_mode": config.demo_mode,
        },
    )
    _write_json(out_dir / "scenario_results.json", [res.to_json_dict() for res in results])

    for (label, grid_id), traj in sorted(trajectories.items()):
        stem = f"{grid_id}_{label}"
        _write_json(out_dir / "trajectories" / f"{stem}.json", trajectory_to_json_dict(traj))
        (out_dir / "trajectories" / f"{stem}.csv").write_text(
            trajectory_to_csv(traj), encoding="utf-8"
        )

    for label, models in sorted(pooled.items()):
        for model, posterior in sorted(models.items()):
            _write_json(
                out_dir / "posteriors" / f"{label}_{model}.json",
                posterior_to_json_dict(posterior),
            )
    for (label, grid_id), models in sorted(per_traj.items()):
        for model, posterior in sorted(models.items()):
            _write_json(
                out_dir / "posteriors" / "per_trajectory" / f"{grid_id}_{label}_{model}.json",
                posterior_to_json_dict(posterior),
            )

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "source", "question", "value", "se"])
    writer.writerows(_bar_plot_rows(results, human))
    (out_dir / "bar_plot_data.csv").write_text(buf.getvalue(), encoding="utf-8")

    if human is not None:
        _write_json(out_dir / "model_human_comparison.json", compare_models(results, human))
        _write_json(out_dir / "human_binomial.json", human_binomial_table(human))
