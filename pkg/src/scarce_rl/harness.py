"""Experiment protocol: repeated fresh runs, comparison tables, landscape scans.

An experiment is ``runs`` independent repetitions of one agent on one
environment, each with its own seed and a fresh environment and agent (no
knowledge transfer between runs). Comparisons pair agents on a shared seed
list and report each agent's mean best reward as a percentage of the
random-search baseline. All outputs are deterministic data files; rendering
is left to external tools.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bayesopt import BoConfig, run_bo_ensemble, run_bo_joint, run_bo_per_year
from .core import HORIZON, Action, Budget, EpisodeRecord, Policy, SeededRng
from .environments import (
    BudgetedEnv,
    EnvConfigA,
    EnvConfigB,
    bump_surface,
    build_env,
    resolve_env_config,
)
from .evolutionary import GaConfig, run_full_sequence_break, run_ga, run_random_search
from .qlearning import QConfig, _run_seq_break, run_plain_qlearning

logger = logging.getLogger(__name__)

RESULTS_SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "agent",
    "env",
    "run",
    "seed",
    "best_total",
    "reward_y1",
    "reward_y2",
    "reward_y3",
    "reward_y4",
    "reward_y5",
    "evaluations_used",
]


# ---------------------------------------------------------------------------
# Agent registry
# ---------------------------------------------------------------------------

def _agent_random_search(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_random_search(env, rng)


def _agent_genetic(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_ga(env, GaConfig(**config), rng)


def _agent_qlearning(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_plain_qlearning(env, QConfig(**config), rng)


def _agent_qlearning_seq_break(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    _, best, _ = _run_seq_break(env, QConfig(**config), rng)
    return best


def _agent_full_seq_break(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_full_sequence_break(env, rng)


def _agent_bo_per_year(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_bo_per_year(env, BoConfig(**config), rng)


def _agent_bo_joint(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_bo_joint(env, BoConfig(**config), rng)


def _agent_bo_ensemble(env: BudgetedEnv, rng: SeededRng, config: dict) -> EpisodeRecord:
    return run_bo_ensemble(env, BoConfig(**config), rng)


AGENTS = {
    "random_search": _agent_random_search,
    "genetic": _agent_genetic,
    "qlearning": _agent_qlearning,
    "qlearning_seq_break": _agent_qlearning_seq_break,
    "full_seq_break": _agent_full_seq_break,
    "bo_per_year": _agent_bo_per_year,
    "bo_joint": _agent_bo_joint,
    "bo_ensemble": _agent_bo_ensemble,
}

BASELINE_AGENT = "random_search"


# ---------------------------------------------------------------------------
# Specs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    """One agent, one environment, ``runs`` seeded repetitions."""

    env: str
    agent: str
    agent_config: dict = field(default_factory=dict)
    runs: int = 10
    episodes: int = 20
    seeds: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.agent not in AGENTS:
            raise ValueError(f"unknown agent {self.agent!r}; known: {sorted(AGENTS)}")
        seeds = tuple(int(s) for s in self.seeds) or tuple(range(self.runs))
        object.__setattr__(self, "seeds", seeds)
        if len(self.seeds) != self.runs:
            raise ValueError(f"runs ({self.runs}) must equal len(seeds) ({len(self.seeds)})")
        if self.episodes < 1:
            raise ValueError("episodes must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        return cls(
            env=data["env"],
            agent=data["agent"],
            agent_config=dict(data.get("agent_config", {})),
            runs=int(data.get("runs", 10)),
            episodes=int(data.get("episodes", 20)),
            seeds=tuple(int(s) for s in data.get("seeds", [])),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        return {
            "env": self.env,
            "agent": self.agent,
            "agent_config": dict(self.agent_config),
            "runs": self.runs,
            "episodes": self.episodes,
            "seeds": list(self.seeds),
        }

    def with_overrides(self, runs=None, episodes=None, seed=None) -> "ExperimentSpec":
        """Apply CLI-style overrides; a single seed replaces the whole list."""
        spec = self
        if seed is not None:
            runs = runs if runs is not None else 1
            spec = replace(spec, runs=runs, seeds=tuple(int(seed) + i for i in range(runs)))
        elif runs is not None:
            spec = replace(spec, runs=runs, seeds=spec.seeds[:runs] if len(spec.seeds) >= runs else ())
        if episodes is not None:
            spec = replace(spec, episodes=episodes)
        return spec


@dataclass(frozen=True)
class RunResult:
    run: int
    seed: int
    best: EpisodeRecord
    evaluations_used: int


@dataclass(frozen=True)
class ComparisonRow:
    agent: str
    mean_best_reward: float
    std_best_reward: float
    pct_of_baseline: float | None


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    results: tuple[RunResult, ...]
    row: ComparisonRow

    @property
    def best_totals(self) -> list[float]:
        return [r.best.total for r in self.results]


def _mean_std(values) -> tuple[float, float]:
    values = [float(v) for v in values]
    mean = float(np.mean(values))
    std = 0.0 if len(values) < 2 else float(np.std(values, ddof=1))
    return mean, std


def _single_run(spec: ExperimentSpec, run_index: int) -> RunResult:
    seed = spec.seeds[run_index]
    config = resolve_env_config(spec.env)
    budget = Budget(max_evaluations=spec.episodes * HORIZON, max_episodes=spec.episodes)
    env = build_env(config, budget=budget)
    rng = SeededRng(seed)
    best = AGENTS[spec.agent](env, rng, dict(spec.agent_config))
    return RunResult(
        run=run_index, seed=seed, best=best, evaluations_used=env.budget.used_evaluations
    )


def run_experiment(
    spec: ExperimentSpec,
    parallel: bool = False,
    baseline_mean: float | None = None,
) -> ExperimentResult:
    """Execute every run of a spec; fresh env and agent per seed.

    Results are keyed by run index, so parallel and sequential execution
    produce identical output. ``pct_of_baseline`` is 100 for the baseline
    agent itself, computed against ``baseline_mean`` when provided, and left
    unset otherwise.
    """
    logger.info("running %s on %s (%d runs)", spec.agent, spec.env, spec.runs)
    if parallel:
        with ThreadPoolExecutor(max_workers=min(spec.runs, 8)) as pool:
            results = tuple(pool.map(lambda i: _single_run(spec, i), range(spec.runs)))
    else:
        results = tuple(_single_run(spec, i) for i in range(spec.runs))
    mean, std = _mean_std([r.best.total for r in results])
    if baseline_mean is not None:
        pct = 100.0 * mean / baseline_mean
    elif spec.agent == BASELINE_AGENT:
        pct = 100.0
    else:
        pct = None
    return ExperimentResult(spec=spec, results=results, row=ComparisonRow(
        agent=spec.agent, mean_best_reward=mean, std_best_reward=std, pct_of_baseline=pct
    ))


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    experiments: tuple[ExperimentResult, ...]


def compare_agents(specs: list[ExperimentSpec], parallel: bool = False) -> ComparisonTable:
    """Run several specs sharing env and seeds; baseline = the first random-search spec."""
    if not specs:
        raise ValueError("no specs given")
    for spec in specs[1:]:
        if spec.env != specs[0].env or spec.seeds != specs[0].seeds:
            raise ValueError("all specs in a comparison must share env and seeds")
    baseline_spec = next((s for s in specs if s.agent == BASELINE_AGENT), None)
    if baseline_spec is None:
        raise ValueError("a comparison needs a random_search baseline spec")
    baseline_result = run_experiment(baseline_spec, parallel=parallel)
    baseline_mean = baseline_result.row.mean_best_reward
    if baseline_mean == 0:
        raise ValueError("baseline mean reward is zero; percentages undefined")
    experiments = []
    for spec in specs:
        if spec is baseline_spec:
            experiments.append(baseline_result)
        else:
            experiments.append(run_experiment(spec, parallel=parallel, baseline_mean=baseline_mean))
    return ComparisonTable(
        rows=tuple(e.row for e in experiments), experiments=tuple(experiments)
    )


def format_comparison_table(table: ComparisonTable) -> str:
    """Fixed-width text table: agent, mean, std, percent of baseline."""
    lines = [f"{'agent':<22} {'mean':>12} {'std':>12} {'% of baseline':>14}"]
    for row in table.rows:
        pct = f"{row.pct_of_baseline:.1f}%" if row.pct_of_baseline is not None else "-"
        lines.append(
            f"{row.agent:<22} {row.mean_best_reward:>12.3f} {row.std_best_reward:>12.3f} {pct:>14}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Landscape scans
# ---------------------------------------------------------------------------

def landscape_scan(
    config: EnvConfigA | EnvConfigB,
    year: int,
    grid_n: int = 40,
    context: Policy | list[Action] | None = None,
    scale_display: bool = False,
) -> np.ndarray:
    """Exhaustive grid of the noise-free reward surface of one year.

    Earlier years are fixed to ``context`` actions ((0.5, 0.5) each by
    default). Returns a ``grid_n x grid_n`` matrix, row-major over the itn
    axis; ``scale_display`` divides all values by 100 for plotting.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    if not 1 <= year <= HORIZON:
        raise ValueError(f"year must be in 1..{HORIZON}, got {year}")
    if context is None:
        context_actions = [Action(0.5, 0.5)] * (year - 1)
    else:
        context_actions = list(context)[: year - 1]
    if len(context_actions) != year - 1:
        raise ValueError("context must supply an action for every earlier year")

    axis = np.linspace(0.0, 1.0, grid_n)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    bumps = config.years[year - 1]
    if isinstance(config, EnvConfigB) and year > 1:
        h = config.history_weight
        mean_itn = sum(a.itn for a in context_actions) / len(context_actions)
        mean_irs = sum(a.irs for a in context_actions) / len(context_actions)
        values = bump_surface(bumps, (1 - h) * xs + h * mean_itn, (1 - h) * ys + h * mean_irs)
    else:
        values = bump_surface(bumps, xs, ys)
        if isinstance(config, EnvConfigA) and year > 1:
            prev = context_actions[-1]
            s = config.carryover_strength
            d2 = (xs - prev.itn) ** 2 + (ys - prev.irs) ** 2
            values = values * ((1 - s) + s * np.exp(-d2 / (2 * config.carryover_width**2)))
    if scale_display:
        values = values / 100.0
    return values


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

def result_to_dict(result: ExperimentResult) -> dict:
    return {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "spec": result.spec.to_dict(),
        "row": {
            "agent": result.row.agent,
            "mean_best_reward": result.row.mean_best_reward,
            "std_best_reward": result.row.std_best_reward,
            "pct_of_baseline": result.row.pct_of_baseline,
        },
        "runs": [
            {
                "run": r.run,
                "seed": r.seed,
                "best_total": r.best.total,
                "yearly_rewards": list(r.best.yearly_rewards),
                "policy": r.best.policy.to_list(),
                "evaluations_used": r.evaluations_used,
            }
            for r in result.results
        ],
    }


def result_from_dict(data: dict) -> ExperimentResult:
    if data.get("schema_version") != RESULTS_SCHEMA_VERSION:
        raise ValueError(f"unsupported results schema: {data.get('schema_version')}")
    spec = ExperimentSpec.from_dict(data["spec"])
    results = tuple(
        RunResult(
            run=int(r["run"]),
            seed=int(r["seed"]),
            best=EpisodeRecord(
                policy=Policy(tuple(Action(float(p[0]), float(p[1])) for p in r["policy"])),
                yearly_rewards=tuple(float(v) for v in r["yearly_rewards"]),
                total=float(r["best_total"]),
            ),
            evaluations_used=int(r["evaluations_used"]),
        )
        for r in data["runs"]
    )
    row = ComparisonRow(
        agent=data["row"]["agent"],
        mean_best_reward=float(data["row"]["mean_best_reward"]),
        std_best_reward=float(data["row"]["std_best_reward"]),
        pct_of_baseline=(
            None
            if data["row"]["pct_of_baseline"] is None
            else float(data["row"]["pct_of_baseline"])
        ),
    )
    return ExperimentResult(spec=spec, results=results, row=row)


def export_results(result: ExperimentResult, path, format: str = "csv") -> Path:
    """Write an experiment's runs to a CSV or JSON file; stable column order."""
    path = Path(path)
    if format == "json":
        path.write_text(json.dumps(result_to_dict(result), indent=2) + "\n", encoding="utf-8")
        return path
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in result.results:
            writer.writerow(
                [
                    result.spec.agent,
                    result.spec.env,
                    r.run,
                    r.seed,
                    repr(r.best.total),
                    *[repr(v) for v in r.best.yearly_rewards],
                    r.evaluations_used,
                ]
            )
    return path


def load_results(path) -> ExperimentResult:
    with open(path, encoding="utf-8") as f:
        return result_from_dict(json.load(f))


def export_comparison(table: ComparisonTable, path, format: str = "csv") -> Path:
    path = Path(path)
    if format == "json":
        payload = {
            "schema_version": RESULTS_SCHEMA_VERSION,
            "rows": [
                {
                    "agent": row.agent,
                    "mean_best_reward": row.mean_best_reward,
                    "std_best_reward": row.std_best_reward,
                    "pct_of_baseline": row.pct_of_baseline,
                }
                for row in table.rows
            ],
        }
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return path
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["agent", "mean_best_reward", "std_best_reward", "pct_of_baseline"])
        for row in table.rows:
            writer.writerow(
                [
                    row.agent,
                    repr(row.mean_best_reward),
                    repr(row.std_best_reward),
                    "" if row.pct_of_baseline is None else repr(row.pct_of_baseline),
                ]
            )
    return path


def export_landscape(matrix: np.ndarray, path) -> Path:
    """Write a landscape matrix as (x, y, reward) rows over the unit square."""
    matrix = np.asarray(matrix)
    grid_n = matrix.shape[0]
    axis = np.linspace(0.0, 1.0, grid_n)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["x", "y", "reward"])
        for i in range(grid_n):
            for j in range(matrix.shape[1]):
                writer.writerow([repr(float(axis[i])), repr(float(axis[j])), repr(float(matrix[i, j]))])
    return path
