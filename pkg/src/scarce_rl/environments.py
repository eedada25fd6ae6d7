"""Synthetic five-year reward environments and the budget-enforcing wrapper.

The real intervention simulators behind this problem are not available, so the
package ships two synthetic stand-ins built from per-year Gaussian-mixture
reward surfaces:

* ``EnvA``: the reward of year *i* depends only on the current action and the
  immediately preceding one, through a multiplicative similarity carryover.
* ``EnvB``: the reward of year *i* depends on the current action and on the
  running mean of *all* previous actions, which shifts the effective action.

Both are deterministic when ``noise_std`` is zero (the default). A
:class:`BudgetedEnv` wraps either one and meters the hard budget of 100 step
evaluations / 20 episodes that every agent must respect.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import (
    HORIZON,
    Action,
    Budget,
    BudgetExhaustedError,
    BudgetSnapshot,
    EpisodeDoneError,
    EpisodeRecord,
    Policy,
    SeededRng,
)

#: Grid size used for construction-time surface validation and landscape scans.
SCAN_GRID_N = 40

#: Tolerated relative deviation between a year's scanned maximum and year_max.
YEAR_MAX_RTOL = 0.05


@dataclass(frozen=True)
class GaussianBump:
    """One isotropic Gaussian component of a reward surface.

    ``value(a) = amplitude * exp(-||a - center||^2 / (2 * width^2))`` with
    Euclidean distance on the unit square. Negative amplitudes carve
    low-value regions.
    """

    center: Action
    amplitude: float
    width: float

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError(f"bump width must be positive, got {self.width}")

    def value(self, action: Action) -> float:
        d2 = (action.itn - self.center.itn) ** 2 + (action.irs - self.center.irs) ** 2
        return self.amplitude * math.exp(-d2 / (2.0 * self.width**2))


def bump_surface(bumps, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bump-mixture evaluation over coordinate arrays of equal shape."""
    total = np.zeros_like(np.asarray(xs, dtype=float))
    for b in bumps:
        d2 = (xs - b.center.itn) ** 2 + (ys - b.center.irs) ** 2
        total += b.amplitude * np.exp(-d2 / (2.0 * b.width**2))
    return total


def _validate_years(years) -> tuple[tuple[GaussianBump, ...], ...]:
    years = tuple(tuple(b for b in year) for year in years)
    if len(years) != HORIZON:
        raise ValueError(f"expected {HORIZON} per-year bump lists, got {len(years)}")
    return years


def _validate_year_max(years, year_max: float) -> None:
    # 40x40 exhaustive scan of each year's base surface (no carryover/noise).
    axis = np.linspace(0.0, 1.0, SCAN_GRID_N)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    for year_index, bumps in enumerate(years, start=1):
        peak = float(bump_surface(bumps, xs, ys).max())
        if abs(peak - year_max) > YEAR_MAX_RTOL * abs(year_max):
            raise ValueError(
                f"year {year_index} surface maximum {peak:.2f} deviates more than "
                f"{YEAR_MAX_RTOL:.0%} from the configured year_max {year_max}"
            )


@dataclass(frozen=True)
class EnvConfigA:
    """Configuration of the pairwise-carryover environment.

    The reward of year 1 is the bump mixture alone; for later years it is
    scaled by ``(1 - s) + s * exp(-||a - a_prev||^2 / (2 * w^2))`` with
    ``s = carryover_strength`` and ``w = carryover_width``, so repeating the
    previous action keeps the full surface value while moving far away keeps
    only the ``1 - s`` fraction.
    """

    years: tuple[tuple[GaussianBump, ...], ...]
    carryover_strength: float = 0.5
    carryover_width: float = 0.5
    noise_std: float = 0.0
    seed: int = 0
    year_max: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "years", _validate_years(self.years))
        if not 0.0 <= self.carryover_strength <= 1.0:
            raise ValueError("carryover_strength must be in [0, 1]")
        if self.carryover_width <= 0:
            raise ValueError("carryover_width must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.year_max is not None:
            _validate_year_max(self.years, self.year_max)


@dataclass(frozen=True)
class EnvConfigB:
    """Configuration of the history-mean environment.

    For year > 1 the bump mixture is evaluated at the effective action
    ``(1 - h) * a + h * mean(history)`` with ``h = history_weight``, so every
    earlier action keeps influencing later rewards.
    """

    years: tuple[tuple[GaussianBump, ...], ...]
    history_weight: float = 0.4
    noise_std: float = 0.0
    seed: int = 0
    year_max: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "years", _validate_years(self.years))
        if not 0.0 <= self.history_weight <= 1.0:
            raise ValueError("history_weight must be in [0, 1]")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.year_max is not None:
            _validate_year_max(self.years, self.year_max)


def _check_year(year: int) -> None:
    if not 1 <= year <= HORIZON:
        raise ValueError(f"year must be in 1..{HORIZON}, got {year}")


def year_base(config, year: int, action: Action) -> float:
    """Bump-mixture value of one year's surface, before carryover/history/noise."""
    _check_year(year)
    return sum(b.value(action) for b in config.years[year - 1])


def year_reward_a(
    year: int,
    action: Action,
    prev_action: Action | None,
    config: EnvConfigA,
    rng: SeededRng | None = None,
) -> float:
    """Reward of one EnvA year given the immediately preceding action.

    ``prev_action`` must be None exactly for year 1. When ``noise_std`` is
    positive a Normal(0, noise_std) term is drawn from ``rng``.
    """
    _check_year(year)
    if (prev_action is None) != (year == 1):
        raise ValueError("prev_action must be None iff year == 1")
    base = year_base(config, year, action)
    if year == 1:
        carry = 1.0
    else:
        d2 = (action.itn - prev_action.itn) ** 2 + (action.irs - prev_action.irs) ** 2
        s = config.carryover_strength
        carry = (1.0 - s) + s * math.exp(-d2 / (2.0 * config.carryover_width**2))
    reward = base * carry
    if config.noise_std > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_std > 0")
        reward += rng.normal(config.noise_std)
    return reward


def year_reward_b(
    year: int,
    action: Action,
    history: list[Action] | tuple[Action, ...],
    config: EnvConfigB,
    rng: SeededRng | None = None,
) -> float:
    """Reward of one EnvB year given all previous actions of the episode."""
    _check_year(year)
    if len(history) != year - 1:
        raise ValueError(f"history length {len(history)} does not match year {year}")
    if year == 1:
        effective = action
    else:
        h = config.history_weight
        mean_itn = sum(a.itn for a in history) / len(history)
        mean_irs = sum(a.irs for a in history) / len(history)
        effective = Action(
            (1.0 - h) * action.itn + h * mean_itn,
            (1.0 - h) * action.irs + h * mean_irs,
        )
    reward = year_base(config, year, effective)
    if config.noise_std > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_std > 0")
        reward += rng.normal(config.noise_std)
    return reward


class EnvironmentModel(ABC):
    """Behavioral contract of a five-year episodic environment.

    Exactly HORIZON steps per episode; after the fifth step the episode is done
    and :meth:`reset` is required before further steps. The reward for a given
    (history, action, year) is deterministic given the environment seed and
    noise setting. Instances are single-session objects, never shared between
    concurrent tasks.
    """

    def __init__(self) -> None:
        self._year = 1
        self._history: list[Action] = []

    @property
    def year(self) -> int:
        """The year about to be played (1..HORIZON); HORIZON after the last step."""
        return min(self._year, HORIZON)

    @property
    def done(self) -> bool:
        return self._year > HORIZON

    @property
    def steps_taken(self) -> int:
        return len(self._history)

    @property
    def history(self) -> tuple[Action, ...]:
        return tuple(self._history)

    def reset(self) -> int:
        self._year = 1
        self._history = []
        return 1

    def step(self, action: Action) -> float:
        if self.done:
            raise EpisodeDoneError("episode finished; call reset() before stepping")
        if not isinstance(action, Action):
            action = Action(float(action[0]), float(action[1]))
        reward = self._reward(self._year, action, self._history)
        self._history.append(action)
        self._year += 1
        return reward

    @abstractmethod
    def _reward(self, year: int, action: Action, history: list[Action]) -> float: ...


class EnvA(EnvironmentModel):
    """Pairwise-carryover environment: year i depends on actions i and i-1."""

    def __init__(self, config: EnvConfigA):
        super().__init__()
        self.config = config
        self._rng = SeededRng(config.seed)

    def _reward(self, year: int, action: Action, history: list[Action]) -> float:
        prev = history[-1] if history else None
        return year_reward_a(year, action, prev, self.config, rng=self._rng)


class EnvB(EnvironmentModel):
    """History-mean environment: year i depends on the current and all previous actions."""

    def __init__(self, config: EnvConfigB):
        super().__init__()
        self.config = config
        self._rng = SeededRng(config.seed)

    def _reward(self, year: int, action: Action, history: list[Action]) -> float:
        return year_reward_b(year, action, list(history), self.config, rng=self._rng)


@dataclass(frozen=True)
class StepResult:
    """Outcome of one budgeted step: reward, upcoming year, and budget state."""

    reward: float
    year: int
    done: bool
    remaining: BudgetSnapshot


class BudgetedEnv:
    """Meters every step of an inner environment against a hard budget.

    Each step consumes one evaluation; each completed five-step episode
    consumes one episode. A reset in the middle of an episode forfeits it:
    the episode is counted as used and its unplayed steps are charged, so
    ``used_evaluations == 5 * used_episodes + in-flight steps`` always holds
    and resets can never stretch the budget.
    """

    def __init__(self, inner: EnvironmentModel, budget: Budget | None = None):
        self.inner = inner
        self._budget = budget if budget is not None else Budget()

    @property
    def budget(self) -> BudgetSnapshot:
        return self._budget.snapshot()

    @property
    def year(self) -> int:
        return self.inner.year

    @property
    def done(self) -> bool:
        return self.inner.done

    def reset(self) -> int:
        steps = self.inner.steps_taken
        if 0 < steps < HORIZON:
            self._budget.charge_episode()
            for _ in range(HORIZON - steps):
                if self._budget.remaining_evaluations > 0:
                    self._budget.charge_evaluation()
        return self.inner.reset()

    def step(self, action: Action) -> StepResult:
        if self._budget.remaining_evaluations <= 0:
            raise BudgetExhaustedError(
                f"evaluation budget exhausted ({self._budget.max_evaluations} used)"
            )
        if self.inner.done:
            raise EpisodeDoneError("episode finished; call reset() before stepping")
        if self.inner.steps_taken == 0 and self._budget.remaining_episodes <= 0:
            raise BudgetExhaustedError(
                f"episode budget exhausted ({self._budget.max_episodes} used)"
            )
        self._budget.charge_evaluation()
        reward = self.inner.step(action)
        if self.inner.done:
            self._budget.charge_episode()
        return StepResult(
            reward=reward,
            year=self.inner.year,
            done=self.inner.done,
            remaining=self._budget.snapshot(),
        )


def evaluate_policy(env, policy: Policy) -> EpisodeRecord:
    """Run one full episode of ``policy`` and return its record.

    Requires at least five evaluations and one episode of budget; consumes
    exactly five evaluations / one episode. Works against any object with the
    BudgetedEnv step/reset/budget surface (including the remote client).
    """
    budget = env.budget
    if budget.remaining_evaluations < HORIZON or budget.remaining_episodes < 1:
        raise BudgetExhaustedError("not enough budget left for a full episode")
    env.reset()
    rewards = [env.step(action).reward for action in policy]
    return EpisodeRecord.from_rewards(policy, rewards)


# ---------------------------------------------------------------------------
# Config file round-trip and the two shipped default environments
# ---------------------------------------------------------------------------

def config_to_dict(config: EnvConfigA | EnvConfigB) -> dict:
    """Serializable form of an environment config (the documented file schema)."""
    out = {
        "years": [
            {
                "bumps": [
                    {"center": [b.center.itn, b.center.irs], "amplitude": b.amplitude, "width": b.width}
                    for b in year
                ]
            }
            for year in config.years
        ],
        "carryover_strength": getattr(config, "carryover_strength", 0.0),
        "carryover_width": getattr(config, "carryover_width", 1.0),
        "history_weight": getattr(config, "history_weight", 0.0),
        "noise_std": config.noise_std,
        "seed": config.seed,
    }
    return out


def _years_from_dict(data: dict) -> tuple[tuple[GaussianBump, ...], ...]:
    return tuple(
        tuple(
            GaussianBump(
                center=Action(float(b["center"][0]), float(b["center"][1])),
                amplitude=float(b["amplitude"]),
                width=float(b["width"]),
            )
            for b in year["bumps"]
        )
        for year in data["years"]
    )


def config_from_dict(data: dict, year_max: float | None = None) -> EnvConfigA | EnvConfigB:
    """Build a config from the file schema.

    A positive ``history_weight`` selects the history-mean environment;
    otherwise the pairwise-carryover one.
    """
    years = _years_from_dict(data)
    history_weight = float(data.get("history_weight", 0.0))
    if history_weight > 0.0:
        return EnvConfigB(
            years=years,
            history_weight=history_weight,
            noise_std=float(data.get("noise_std", 0.0)),
            seed=int(data.get("seed", 0)),
            year_max=year_max,
        )
    return EnvConfigA(
        years=years,
        carryover_strength=float(data.get("carryover_strength", 0.5)),
        carryover_width=float(data.get("carryover_width", 0.5)),
        noise_std=float(data.get("noise_std", 0.0)),
        seed=int(data.get("seed", 0)),
        year_max=year_max,
    )


def load_env_config(path, year_max: float | None = None) -> EnvConfigA | EnvConfigB:
    with open(path, encoding="utf-8") as f:
        return config_from_dict(json.load(f), year_max=year_max)


def _load_packaged(name: str) -> dict:
    text = resources.files("scarce_rl.configs").joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)


def default_env_a() -> EnvConfigA:
    """The repo's canonical carryover environment (validated against year_max 110)."""
    return config_from_dict(_load_packaged("env_a.json"), year_max=110.0)


def default_env_b() -> EnvConfigB:
    """The repo's canonical history-mean environment (same bump sets as env_a)."""
    config = config_from_dict(_load_packaged("env_b.json"), year_max=110.0)
    if not isinstance(config, EnvConfigB):
        raise ValueError("env_b.json must define a positive history_weight")
    return config


def resolve_env_config(env_id: str) -> EnvConfigA | EnvConfigB:
    """Map an environment id ("env_a", "env_b", or a config file path) to a config."""
    if env_id == "env_a":
        return default_env_a()
    if env_id == "env_b":
        return default_env_b()
    path = Path(env_id)
    if path.exists():
        return load_env_config(path)
    raise ValueError(f"unknown environment id or missing config file: {env_id!r}")


def build_env(config: EnvConfigA | EnvConfigB, budget: Budget | None = None) -> BudgetedEnv:
    """Instantiate a fresh budgeted environment from a config."""
    inner = EnvB(config) if isinstance(config, EnvConfigB) else EnvA(config)
    return BudgetedEnv(inner, budget=budget)
