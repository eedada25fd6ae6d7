"""Shared domain types: intervention actions, five-year policies, budgets, seeded RNG.

Every agent and environment in this package works over the same tiny vocabulary:
an :class:`Action` is one year's pair of intervention coverages, a
:class:`Policy` is five of them, and a :class:`Budget` meters how many per-year
reward queries an agent may spend. All randomness flows through
:class:`SeededRng` so that experiments are bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

#: Number of simulated years per episode. The package supports no other horizon.
HORIZON = 5


class BudgetExhaustedError(RuntimeError):
    """Raised when a step would exceed the evaluation or episode budget."""


class EpisodeDoneError(RuntimeError):
    """Raised when stepping past the final year without a reset."""


@dataclass(frozen=True)
class Action:
    """One year's intervention pair: net coverage (itn) and spray coverage (irs).

    Both coordinates are population fractions and must lie in [0, 1].
    Use :func:`clamp_action` to build an Action from unconstrained values.
    """

    itn: float
    irs: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.itn <= 1.0 and 0.0 <= self.irs <= 1.0):
            raise ValueError(f"action coordinates outside [0, 1]: ({self.itn}, {self.irs})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.itn, self.irs)

    def as_array(self) -> np.ndarray:
        return np.array([self.itn, self.irs], dtype=float)


def clamp_action(pair) -> Action:
    """Clamp a 2-sequence of reals into the unit square and return an Action.

    Idempotent: clamping an in-range pair returns it unchanged.
    """
    x, y = float(pair[0]), float(pair[1])
    return Action(min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0))


def _coerce_actions(actions) -> tuple[Action, ...]:
    return tuple(a if isinstance(a, Action) else Action(float(a[0]), float(a[1])) for a in actions)


@dataclass(frozen=True)
class Policy:
    """An ordered sequence of exactly HORIZON actions, one per year."""

    actions: tuple[Action, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", _coerce_actions(self.actions))
        if len(self.actions) != HORIZON:
            raise ValueError(f"a policy holds exactly {HORIZON} actions, got {len(self.actions)}")

    def __iter__(self):
        return iter(self.actions)

    def __getitem__(self, year_index: int) -> Action:
        return self.actions[year_index]

    @classmethod
    def random(cls, rng: "SeededRng") -> "Policy":
        """Uniform policy over the continuous action space [0, 1]^2 per year."""
        return cls(tuple(Action(rng.uniform(), rng.uniform()) for _ in range(HORIZON)))

    def to_list(self) -> list[list[float]]:
        return [[a.itn, a.irs] for a in self.actions]

    def to_json(self) -> str:
        """Serialize as a JSON array of 5 two-element arrays, e.g. ``[[0.1,0.2],...]``."""
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "Policy":
        return cls(tuple(Action(float(p[0]), float(p[1])) for p in json.loads(text)))


@dataclass(frozen=True)
class PartialPolicy:
    """A policy under construction: between 1 and HORIZON-1 actions.

    Only agents use this; environments and the harness always see full policies.
    """

    actions: tuple[Action, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", _coerce_actions(self.actions))
        if not 1 <= len(self.actions) <= HORIZON - 1:
            raise ValueError(f"a partial policy holds 1..{HORIZON - 1} actions, got {len(self.actions)}")

    def extended(self, action: Action) -> "PartialPolicy | Policy":
        """Append one action; returns a full Policy once HORIZON actions exist."""
        actions = self.actions + (action,)
        return Policy(actions) if len(actions) == HORIZON else PartialPolicy(actions)


@dataclass(frozen=True)
class EpisodeRecord:
    """Per-year rewards and their total for one simulated episode.

    The total is defined as ``sum(yearly_rewards)`` with no re-rounding; the
    constructor rejects any total that does not match that arithmetic exactly.
    """

    policy: Policy
    yearly_rewards: tuple[float, ...]
    total: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yearly_rewards", tuple(float(r) for r in self.yearly_rewards))
        if len(self.yearly_rewards) != HORIZON:
            raise ValueError(f"expected {HORIZON} yearly rewards, got {len(self.yearly_rewards)}")
        if self.total != sum(self.yearly_rewards):
            raise ValueError("total must equal sum(yearly_rewards) exactly")

    @classmethod
    def from_rewards(cls, policy: Policy, rewards) -> "EpisodeRecord":
        rewards = tuple(float(r) for r in rewards)
        return cls(policy=policy, yearly_rewards=rewards, total=sum(rewards))


@dataclass
class Budget:
    """The scarce resource: remaining step evaluations and episodes.

    ``used_evaluations`` always equals 5 x completed episodes plus the steps of
    the in-flight episode; a forfeited (mid-episode reset) episode is charged
    its unplayed steps so the arithmetic stays exact.
    """

    max_evaluations: int = 100
    max_episodes: int = 20
    used_evaluations: int = 0
    used_episodes: int = 0

    @property
    def remaining_evaluations(self) -> int:
        return self.max_evaluations - self.used_evaluations

    @property
    def remaining_episodes(self) -> int:
        return self.max_episodes - self.used_episodes

    def charge_evaluation(self) -> None:
        if self.used_evaluations >= self.max_evaluations:
            raise BudgetExhaustedError(
                f"evaluation budget exhausted ({self.max_evaluations} used)"
            )
        self.used_evaluations += 1

    def charge_episode(self) -> None:
        if self.used_episodes >= self.max_episodes:
            raise BudgetExhaustedError(f"episode budget exhausted ({self.max_episodes} used)")
        self.used_episodes += 1

    def snapshot(self) -> "BudgetSnapshot":
        return BudgetSnapshot(
            max_evaluations=self.max_evaluations,
            max_episodes=self.max_episodes,
            used_evaluations=self.used_evaluations,
            used_episodes=self.used_episodes,
        )


@dataclass(frozen=True)
class BudgetSnapshot:
    """Immutable view of a Budget at one instant."""

    max_evaluations: int
    max_episodes: int
    used_evaluations: int
    used_episodes: int

    @property
    def remaining_evaluations(self) -> int:
        return self.max_evaluations - self.used_evaluations

    @property
    def remaining_episodes(self) -> int:
        return self.max_episodes - self.used_episodes


class SeededRng:
    """Deterministic random stream backed by numpy's PCG64 generator.

    PCG64 is the single pseudo-random algorithm used across the whole package:
    two instances constructed with equal seeds produce identical draw sequences
    on every platform. Child streams derived with :meth:`spawn` are independent
    of the parent and of each other, and are themselves reproducible.
    """

    def __init__(self, seed: int, _sequence: np.random.SeedSequence | None = None):
        self.seed = int(seed)
        self._sequence = _sequence if _sequence is not None else np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.PCG64(self._sequence))

    def spawn(self, key: int) -> "SeededRng":
        """Derive an independent child stream identified by ``key``."""
        child = np.random.SeedSequence(entropy=self._sequence.entropy,
                                       spawn_key=self._sequence.spawn_key + (int(key),))
        return SeededRng(self.seed, _sequence=child)

    def random(self) -> float:
        return float(self._gen.random())

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        out = self._gen.uniform(low, high, size=size)
        return float(out) if size is None else out

    def normal(self, scale: float = 1.0, size=None):
        out = self._gen.normal(0.0, scale, size=size)
        return float(out) if size is None else out

    def integers(self, low: int, high: int | None = None) -> int:
        return int(self._gen.integers(low, high))

    def choice_index(self, probabilities) -> int:
        """Draw a categorical index with the given probability vector."""
        return int(self._gen.choice(len(probabilities), p=np.asarray(probabilities, dtype=float)))


def discretize_action_space(resolution: float) -> list[Action]:
    """Cartesian action grid at the given per-axis resolution, row-major order.

    The 0.1 grid is the one-decimal lattice {0.0, ..., 0.9}^2 (exactly 100
    pairs; 1.0 is excluded by convention). Every other resolution keeps all
    multiples of ``resolution`` up to and including 1.0. Coordinates are
    computed as ``index * resolution`` in a single multiplication and rounded
    at 10 decimals so one-decimal grids carry exact literals (no accumulation
    drift).
    """
    resolution = float(resolution)
    if not 0.0 < resolution <= 1.0:
        raise ValueError(f"resolution must be in (0, 1], got {resolution}")
    cutoff = 0.9 + 1e-9 if abs(resolution - 0.1) < 1e-12 else 1.0 + 1e-9
    values = []
    i = 0
    while i * resolution <= cutoff:
        values.append(round(i * resolution, 10))
        i += 1
    return [Action(x, y) for x in values for y in values]
