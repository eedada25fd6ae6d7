"""Random-search baseline, genetic algorithm, and the all-years grid-break agent.

The genetic algorithm follows fitness-proportional (roulette wheel) parent
selection: member j is drawn with probability ``f_j / sum_i f_i`` over min-max
normalized episode rewards. Crossover exchanges whole year-tuples between two
parent policies; mutation perturbs selected tuples by bounded uniform noise.

The grid-break agent drops the sequential structure entirely: it plays each of
the sixteen 0.3-resolution grid actions in every year simultaneously, tracks
the best action of each year independently, spends the last four episodes on
directional refinement around those per-year bests, and assembles the final
policy from the per-year argmaxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    HORIZON,
    Action,
    EpisodeRecord,
    Policy,
    SeededRng,
    clamp_action,
    discretize_action_space,
)
from .environments import BudgetedEnv, evaluate_policy
from .qlearning import RefinementState, initial_refinement, refine_step


@dataclass(frozen=True)
class PopulationMember:
    """A policy with its episode reward and min-max normalized fitness."""

    policy: Policy
    reward: float
    fitness: float


@dataclass(frozen=True)
class GaConfig:
    """Genetic-algorithm knobs. Defaults leave 14 of 20 episodes for children."""

    population_size: int = 6
    mutation_noise: float = 0.05
    mutation_rate: float = 0.2
    crossover_mode: str = "random"  # "random" | "ordered"
    elitist: bool = False  # restrict the roulette wheel to the top-2 members

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.mutation_noise < 0:
            raise ValueError("mutation_noise must be nonnegative")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.crossover_mode not in ("random", "ordered"):
            raise ValueError(f"unknown crossover_mode {self.crossover_mode!r}")


def normalize_fitness(rewards) -> list[float]:
    """Min-max normalize rewards to [0, 1]; all-equal populations get fitness 1."""
    rewards = [float(r) for r in rewards]
    lo, hi = min(rewards), max(rewards)
    if hi == lo:
        return [1.0] * len(rewards)
    return [(r - lo) / (hi - lo) for r in rewards]


def roulette_probabilities(population: list[PopulationMember]) -> list[float]:
    """Selection probabilities p_j = f_j / sum_i f_i over the population."""
    if not population:
        raise ValueError("population must be nonempty")
    total = sum(m.fitness for m in population)
    if total <= 0:
        raise ValueError("total fitness must be positive")
    return [m.fitness / total for m in population]


def roulette_select(population: list[PopulationMember], rng: SeededRng) -> PopulationMember:
    """Draw one member with roulette-wheel probability."""
    probs = roulette_probabilities(population)
    return population[rng.choice_index(probs)]


def random_crossover(p1: Policy, p2: Policy, rng: SeededRng) -> Policy:
    """Each year's tuple comes from p1 or p2 by an independent fair coin flip."""
    actions = tuple(
        p1.actions[i] if rng.random() < 0.5 else p2.actions[i] for i in range(HORIZON)
    )
    return Policy(actions)


def ordered_crossover(p1: Policy, p2: Policy, cut: int) -> Policy:
    """Single-point crossover: years 1..cut from p1, the rest from p2."""
    if not 1 <= cut <= HORIZON - 1:
        raise ValueError(f"cut must be in 1..{HORIZON - 1}, got {cut}")
    return Policy(p1.actions[:cut] + p2.actions[cut:])


def crossover(p1: Policy, p2: Policy, mode: str, rng: SeededRng) -> Policy:
    if mode == "random":
        return random_crossover(p1, p2, rng)
    if mode == "ordered":
        return ordered_crossover(p1, p2, rng.integers(1, HORIZON))
    raise ValueError(f"unknown crossover mode {mode!r}")


def mutate(policy: Policy, config: GaConfig, rng: SeededRng) -> Policy:
    """Perturb a random subset of tuples by uniform noise, clamped to [0, 1].

    Each tuple is selected independently with probability ``mutation_rate``;
    the selection is redrawn until at least one tuple is chosen. Selected
    coordinates move by at most ``mutation_noise`` before clamping.
    """
    while True:
        mask = [rng.random() < config.mutation_rate for _ in range(HORIZON)]
        if any(mask):
            break
    noise = config.mutation_noise
    actions = []
    for action, selected in zip(policy.actions, mask):
        if selected:
            actions.append(
                clamp_action(
                    (
                        action.itn + rng.uniform(-noise, noise),
                        action.irs + rng.uniform(-noise, noise),
                    )
                )
            )
        else:
            actions.append(action)
    return Policy(tuple(actions))


def run_random_search(env: BudgetedEnv, rng: SeededRng) -> EpisodeRecord:
    """Evaluate one uniformly-random policy per available episode; return the best."""
    best: EpisodeRecord | None = None
    for _ in range(env.budget.remaining_episodes):
        record = evaluate_policy(env, Policy.random(rng))
        if best is None or record.total > best.total:
            best = record
    return best


def run_ga(env: BudgetedEnv, config: GaConfig, rng: SeededRng) -> EpisodeRecord:
    """Seed a random generation, then breed one child per remaining episode.

    Parents are drawn by roulette wheel over the whole current population
    (or only the top-2 when ``elitist``); each child is crossover + mutation,
    evaluated immediately and appended to the population. Returns the best
    episode ever evaluated.
    """
    if config.population_size > env.budget.max_episodes:
        raise ValueError("population_size cannot exceed the episode budget")
    genomes: list[tuple[Policy, float]] = []
    best: EpisodeRecord | None = None

    def evaluate(policy: Policy) -> None:
        nonlocal best
        record = evaluate_policy(env, policy)
        genomes.append((record.policy, record.total))
        if best is None or record.total > best.total:
            best = record

    def population() -> list[PopulationMember]:
        fitnesses = normalize_fitness([reward for _, reward in genomes])
        return [
            PopulationMember(policy=p, reward=r, fitness=f)
            for (p, r), f in zip(genomes, fitnesses)
        ]

    for _ in range(min(config.population_size, env.budget.remaining_episodes)):
        evaluate(Policy.random(rng))

    while env.budget.remaining_episodes > 0:
        pool = population()
        if config.elitist and len(pool) > 2:
            # wheel restricted to the two best; they keep their population-wide
            # fitnesses so the proportional selection law is unchanged
            pool = sorted(pool, key=lambda m: m.reward, reverse=True)[:2]
            if pool[0].fitness + pool[1].fitness <= 0:
                pool = [PopulationMember(m.policy, m.reward, 1.0) for m in pool]
        parent1 = roulette_select(pool, rng)
        parent2 = roulette_select(pool, rng)
        child = mutate(
            crossover(parent1.policy, parent2.policy, config.crossover_mode, rng), config, rng
        )
        evaluate(child)
    return best


@dataclass
class GridBreakTrace:
    """Diagnostics of a grid-break run: per-year bests and their rewards."""

    best_actions: list[Action] = field(default_factory=list)
    best_rewards: list[float] = field(default_factory=list)


def run_full_sequence_break(
    env: BudgetedEnv, rng: SeededRng, trace: GridBreakTrace | None = None
) -> EpisodeRecord:
    """Grid-search every year at 0.3 resolution, refine, and assemble per-year argmaxes.

    Episodes 1-16 play grid action e in all five years at once; per-year bests
    are tracked independently. Episodes 17-20 run the directional refinement
    rule in all years simultaneously, each around its own best. The returned
    record re-uses the recorded per-year best rewards (no extra budget), so its
    total is the sum of per-year maxima as observed, not a re-evaluation.
    """
    grid = discretize_action_space(0.3)
    best_action = [grid[0]] * HORIZON
    best_reward = [float("-inf")] * HORIZON

    def observe(year_index: int, action: Action, reward: float) -> None:
        if reward > best_reward[year_index]:
            best_reward[year_index] = reward
            best_action[year_index] = action

    for grid_action in grid:
        env.reset()
        for year_index in range(HORIZON):
            result = env.step(grid_action)
            observe(year_index, grid_action, result.reward)

    states: list[RefinementState] = [
        initial_refinement(best_action[i], rng) for i in range(HORIZON)
    ]
    while env.budget.remaining_episodes > 0:
        env.reset()
        for year_index in range(HORIZON):
            probe = states[year_index].a_next
            result = env.step(probe)
            improved = result.reward > best_reward[year_index]
            states[year_index] = refine_step(
                states[year_index], result.reward, best_reward[year_index], rng
            )
            if improved:
                observe(year_index, probe, result.reward)

    if trace is not None:
        trace.best_actions = list(best_action)
        trace.best_rewards = list(best_reward)
    return EpisodeRecord.from_rewards(Policy(tuple(best_action)), best_reward)
