"""Bayesian-optimization agents: per-year greedy, joint 10-D, and the boosting ensemble.

Three architectures share the same GP + UCB machinery:

* :func:`run_bo_per_year` keeps one 2-D GP per year and optimizes the years
  greedily: year 1 exploits early, an exploration frontier advances through
  the later years as their surrogates accumulate observations.
* :func:`run_bo_joint` fits a single GP over the full 10-D policy vector and
  acquires whole policies by UCB over a fresh batch of random candidates.
* :func:`run_bo_ensemble` blends a per-year predictor and a joint predictor of
  the first two years' sub-reward through two scalar weights, refit every
  couple of episodes by exhaustive least-MSE grid search. Years 3-5 play a
  fixed filler action; the returned record is the episode with the best
  two-year sub-reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    HORIZON,
    Action,
    EpisodeRecord,
    Policy,
    SeededRng,
    discretize_action_space,
)
from .environments import (
    BudgetedEnv,
    EnvConfigA,
    EnvConfigB,
    evaluate_policy,
    year_reward_a,
    year_reward_b,
)
from .gp import GpHyperparams, GpModel, UcbParams, gp_fit, ucb_scores

#: Filler action played in years the ensemble agent does not model.
ENSEMBLE_FILLER = Action(0.5, 0.5)


@dataclass(frozen=True)
class BoConfig:
    """Hyper-parameters shared by the three BO agents.

    ``lengthscale`` applies to 2-D per-year surrogates; higher-dimensional
    surrogates use ``lengthscale_joint`` (distances grow with dimension).
    """

    lengthscale: float = 0.25
    lengthscale_joint: float = 0.5
    variance: float = 1.0
    jitter: float = 1e-8
    kappa_explore: float = 2.5
    kappa_exploit: float = 0.5
    candidate_grid_resolution: float = 0.05
    candidate_count: int = 2048
    filler: str = "random"  # "random" | "incumbent" for years past the frontier
    frontier_min_observations: int = 4
    phase1_episodes: int = 3
    refit_every: int = 2
    weight_grid_step: float = 0.02
    # ensemble agent: surrogate-scoring warm-up, exploration decay, and the
    # incremental-retraining character of weight updates. A refit only moves
    # the deployed weights when it improves their MSE by more than the
    # relative tolerance (the blend-weight MSE surface has a near-flat
    # valley, so chasing its exact argmin is chasing noise), and accepted
    # moves follow a decaying step size d0 / (1 + k) over refits k.
    score_warmup_observations: int = 3
    kappa_decay_episodes: int = 12
    weight_damping: float = 0.35
    weight_update_tolerance: float = 0.1

    def __post_init__(self) -> None:
        if self.filler not in ("random", "incumbent"):
            raise ValueError(f"unknown filler mode {self.filler!r}")
        if self.candidate_count < 1 or self.refit_every < 1 or self.phase1_episodes < 0:
            raise ValueError(
                "candidate_count and refit_every must be positive, phase1_episodes nonnegative"
            )

    def hyperparams(self, dim: int = 2) -> GpHyperparams:
        lengthscale = self.lengthscale if dim <= 2 else self.lengthscale_joint
        return GpHyperparams(lengthscale=lengthscale, variance=self.variance, jitter=self.jitter)


@dataclass(frozen=True)
class BoostingWeights:
    """The two ensemble blend weights and the MSE they achieved on the fit data."""

    w0: float
    w1: float
    mse: float


def fit_boosting_weights(observations, model_a, model_b, step: float = 0.02) -> BoostingWeights:
    """Exhaustive least-MSE fit of the two blend weights over [0, 1]^2.

    ``observations`` is a ``(points, targets)`` pair; ``model_a`` / ``model_b``
    are predictors exposing ``predict(points) -> (mean, std)``. The grid is
    walked in ascending (w0, w1) order with a strict improvement rule, so ties
    resolve to the lexicographically smallest weights. Per-cell MSE uses exact
    summation, making the result invariant to observation order.
    """
    points, targets = observations
    points = np.atleast_2d(np.asarray(points, dtype=float))
    targets = np.asarray(targets, dtype=float).ravel()
    if targets.size < 2:
        raise ValueError("fitting the blend weights needs at least 2 observations")
    pred_a = model_a.predict(points)[0]
    pred_b = model_b.predict(points)[0]
    values = [round(i * step, 10) for i in range(int(round(1.0 / step)) + 1)]
    best: tuple[float, float, float] | None = None
    for w0 in values:
        for w1 in values:
            errors = w0 * pred_a + w1 * pred_b - targets
            mse = math.fsum(float(e) * float(e) for e in errors) / targets.size
            if best is None or mse < best[2]:
                best = (w0, w1, mse)
    return BoostingWeights(*best)


class PairwisePredictor:
    """Per-year composite: predicts a two-year sub-reward as the sum of two 2-D GPs."""

    def __init__(self, gp_year1: GpModel, gp_year2: GpModel):
        self.gp_year1 = gp_year1
        self.gp_year2 = gp_year2

    def predict(self, points) -> tuple[np.ndarray, np.ndarray]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m1, s1 = self.gp_year1.predict(points[:, :2])
        m2, s2 = self.gp_year2.predict(points[:, 2:])
        return m1 + m2, np.sqrt(s1**2 + s2**2)


class FixedPredictions:
    """Predictor stub returning precomputed per-observation means (std 0).

    Used to feed held-out predictions into the weight fit: in-sample GP
    predictions interpolate their targets almost exactly, which would
    collapse the MSE surface onto the degenerate valley w0 + w1 = 1.
    """

    def __init__(self, means):
        self.means = np.asarray(means, dtype=float)

    def predict(self, points) -> tuple[np.ndarray, np.ndarray]:
        return self.means, np.zeros_like(self.means)


def _random_action(rng: SeededRng) -> Action:
    return Action(rng.uniform(), rng.uniform())


def _fit_or_prior(points: list, targets: list, hyperparams: GpHyperparams, dim: int) -> GpModel:
    if not points:
        return GpModel.prior(dim, hyperparams)
    return gp_fit(np.asarray(points, dtype=float), np.asarray(targets, dtype=float), hyperparams)


def run_bo_per_year(env: BudgetedEnv, config: BoConfig, rng: SeededRng) -> EpisodeRecord:
    """Greedy per-year BO: optimize year 1 first, then walk a frontier outward.

    Phase 1 (``phase1_episodes`` episodes) queries year 1 by exploratory UCB
    while later years play filler actions; every step's reward is recorded as
    an observation for its year. Phase 2 plays low-kappa UCB for the years
    behind the frontier, exploratory UCB at the frontier, and filler beyond
    it; the frontier advances one year whenever its surrogate holds at least
    ``frontier_min_observations`` points. Returns the best episode.
    """
    candidates = np.array(
        [a.as_array() for a in discretize_action_space(config.candidate_grid_resolution)]
    )
    hp = config.hyperparams(dim=2)
    obs_points: list[list[np.ndarray]] = [[] for _ in range(HORIZON)]
    obs_rewards: list[list[float]] = [[] for _ in range(HORIZON)]
    incumbents: list[Action | None] = [None] * HORIZON
    incumbent_rewards = [float("-inf")] * HORIZON
    best: EpisodeRecord | None = None
    explore = UcbParams(config.kappa_explore)
    exploit = UcbParams(config.kappa_exploit)

    def ucb_action(year_index: int, params: UcbParams) -> Action:
        model = _fit_or_prior(obs_points[year_index], obs_rewards[year_index], hp, dim=2)
        point = candidates[int(np.argmax(ucb_scores(model, candidates, params)))]
        return Action(float(point[0]), float(point[1]))

    def filler_action(year_index: int) -> Action:
        if config.filler == "incumbent" and incumbents[year_index] is not None:
            return incumbents[year_index]
        return _random_action(rng)

    def record_observation(year_index: int, action: Action, reward: float) -> None:
        obs_points[year_index].append(action.as_array())
        obs_rewards[year_index].append(reward)
        if reward > incumbent_rewards[year_index]:
            incumbent_rewards[year_index] = reward
            incumbents[year_index] = action

    episode_index = 0
    frontier = 1  # 0-based year index of the exploration frontier in phase 2
    while env.budget.remaining_episodes > 0:
        in_phase1 = episode_index < config.phase1_episodes
        if not in_phase1 and frontier < HORIZON - 1:
            if len(obs_rewards[frontier]) >= config.frontier_min_observations:
                frontier += 1
        env.reset()
        actions: list[Action] = []
        rewards: list[float] = []
        for year_index in range(HORIZON):
            if in_phase1:
                action = ucb_action(0, explore) if year_index == 0 else filler_action(year_index)
            elif year_index < frontier:
                action = ucb_action(year_index, exploit)
            elif year_index == frontier:
                action = ucb_action(year_index, explore)
            else:
                action = filler_action(year_index)
            reward = env.step(action).reward
            record_observation(year_index, action, reward)
            actions.append(action)
            rewards.append(reward)
        record = EpisodeRecord.from_rewards(Policy(tuple(actions)), rewards)
        if best is None or record.total > best.total:
            best = record
        episode_index += 1
    return best


def year1_ucb_diagnostic(
    env_config: EnvConfigA | EnvConfigB,
    queries: int = 30,
    config: BoConfig = BoConfig(),
) -> list[tuple[Action, float]]:
    """Unbudgeted year-1 exploration: the per-year agent's phase-1 loop in isolation.

    Queries the year-1 reward surface directly (no episodes, no budget) with
    exploratory UCB over the candidate grid and returns the (action, reward)
    sequence; the incumbent is the max-reward entry. Deterministic for
    noise-free configs.
    """
    candidates = np.array(
        [a.as_array() for a in discretize_action_space(config.candidate_grid_resolution)]
    )
    hp = config.hyperparams(dim=2)
    explore = UcbParams(config.kappa_explore)

    def year1_reward(action: Action) -> float:
        if isinstance(env_config, EnvConfigB):
            return year_reward_b(1, action, [], env_config)
        return year_reward_a(1, action, None, env_config)

    points: list[np.ndarray] = []
    rewards: list[float] = []
    trace: list[tuple[Action, float]] = []
    for _ in range(queries):
        model = _fit_or_prior(points, rewards, hp, dim=2)
        point = candidates[int(np.argmax(ucb_scores(model, candidates, explore)))]
        action = Action(float(point[0]), float(point[1]))
        reward = year1_reward(action)
        points.append(action.as_array())
        rewards.append(reward)
        trace.append((action, reward))
    return trace


def run_bo_joint(env: BudgetedEnv, config: BoConfig, rng: SeededRng) -> EpisodeRecord:
    """Joint 10-D BO: the surrogate maps full policies to total episode reward.

    The first 5 episodes are uniform random policies; each later episode
    acquires the UCB argmax over a fresh batch of ``candidate_count`` random
    policy vectors. Returns the best episode.
    """
    hp = config.hyperparams(dim=2 * HORIZON)
    explore = UcbParams(config.kappa_explore)
    points: list[np.ndarray] = []
    totals: list[float] = []
    best: EpisodeRecord | None = None
    seed_episodes = 5
    episode_index = 0
    while env.budget.remaining_episodes > 0:
        if episode_index < seed_episodes:
            policy = Policy.random(rng)
        else:
            model = gp_fit(np.asarray(points), np.asarray(totals), hp)
            batch = rng.uniform(size=(config.candidate_count, 2 * HORIZON))
            vector = batch[int(np.argmax(ucb_scores(model, batch, explore)))]
            policy = Policy(
                tuple(Action(float(vector[2 * i]), float(vector[2 * i + 1])) for i in range(HORIZON))
            )
        record = evaluate_policy(env, policy)
        points.append(np.concatenate([a.as_array() for a in policy]))
        totals.append(record.total)
        if best is None or record.total > best.total:
            best = record
        episode_index += 1
    return best


def two_year_subreward(record: EpisodeRecord) -> float:
    return record.yearly_rewards[0] + record.yearly_rewards[1]


def run_bo_ensemble(
    env: BudgetedEnv,
    config: BoConfig,
    rng: SeededRng,
    weight_history: list[tuple[int, BoostingWeights]] | None = None,
) -> EpisodeRecord:
    """Two-year proof-of-concept ensemble of per-year and joint surrogates.

    Maintains 2-D GPs for years 1 and 2 plus a joint 4-D GP over the action
    pair; every ``refit_every`` episodes the blend weights are refit by
    exhaustive MSE minimization. Each observation scores the two surrogates
    out-of-sample: its predictions are made once, on arrival, by the models
    fit on strictly earlier data, then frozen (prequential scoring). That
    keeps the weight fit honest (in-sample GP predictions interpolate their
    targets, collapsing the MSE valley) and lets the weights settle as
    evidence accumulates. Acquisition maximizes ``w0 * UCB_per_year +
    w1 * UCB_joint`` over random candidate pairs. Years 3-5 play the fixed
    filler action. Returns the episode with the best two-year sub-reward;
    ``weight_history``, when given, collects ``(episode_number, weights)``
    after each refit.
    """
    hp2 = config.hyperparams(dim=2)
    hp4 = config.hyperparams(dim=4)
    pair_points: list[np.ndarray] = []
    pair_targets: list[float] = []
    y1_rewards: list[float] = []
    y2_rewards: list[float] = []
    held_out_a: list[float] = []  # frozen out-of-sample predictions, by arrival
    held_out_b: list[float] = []
    held_out_points: list[np.ndarray] = []
    held_out_targets: list[float] = []
    weights = BoostingWeights(0.5, 0.5, float("nan"))  # neutral blend before the first fit
    best: EpisodeRecord | None = None
    episode_index = 0
    refit_count = 0

    def fit_models():
        points = np.asarray(pair_points)
        gp_y1 = gp_fit(points[:, :2], np.asarray(y1_rewards), hp2)
        gp_y2 = gp_fit(points[:, 2:], np.asarray(y2_rewards), hp2)
        gp_joint = gp_fit(points, np.asarray(pair_targets), hp4)
        return PairwisePredictor(gp_y1, gp_y2), gp_joint

    def kappa(e: int) -> UcbParams:
        # anneal exploration so late observations land where the surrogates
        # already agree, letting the blend weights settle
        frac = min(e / max(config.kappa_decay_episodes, 1), 1.0)
        return UcbParams(config.kappa_explore + (config.kappa_exploit - config.kappa_explore) * frac)

    while env.budget.remaining_episodes > 0:
        if len(pair_targets) < 2:
            pair = np.array([rng.uniform() for _ in range(4)])
        else:
            per_year, gp_joint = fit_models()
            params = kappa(episode_index)
            batch = rng.uniform(size=(config.candidate_count, 4))
            scores = weights.w0 * ucb_scores(per_year, batch, params) + weights.w1 * ucb_scores(
                gp_joint, batch, params
            )
            pair = batch[int(np.argmax(scores))]
        action1 = Action(float(pair[0]), float(pair[1]))
        action2 = Action(float(pair[2]), float(pair[3]))

        scored = len(pair_points) >= config.score_warmup_observations
        if scored:  # score the incoming observation before absorbing it
            per_year, gp_joint = fit_models()
            held_out_a.append(float(per_year.predict(pair.reshape(1, -1))[0][0]))
            held_out_b.append(float(gp_joint.predict(pair.reshape(1, -1))[0][0]))
            held_out_points.append(pair.copy())

        env.reset()
        actions = [action1, action2] + [ENSEMBLE_FILLER] * (HORIZON - 2)
        rewards = [env.step(a).reward for a in actions]
        record = EpisodeRecord.from_rewards(Policy(tuple(actions)), rewards)
        pair_points.append(np.concatenate([action1.as_array(), action2.as_array()]))
        y1_rewards.append(rewards[0])
        y2_rewards.append(rewards[1])
        pair_targets.append(rewards[0] + rewards[1])
        if scored:
            held_out_targets.append(rewards[0] + rewards[1])
        if best is None or two_year_subreward(record) > two_year_subreward(best):
            best = record
        episode_index += 1

        if episode_index % config.refit_every == 0 and len(held_out_targets) >= 2:
            pred_a = np.asarray(held_out_a)
            pred_b = np.asarray(held_out_b)
            targets = np.asarray(held_out_targets)
            fitted = fit_boosting_weights(
                (np.asarray(held_out_points), targets),
                FixedPredictions(pred_a),
                FixedPredictions(pred_b),
                step=config.weight_grid_step,
            )
            errors = weights.w0 * pred_a + weights.w1 * pred_b - targets
            current_mse = math.fsum(float(e) * float(e) for e in errors) / targets.size
            if current_mse > fitted.mse * (1.0 + config.weight_update_tolerance):
                d = config.weight_damping / (1.0 + refit_count)
                weights = BoostingWeights(
                    w0=weights.w0 + d * (fitted.w0 - weights.w0),
                    w1=weights.w1 + d * (fitted.w1 - weights.w1),
                    mse=fitted.mse,
                )
            else:
                weights = BoostingWeights(weights.w0, weights.w1, current_mse)
            refit_count += 1
            if weight_history is not None:
                weight_history.append((episode_index, weights))
    return best


def weight_stabilization_episode(
    weight_history: list[tuple[int, BoostingWeights]], threshold: float = 0.05
) -> int | None:
    """First episode from which every later refit moves the weights < threshold.

    Returns None when the trajectory never settles (or has no refits).
    """
    if not weight_history:
        return None
    if len(weight_history) == 1:
        return weight_history[0][0]
    deltas = []
    for (_, prev), (episode, cur) in zip(weight_history, weight_history[1:]):
        deltas.append((episode, max(abs(cur.w0 - prev.w0), abs(cur.w1 - prev.w1))))
    for i, (episode, _) in enumerate(deltas):
        if all(d < threshold for _, d in deltas[i:]):
            return episode
    return None
