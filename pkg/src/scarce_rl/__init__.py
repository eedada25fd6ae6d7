"""Budget-constrained policy search on synthetic five-year intervention simulators.

A small numpy/scipy library providing:

* two synthetic episodic environments with Gaussian-mixture reward surfaces
  and a hard budget of 100 step evaluations / 20 episodes,
* four agent families built for that regime: random search, a genetic
  algorithm, Gaussian-process Bayesian optimization (per-year, joint 10-D,
  and a two-weight boosting ensemble), and tabular Q-learning with
  sequence breaking,
* an experiment harness with paired-seed comparison tables and landscape
  scans, and
* an HTTP oracle service replaying the budget contract over the wire.
"""

from .bayesopt import (
    BoConfig,
    BoostingWeights,
    fit_boosting_weights,
    run_bo_ensemble,
    run_bo_joint,
    run_bo_per_year,
)
from .core import (
    HORIZON,
    Action,
    Budget,
    BudgetExhaustedError,
    BudgetSnapshot,
    EpisodeDoneError,
    EpisodeRecord,
    PartialPolicy,
    Policy,
    SeededRng,
    clamp_action,
    discretize_action_space,
)
from .environments import (
    BudgetedEnv,
    EnvA,
    EnvB,
    EnvConfigA,
    EnvConfigB,
    EnvironmentModel,
    GaussianBump,
    build_env,
    default_env_a,
    default_env_b,
    evaluate_policy,
    load_env_config,
    resolve_env_config,
    year_reward_a,
    year_reward_b,
)
from .evolutionary import (
    GaConfig,
    PopulationMember,
    crossover,
    mutate,
    roulette_probabilities,
    roulette_select,
    run_full_sequence_break,
    run_ga,
    run_random_search,
)
from .gp import GpHyperparams, GpModel, GpNumericalError, UcbParams, gp_fit, gp_predict, ucb_acquire
from .harness import (
    ComparisonRow,
    ExperimentSpec,
    compare_agents,
    export_results,
    landscape_scan,
    run_experiment,
)
from .qlearning import (
    QConfig,
    QTable,
    RefinementState,
    epsilon_greedy,
    epsilon_schedule,
    first_year_search,
    q_update,
    refine_step,
    run_plain_qlearning,
    run_qlearning_seq_break,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
