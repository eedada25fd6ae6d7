"""Gaussian-process surrogates with UCB acquisition, and the three BO agents.

The per-year agent walks an exploration frontier through the years; the joint
agent models the full 10-D policy; the ensemble agent blends a per-year and a
joint surrogate of the first two years through two learned weights.
"""

import numpy as np

from scarce_rl import (
    BoConfig,
    SeededRng,
    UcbParams,
    build_env,
    default_env_a,
    gp_fit,
    gp_predict,
    run_bo_ensemble,
    run_bo_joint,
    run_bo_per_year,
    ucb_acquire,
)
from scarce_rl.bayesopt import two_year_subreward, weight_stabilization_episode, year1_ucb_diagnostic

# --- the surrogate itself -------------------------------------------------
observations = [[0.2, 0.2], [0.5, 0.8], [0.9, 0.4]]
rewards = [12.0, 85.0, 40.0]
model = gp_fit(observations, rewards)
mean, std = gp_predict(model, [0.5, 0.75])
print(f"posterior near the best observation: mean {mean:.1f}, std {std:.1f}")

candidates = np.array([[x, y] for x in np.linspace(0, 1, 21) for y in np.linspace(0, 1, 21)])
print("exploitative pick:", ucb_acquire(model, candidates, UcbParams(kappa=0.5)))
print("exploratory pick: ", ucb_acquire(model, candidates, UcbParams(kappa=2.5)))

# --- unbudgeted year-1 exploration ----------------------------------------
config = default_env_a()
trace = year1_ucb_diagnostic(config, queries=30)
best_action, best_reward = max(trace, key=lambda t: t[1])
print(f"\n30 UCB queries on year 1 find {best_action.as_tuple()} worth {best_reward:.1f}")

# --- the three budgeted agents ---------------------------------------------
for name, runner in [("per-year", run_bo_per_year), ("joint 10-D", run_bo_joint)]:
    env = build_env(config)
    best = runner(env, BoConfig(), SeededRng(0))
    print(f"BO {name}: best total {best.total:.1f} in {env.budget.used_episodes} episodes")

env = build_env(config)
history = []
best = run_bo_ensemble(env, BoConfig(), SeededRng(0), weight_history=history)
episode = weight_stabilization_episode(history)
final = history[-1][1]
print(f"BO ensemble: best two-year sub-reward {two_year_subreward(best):.1f}; "
      f"weights settle to ({final.w0:.2f}, {final.w1:.2f}) by episode {episode}")
