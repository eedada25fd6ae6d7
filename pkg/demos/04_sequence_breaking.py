"""Tabular Q-learning and the sequence-breaking agent, step by step.

Plain Q-learning struggles at 20 episodes. Breaking year 1 out of the
credit-assignment problem - a 4x4 grid search plus directional refinement,
20 evaluations in total - pins a strong first-year action and leaves 16
episodes of epsilon-greedy learning for years 2-5.
"""

from scarce_rl import (
    Budget,
    QConfig,
    SeededRng,
    build_env,
    default_env_a,
    first_year_search,
    run_plain_qlearning,
    run_qlearning_seq_break,
    year_reward_a,
)
from scarce_rl.qlearning import QTable, epsilon_schedule, greedy_rollout

config = default_env_a()

# --- phase 1 in isolation ---------------------------------------------------
env = build_env(config)
a_max, used = first_year_search(env, QConfig(), SeededRng(1))
print(f"first-year search: a_max {a_max.as_tuple()} after {used} evaluations "
      f"(year-1 reward {year_reward_a(1, a_max, None, config):.1f})")

print("phase-2 exploration schedule:",
      [round(epsilon_schedule(e), 3) for e in (0, 4, 8, 12, 15)])

# --- the two budgeted agents -------------------------------------------------
env = build_env(config)
best_plain = run_plain_qlearning(env, QConfig(), SeededRng(1))
print(f"plain Q-learning (20 episodes): best total {best_plain.total:.1f}")

env = build_env(config)
policy = run_qlearning_seq_break(env, QConfig(), SeededRng(1))
print(f"sequence breaking: year-1 action pinned to {policy.actions[0].as_tuple()}")
print(f"  returned policy: {policy.to_json()}")
print(f"  budget at exit: {env.budget.used_evaluations} evaluations")

# --- given enough episodes, plain Q-learning converges -----------------------
env = build_env(config, budget=Budget(max_evaluations=1000, max_episodes=200))
table = QTable()
best_long = run_plain_qlearning(env, QConfig(), SeededRng(1), episodes=200, table=table)
print(f"\nplain Q-learning at 200 episodes: best total {best_long.total:.1f}")
print("greedy rollout:", [a.as_tuple() for a in greedy_rollout(table)])
