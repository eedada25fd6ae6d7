"""Random search and the genetic algorithm under the 20-episode budget.

Random search spends all 20 episodes on independent uniform policies. The
genetic algorithm seeds 6 random policies and breeds the remaining 14 by
roulette-wheel selection, crossover, and bounded mutation.
"""

from scarce_rl import (
    GaConfig,
    SeededRng,
    build_env,
    default_env_b,
    run_ga,
    run_random_search,
)

config = default_env_b()

env = build_env(config)
best_random = run_random_search(env, SeededRng(7))
print(f"random search: best total {best_random.total:.1f} "
      f"({env.budget.used_evaluations} evaluations, {env.budget.used_episodes} episodes)")

env = build_env(config)
best_ga = run_ga(env, GaConfig(), SeededRng(7))
print(f"genetic algorithm: best total {best_ga.total:.1f} "
      f"({env.budget.used_evaluations} evaluations, {env.budget.used_episodes} episodes)")

print("\nbest GA policy (one intervention pair per year):")
for year, action in enumerate(best_ga.policy, start=1):
    print(f"  year {year}: itn={action.itn:.3f} irs={action.irs:.3f}")

# elitist mode restricts the wheel to the two best members
env = build_env(config)
best_elitist = run_ga(env, GaConfig(elitist=True), SeededRng(7))
print(f"\nelitist variant: best total {best_elitist.total:.1f}")
