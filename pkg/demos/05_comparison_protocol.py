"""The evaluation protocol: repeated fresh runs and baseline-relative tables.

Every agent runs 10 times with paired seeds, 20 episodes each, no knowledge
transfer between runs. The table reports each agent's mean best reward as a
percentage of the random-search baseline.
"""

from scarce_rl import ExperimentSpec, compare_agents
from scarce_rl.harness import export_comparison, format_comparison_table

SEEDS = tuple(range(10))


def spec(agent, env):
    return ExperimentSpec(env=env, agent=agent, runs=len(SEEDS), seeds=SEEDS)


for env in ("env_a", "env_b"):
    table = compare_agents(
        [
            spec("random_search", env),
            spec("full_seq_break", env),
            spec("genetic", env),
            spec("qlearning", env),
            spec("qlearning_seq_break", env),
        ]
    )
    print(f"\n=== {env} (10 runs x 20 episodes, paired seeds) ===")
    print(format_comparison_table(table))
    path = export_comparison(table, f"comparison_{env}.csv")
    print(f"wrote {path}")
