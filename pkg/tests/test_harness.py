import json

import numpy as np
import pytest

from scarce_rl.core import Action
from scarce_rl.environments import EnvConfigA, default_env_a, default_env_b
from scarce_rl.harness import (
    AGENTS,
    ExperimentSpec,
    compare_agents,
    export_comparison,
    export_landscape,
    export_results,
    format_comparison_table,
    landscape_scan,
    load_results,
    result_from_dict,
    result_to_dict,
    run_experiment,
)

ZERO_CONFIG = EnvConfigA(years=((),) * 5)


def spec(agent="random_search", runs=3, seeds=(0, 1, 2), env="env_a", **kwargs):
    return ExperimentSpec(env=env, agent=agent, runs=runs, seeds=seeds, **kwargs)


class TestExperimentSpec:
    def test_seed_count_must_match_runs(self):
        with pytest.raises(ValueError):
            ExperimentSpec(env="env_a", agent="random_search", runs=3, seeds=(1,))

    def test_unknown_agent(self):
        with pytest.raises(ValueError):
            ExperimentSpec(env="env_a", agent="simulated_annealing", runs=1, seeds=(0,))

    def test_default_seeds_fill_range(self):
        s = ExperimentSpec(env="env_a", agent="random_search", runs=4)
        assert s.seeds == (0, 1, 2, 3)

    def test_json_round_trip(self, tmp_path):
        s = spec(agent="qlearning", agent_config={"gamma": 0.8})
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(s.to_dict()))
        assert ExperimentSpec.from_json(path) == s

    def test_overrides(self):
        s = spec(runs=10, seeds=tuple(range(10)))
        assert s.with_overrides(runs=2).runs == 2
        assert s.with_overrides(seed=42, runs=3).seeds == (42, 43, 44)
        assert s.with_overrides(episodes=5).episodes == 5


class TestRunExperiment:
    def test_single_run_stats(self):
        result = run_experiment(spec(runs=1, seeds=(7,)))
        assert result.row.std_best_reward == 0.0
        assert result.row.mean_best_reward == result.results[0].best.total

    def test_rerun_bitwise_identical(self):
        results = [run_experiment(spec()) for _ in range(2)]
        assert results[0] == results[1]

    def test_baseline_pct_is_100(self):
        result = run_experiment(spec())
        assert result.row.pct_of_baseline == 100.0

    def test_non_baseline_pct_unset_without_reference(self):
        result = run_experiment(spec(agent="qlearning"))
        assert result.row.pct_of_baseline is None

    def test_fresh_env_and_agent_per_run(self):
        # permuting the seed order permutes the per-run bests with it
        forward = run_experiment(spec(seeds=(0, 1, 2)))
        backward = run_experiment(spec(seeds=(2, 1, 0)))
        assert [r.best.total for r in forward.results] == [
            r.best.total for r in reversed(backward.results)
        ]

    def test_parallel_equals_sequential(self):
        sequential = run_experiment(spec(runs=4, seeds=(0, 1, 2, 3)))
        parallel = run_experiment(spec(runs=4, seeds=(0, 1, 2, 3)), parallel=True)
        assert sequential == parallel

    def test_budget_respected_by_every_agent(self):
        for agent in AGENTS:
            result = run_experiment(
                ExperimentSpec(env="env_a", agent=agent, runs=1, seeds=(0,))
            )
            assert result.results[0].evaluations_used <= 100

    def test_custom_env_config_file(self, tmp_path):
        import json as json_module

        from scarce_rl.environments import config_to_dict

        path = tmp_path / "custom_env.json"
        path.write_text(json_module.dumps(config_to_dict(default_env_b())))
        result = run_experiment(
            ExperimentSpec(env=str(path), agent="random_search", runs=2, seeds=(0, 1))
        )
        reference = run_experiment(spec(runs=2, seeds=(0, 1), env="env_b"))
        assert result.best_totals == reference.best_totals


class TestCompareAgents:
    def test_requires_baseline(self):
        with pytest.raises(ValueError):
            compare_agents([spec(agent="qlearning")])

    def test_requires_shared_env_and_seeds(self):
        with pytest.raises(ValueError):
            compare_agents([spec(), spec(env="env_b")])
        with pytest.raises(ValueError):
            compare_agents([spec(), spec(agent="qlearning", seeds=(5, 6, 7))])

    def test_identical_agents_equal_rows(self):
        table = compare_agents([spec(), spec(agent="qlearning"), spec(agent="qlearning")])
        assert table.rows[1].mean_best_reward == table.rows[2].mean_best_reward
        assert table.rows[1].pct_of_baseline == table.rows[2].pct_of_baseline

    def test_baseline_row_exactly_100(self):
        table = compare_agents([spec()])
        assert table.rows[0].pct_of_baseline == 100.0

    def test_table_format_has_expected_columns(self):
        table = compare_agents([spec(), spec(agent="full_seq_break")])
        text = format_comparison_table(table)
        assert "agent" in text and "% of baseline" in text
        assert "full_seq_break" in text


class TestLandscapeScan:
    def test_forty_by_forty_grid(self):
        matrix = landscape_scan(default_env_a(), year=1, grid_n=40)
        assert matrix.shape == (40, 40)
        assert matrix.size == 1600

    def test_zero_surface_all_zeros(self):
        matrix = landscape_scan(ZERO_CONFIG, year=3, grid_n=10)
        assert np.all(matrix == 0.0)

    def test_default_year1_max_range(self):
        matrix = landscape_scan(default_env_a(), year=1, grid_n=40)
        assert 104.5 <= matrix.max() <= 115.5

    def test_scale_display_divides_by_100(self):
        raw = landscape_scan(default_env_a(), year=1, grid_n=10)
        scaled = landscape_scan(default_env_a(), year=1, grid_n=10, scale_display=True)
        assert np.array_equal(scaled, raw / 100.0)

    def test_minimum_grid(self):
        assert landscape_scan(ZERO_CONFIG, year=1, grid_n=2).shape == (2, 2)
        with pytest.raises(ValueError):
            landscape_scan(ZERO_CONFIG, year=1, grid_n=1)

    def test_context_defaults_to_center(self):
        config = default_env_a()
        default = landscape_scan(config, year=2, grid_n=8)
        explicit = landscape_scan(config, year=2, grid_n=8, context=[Action(0.5, 0.5)])
        assert np.array_equal(default, explicit)

    def test_env_b_uses_history_mean(self):
        config = default_env_b()
        near = landscape_scan(config, year=3, grid_n=8, context=[Action(0.3, 0.6)] * 2)
        far = landscape_scan(config, year=3, grid_n=8, context=[Action(0.9, 0.9)] * 2)
        assert not np.array_equal(near, far)


class TestExports:
    def test_csv_shape_and_rerun_bytes(self, tmp_path):
        result = run_experiment(spec(runs=10, seeds=tuple(range(10))))
        path_a = export_results(result, tmp_path / "a.csv")
        path_b = export_results(result, tmp_path / "b.csv")
        lines = path_a.read_text().splitlines()
        assert len(lines) == 11  # header + one row per run
        assert lines[0] == (
            "agent,env,run,seed,best_total,reward_y1,reward_y2,reward_y3,"
            "reward_y4,reward_y5,evaluations_used"
        )
        assert path_a.read_bytes() == path_b.read_bytes()

    def test_json_round_trip(self, tmp_path):
        result = run_experiment(spec())
        path = export_results(result, tmp_path / "r.json", format="json")
        assert load_results(path) == result

    def test_dict_round_trip(self):
        result = run_experiment(spec(agent="genetic"))
        assert result_from_dict(result_to_dict(result)) == result

    def test_landscape_export_rows(self, tmp_path):
        matrix = landscape_scan(default_env_a(), year=1, grid_n=5)
        path = export_landscape(matrix, tmp_path / "scan.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,reward"
        assert len(lines) == 1 + 25

    def test_comparison_export(self, tmp_path):
        table = compare_agents([spec()])
        csv_path = export_comparison(table, tmp_path / "cmp.csv")
        assert "agent,mean_best_reward" in csv_path.read_text().splitlines()[0]
        json_path = export_comparison(table, tmp_path / "cmp.json", format="json")
        payload = json.loads(json_path.read_text())
        assert payload["rows"][0]["pct_of_baseline"] == 100.0

    def test_unknown_format(self, tmp_path):
        result = run_experiment(spec())
        with pytest.raises(ValueError):
            export_results(result, tmp_path / "x.yaml", format="yaml")

    def test_unwritable_path_raises_io_error(self, tmp_path):
        result = run_experiment(spec())
        with pytest.raises(OSError):
            export_results(result, tmp_path / "missing" / "dir" / "x.csv")
