"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Every tolerance is pinned here, not configurable.

Known limitation: criterion 8's env_b clause requires the genetic algorithm to
strictly beat random search. Measurement shows the two are statistically tied
on Gaussian-mixture surfaces at the pinned GA mechanics (population 6,
mutation noise 0.05), so that clause fails; see README "Known limitations".
"""

import math
import threading

import numpy as np
import pytest

from scarce_rl.bayesopt import (
    BoConfig,
    FixedPredictions,
    fit_boosting_weights,
    run_bo_ensemble,
    weight_stabilization_episode,
)
from scarce_rl.core import Action, Policy, SeededRng
from scarce_rl.environments import build_env, default_env_a, default_env_b
from scarce_rl.evolutionary import PopulationMember, roulette_probabilities, roulette_select
from scarce_rl.gp import GpHyperparams, UcbParams, gp_fit, gp_predict, ucb_acquire
from scarce_rl.harness import AGENTS, ExperimentSpec, export_results, landscape_scan, run_experiment
from scarce_rl.qlearning import (
    QConfig,
    QTable,
    RefinementState,
    epsilon_schedule,
    first_year_search,
    q_update,
    refine_step,
)

SEEDS = tuple(range(30))


def report(number: int, description: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"\n[criterion {number:02d}] {status} - {description}{suffix}")


def agent_best_totals(env_id: str, agent: str, seeds=SEEDS, config=None):
    totals = []
    for seed in seeds:
        env = build_env(default_env_a() if env_id == "env_a" else default_env_b())
        totals.append(AGENTS[agent](env, SeededRng(seed), config or {}).total)
    return np.array(totals)


def test_criterion_01_budget_law():
    """Every agent respects 100 evaluations / 20 episodes on both default envs."""
    exhausting = {"random_search", "genetic", "qlearning_seq_break"}
    ok = True
    for env_id in ("env_a", "env_b"):
        config = default_env_a() if env_id == "env_a" else default_env_b()
        for agent in AGENTS:
            for seed in SEEDS:
                env = build_env(config)
                AGENTS[agent](env, SeededRng(seed), {})
                budget = env.budget
                ok &= budget.used_evaluations <= 100 and budget.used_episodes <= 20
                if agent in exhausting:
                    ok &= budget.used_evaluations == 100 and budget.used_episodes == 20
                assert budget.used_evaluations <= 100, (env_id, agent, seed)
                assert budget.used_episodes <= 20, (env_id, agent, seed)
                if agent in exhausting:
                    assert budget.used_evaluations == 100, (env_id, agent, seed)
                    assert budget.used_episodes == 20, (env_id, agent, seed)
    report(1, "budget law over every agent x both envs x 30 seeds", ok)


def test_criterion_02_roulette_probabilities():
    """Selection probabilities: normalization, homogeneity, empirical frequencies."""
    rng = np.random.default_rng(12)
    ok = True
    for _ in range(200):
        fitnesses = rng.uniform(1e-6, 100.0, size=int(rng.integers(1, 25)))
        members = [
            PopulationMember(Policy.random(SeededRng(0)), 0.0, float(f)) for f in fitnesses
        ]
        probs = roulette_probabilities(members)
        ok &= abs(sum(probs) - 1.0) <= 1e-12
        assert abs(sum(probs) - 1.0) <= 1e-12
        scaled = [
            PopulationMember(m.policy, m.reward, m.fitness * 7.25) for m in members
        ]
        assert roulette_probabilities(scaled) == pytest.approx(probs, abs=1e-12)

    members = [
        PopulationMember(Policy.random(SeededRng(i)), 0.0, f)
        for i, f in enumerate([0.2, 0.3, 0.5])
    ]
    draw_rng = SeededRng(2019)
    counts = np.zeros(3)
    draws = 100_000
    for _ in range(draws):
        counts[members.index(roulette_select(members, draw_rng))] += 1
    freqs = counts / draws
    ok &= bool(np.all(np.abs(freqs - np.array([0.2, 0.3, 0.5])) <= 0.01))
    assert freqs == pytest.approx([0.2, 0.3, 0.5], abs=0.01)
    report(2, "roulette selection follows the fitness-proportional law", ok,
           f"empirical freqs {np.round(freqs, 4).tolist()}")


def test_criterion_03_q_update_law():
    """Q-update matches hand values exactly; gamma=0 equals running reward means."""
    table = QTable()
    assert q_update(table, 1, Action(0.2, 0.3), 10.0, 2, gamma=0.9) == 10.0
    table = QTable()
    action = Action(0.4, 0.4)
    i = table.action_index(action)
    table.values[1, i] = 2.0
    table.visit_counts[1, i] = 2
    table.values[2, 0] = 6.0
    assert q_update(table, 2, action, 4.0, 3, gamma=0.5) == 4.5
    table = QTable()
    assert q_update(table, 3, Action(0.0, 0.0), 0.0, 4, gamma=0.3) == 0.0

    rng = np.random.default_rng(3)
    max_error = 0.0
    for _ in range(1000):
        table = QTable()
        stream: dict[tuple[int, int], list[float]] = {}
        for _ in range(int(rng.integers(5, 60))):
            year = int(rng.integers(1, 6))
            index = int(rng.integers(0, 100))
            reward = float(rng.uniform(-5, 5))
            q_update(table, year, table.grid[index], reward,
                     None if year == 5 else year + 1, gamma=0.0)
            stream.setdefault((year, index), []).append(reward)
        for (year, index), rewards in stream.items():
            max_error = max(
                max_error, abs(table.values[year - 1, index] - float(np.mean(rewards)))
            )
    assert max_error <= 1e-12
    report(3, "value update law exact; gamma=0 gives running means", True,
           f"max deviation {max_error:.2e} over 1000 streams")


def test_criterion_04_sequence_break_structure():
    """Coarse probes, the epsilon schedule endpoints, pinned year 1, refinement rule."""
    probed = []

    class RecordingEnv:
        def __init__(self):
            self.inner = build_env(default_env_a())

        @property
        def budget(self):
            return self.inner.budget

        def reset(self):
            return self.inner.reset()

        def step(self, action):
            probed.append(action.as_tuple())
            return self.inner.step(action)

    env = RecordingEnv()
    first_year_search(env, QConfig(), SeededRng(0))
    coarse = {(x, y) for x in (0.0, 0.3, 0.6, 0.9) for y in (0.0, 0.3, 0.6, 0.9)}
    assert coarse <= set(probed)
    assert set(probed[:16]) == coarse  # the grid phase is exactly the 16 pairs

    assert epsilon_schedule(0) == 0.8
    assert abs(epsilon_schedule(15) - 0.01875) <= 1e-9

    from scarce_rl.qlearning import _run_seq_break

    for seed in range(5):
        env = build_env(default_env_a())
        policy, best, a_max = _run_seq_break(env, QConfig(), SeededRng(seed))
        assert policy.actions[0] == a_max

    state = RefinementState(Action(0.3, 0.6), Action(0.2, 0.6), (0.0, 0.0))
    stepped = refine_step(state, reward_next=2.0, reward_max=1.0, rng=SeededRng(1))
    assert stepped.a_max == Action(0.2, 0.6) and stepped.a_next == Action(0.1, 0.6)
    report(4, "sequence-breaking structure (probes, schedule, pinned year 1, refinement)", True)


def test_criterion_05_gp_regression():
    """Interpolation, agreement with a direct-inverse oracle, information monotonicity."""
    x = [[0.1, 0.1], [0.5, 0.9], [0.9, 0.2], [0.3, 0.6]]
    y = [1.0, -2.0, 0.5, 3.0]
    model = gp_fit(x, y)
    interp_err = max(abs(gp_predict(model, p)[0] - t) for p, t in zip(x, y))
    assert interp_err <= 1e-6

    def oracle(points, targets, query, hp):
        points = np.asarray(points, dtype=float)
        targets = np.asarray(targets, dtype=float)
        mu, sigma = targets.mean(), targets.std()
        sigma = 1.0 if sigma < 1e-12 else sigma
        t = (targets - mu) / sigma
        d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(-1)
        k_xx = hp.variance * np.exp(-d2 / (2 * hp.lengthscale**2)) + hp.jitter * np.eye(len(points))
        dq = ((points - np.asarray(query)) ** 2).sum(-1)
        k_xq = hp.variance * np.exp(-dq / (2 * hp.lengthscale**2))
        k_inv = np.linalg.inv(k_xx)
        mean = float(k_xq @ k_inv @ t)
        var = float(hp.variance - k_xq @ k_inv @ k_xq)
        return mu + sigma * mean, sigma * math.sqrt(max(var, 0.0))

    hp = GpHyperparams()
    oracle_err = 0.0
    for pts, tgt in [
        ([[0.2, 0.3], [0.7, 0.8]], [1.5, -0.5]),
        ([[0.1, 0.9], [0.5, 0.5], [0.8, 0.1]], [2.0, 4.0, 1.0]),
    ]:
        model = gp_fit(pts, tgt, hp)
        for query in ([0.4, 0.5], [0.9, 0.9], [0.05, 0.95]):
            mean, std = gp_predict(model, query)
            om, os = oracle(pts, tgt, query, hp)
            oracle_err = max(oracle_err, abs(mean - om), abs(std - os))
    assert oracle_err <= 1e-8

    rng = np.random.default_rng(55)
    hp_fixed = GpHyperparams(standardize=False)
    worst = -np.inf
    for _ in range(500):
        n = int(rng.integers(1, 10))
        pts = rng.uniform(size=(n, 2))
        tgt = rng.normal(size=n)
        query = rng.uniform(size=2)
        _, before = gp_predict(gp_fit(pts, tgt, hp_fixed), query)
        _, after = gp_predict(
            gp_fit(np.vstack([pts, rng.uniform(size=2)]), np.append(tgt, rng.normal()), hp_fixed),
            query,
        )
        worst = max(worst, after - before)
        assert after <= before + 1e-10
    report(5, "GP regression (interpolation, oracle agreement, monotone uncertainty)", True,
           f"oracle err {oracle_err:.1e}, worst std increase {worst:.1e}")


def test_criterion_06_ucb_limits():
    """kappa=0 is mean-argmax; kappa=1e6 is std-argmax (exact argmax equality)."""
    rng = np.random.default_rng(66)
    for _ in range(200):
        n = int(rng.integers(2, 12))
        model = gp_fit(rng.uniform(size=(n, 2)), rng.normal(size=n) * 10)
        candidates = rng.uniform(size=(int(rng.integers(5, 40)), 2))
        mean, std = model.predict(candidates)
        point = ucb_acquire(model, candidates, UcbParams(kappa=0.0))
        assert np.array_equal(point, candidates[int(np.argmax(mean))])
        if std.max() - std.min() > 1e-9:  # std-argmax only defined off the constant case
            point = ucb_acquire(model, candidates, UcbParams(kappa=1e6))
            assert np.array_equal(point, candidates[int(np.argmax(std))])
    report(6, "UCB collapses to mean-argmax (kappa=0) and std-argmax (kappa=1e6)", True)


def test_criterion_07_ensemble_weights():
    """Grid argmin exactness, degenerate tie-breaks, trajectory stabilization."""
    rng = np.random.default_rng(77)
    points = rng.uniform(size=(10, 4))
    targets = rng.normal(size=10) * 40
    pred_a = rng.normal(size=10) * 40
    pred_b = rng.normal(size=10) * 40
    fitted = fit_boosting_weights(
        (points, targets), FixedPredictions(pred_a), FixedPredictions(pred_b)
    )
    best = None
    for i in range(51):
        for j in range(51):
            w0, w1 = round(i * 0.02, 10), round(j * 0.02, 10)
            errors = w0 * pred_a + w1 * pred_b - targets
            mse = math.fsum(float(e) * float(e) for e in errors) / targets.size
            if best is None or mse < best[2]:
                best = (w0, w1, mse)
    assert (fitted.w0, fitted.w1, fitted.mse) == best

    perfect = fit_boosting_weights(
        (points, targets), FixedPredictions(targets), FixedPredictions(np.zeros(10))
    )
    assert abs(perfect.w0 - 1.0) <= 0.02 and perfect.w1 == 0.0
    same = fit_boosting_weights(
        (points, targets), FixedPredictions(targets), FixedPredictions(targets)
    )
    assert same.w0 == 0.0 and same.w1 == 1.0  # lexicographically smallest optimum

    stable = 0
    config = default_env_a()
    for seed in SEEDS:
        env = build_env(config)
        history = []
        run_bo_ensemble(env, BoConfig(), SeededRng(seed), weight_history=history)
        episode = weight_stabilization_episode(history)
        if episode is not None and episode <= 12:
            stable += 1
    ok = stable >= 0.6 * len(SEEDS)
    report(7, "ensemble weight fit exact; trajectory stabilizes within 12 episodes", ok,
           f"{stable}/{len(SEEDS)} seeds stable by episode 12")
    assert ok, f"only {stable}/30 seeds stabilized by episode 12"


def test_criterion_08_comparison_orderings():
    """Mean-best orderings on the default envs over 30 paired seeds.

    env_a: full-sequence-break > first-year-break+Q > plain Q(20) >= random
    search, each gap at least 0.5 pooled standard errors. env_b:
    first-year-break+Q > GA > random search (mean ordering).
    """
    def gap_in_se(a, b):
        se = math.sqrt((a.var(ddof=1) + b.var(ddof=1)) / len(a))
        return (a.mean() - b.mean()) / se

    env_a = {
        agent: agent_best_totals("env_a", agent)
        for agent in ("random_search", "qlearning", "qlearning_seq_break", "full_seq_break")
    }
    chain_a = [
        ("full_seq_break", "qlearning_seq_break"),
        ("qlearning_seq_break", "qlearning"),
        ("qlearning", "random_search"),
    ]
    gaps_a = {f"{hi}>{lo}": gap_in_se(env_a[hi], env_a[lo]) for hi, lo in chain_a}
    env_b = {
        agent: agent_best_totals("env_b", agent)
        for agent in ("random_search", "genetic", "qlearning_seq_break")
    }
    seq_over_ga = env_b["qlearning_seq_break"].mean() > env_b["genetic"].mean()
    ga_over_random = env_b["genetic"].mean() > env_b["random_search"].mean()

    ok = all(g >= 0.5 for g in gaps_a.values()) and seq_over_ga and ga_over_random
    detail = (
        "env_a gaps in SE: "
        + ", ".join(f"{k} {v:+.2f}" for k, v in gaps_a.items())
        + f"; env_b means: seq {env_b['qlearning_seq_break'].mean():.1f}, "
        + f"ga {env_b['genetic'].mean():.1f}, random {env_b['random_search'].mean():.1f}"
    )
    report(8, "comparison-table orderings on both default envs", ok, detail)
    for name, gap in gaps_a.items():
        assert gap >= 0.5, f"env_a ordering {name} has gap {gap:.2f} SE"
    assert seq_over_ga, "env_b: first-year-break+Q must beat the GA"
    # Known limitation: statistically the GA ties random search at the pinned
    # mechanics (population 6, noise 0.05) on Gaussian-mixture surfaces; the
    # measured gap is ~-2..-4 points (n=100 paired seeds). See README.
    assert ga_over_random, (
        f"env_b: GA mean {env_b['genetic'].mean():.2f} does not exceed random search "
        f"mean {env_b['random_search'].mean():.2f}; the strict GA > random ordering is "
        "not attainable with the pinned GA mechanics (see README, Known limitations)"
    )


def test_criterion_09_landscape_scan():
    """40x40 scan: 1600 cells, maximum near 110, penalty pits below the mean."""
    config = default_env_a()
    matrix = landscape_scan(config, year=1, grid_n=40)
    assert matrix.size == 1600
    assert 104.5 <= matrix.max() <= 115.5
    axis = np.linspace(0.0, 1.0, 40)
    mean = matrix.mean()
    ok = True
    for cx, cy in [(0.2, 0.9), (0.8, 0.9)]:
        i = int(np.argmin(np.abs(axis - cx)))
        j = int(np.argmin(np.abs(axis - cy)))
        ok &= matrix[i, j] < mean
        assert matrix[i, j] < mean
    report(9, "landscape scan (1600 cells, max near 110, pits below mean)", ok,
           f"max {matrix.max():.2f}, mean {mean:.2f}")


def test_criterion_10_service_equivalence():
    """Remote and local rewards identical; budget enforced under concurrency."""
    import requests

    from scarce_rl.service import background_server, create_app, default_server_config

    rng = SeededRng(99)
    actions = [Action(rng.uniform(), rng.uniform()) for _ in range(100)]
    local_env = build_env(default_env_a())
    local_rewards = []
    for i, action in enumerate(actions):
        if i % 5 == 0:
            local_env.reset()
        local_rewards.append(local_env.step(action).reward)

    with background_server(create_app(default_server_config()), port=8462) as base_url:
        http = requests.Session()
        token = http.post(f"{base_url}/sessions", json={"env_id": "env_a"}, timeout=5).json()["token"]
        remote_rewards = []
        for i, action in enumerate(actions):
            if i % 5 == 0:
                http.post(f"{base_url}/sessions/{token}/reset", timeout=5)
            body = http.post(
                f"{base_url}/sessions/{token}/step",
                json={"action": [action.itn, action.irs]},
                timeout=5,
            ).json()
            remote_rewards.append(body["reward"])
        assert remote_rewards == local_rewards
        response = http.post(
            f"{base_url}/sessions/{token}/step", json={"action": [0.5, 0.5]}, timeout=5
        )
        assert response.status_code == 429 and response.json() == {"error": "budget_exhausted"}

        token = http.post(f"{base_url}/sessions", json={"env_id": "env_a"}, timeout=5).json()["token"]
        successes = []
        lock = threading.Lock()

        def hammer():
            session = requests.Session()
            while True:
                r = session.post(
                    f"{base_url}/sessions/{token}/step", json={"action": [0.5, 0.5]}, timeout=5
                )
                if r.status_code == 200:
                    with lock:
                        successes.append(1)
                elif r.status_code == 409:
                    session.post(f"{base_url}/sessions/{token}/reset", timeout=5)
                elif r.status_code == 429:
                    return

        threads = [threading.Thread(target=hammer) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=30)
        assert len(successes) <= 100
    report(10, "service equivalence (bitwise rewards, budget under concurrency)", True,
           f"{len(successes)} concurrent steps succeeded")


def test_criterion_11_determinism(tmp_path):
    """Identical specs produce byte-identical files; parallel equals sequential."""
    ok = True
    for agent in ("random_search", "qlearning_seq_break"):
        spec = ExperimentSpec(env="env_a", agent=agent, runs=3, seeds=(0, 1, 2))
        paths = []
        for i, parallel in enumerate([False, False, True]):
            result = run_experiment(spec, parallel=parallel)
            path = tmp_path / f"{agent}_{i}.csv"
            export_results(result, path)
            paths.append(path)
        blobs = [p.read_bytes() for p in paths]
        ok &= blobs[0] == blobs[1] == blobs[2]
        assert blobs[0] == blobs[1], f"{agent}: repeated runs differ"
        assert blobs[0] == blobs[2], f"{agent}: parallel differs from sequential"
    report(11, "determinism (byte-identical reruns, parallel == sequential)", ok)
