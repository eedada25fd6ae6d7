"""Driving agents over the wire against the budget-metering oracle service.

The service wraps each session in a fresh environment behind a random token
and enforces the 100-evaluation budget server-side. The remote client adapter
satisfies the same interface as a local environment, so agents run unmodified.
"""

from scarce_rl import SeededRng, build_env, default_env_a, run_random_search
from scarce_rl.client import remote_env_client
from scarce_rl.core import BudgetExhaustedError
from scarce_rl.service import background_server, create_app, default_server_config

app = create_app(default_server_config())
with background_server(app, port=8470) as base_url:
    print(f"service up at {base_url}")

    remote = remote_env_client(base_url, "env_a")
    print(f"session {remote.token[:8]}... budget "
          f"{remote.budget.remaining_evaluations} evaluations")

    remote_best = run_random_search(remote, SeededRng(3))
    local_best = run_random_search(build_env(default_env_a()), SeededRng(3))
    print(f"random search over HTTP:  best total {remote_best.total:.4f}")
    print(f"random search in-process: best total {local_best.total:.4f}")
    print(f"identical results: {remote_best == local_best}")

    try:
        remote.reset()
        remote.step((0.5, 0.5))
    except BudgetExhaustedError:
        print("the 101st evaluation is refused, as it should be")
