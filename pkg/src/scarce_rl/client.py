"""Remote environment adapter: run any agent unmodified against the service.

:class:`RemoteEnv` speaks the oracle service's wire protocol and exposes the
same ``reset`` / ``step`` / ``budget`` surface as a local
:class:`~scarce_rl.environments.BudgetedEnv`, so ``evaluate_policy`` and every
agent runner work over HTTP without changes. Budget errors surface as
:class:`BudgetExhaustedError`; connectivity problems surface as the retryable
:class:`TransportError` and consume no budget.
"""

from __future__ import annotations

import requests

from .core import Action, BudgetExhaustedError, BudgetSnapshot, EpisodeDoneError
from .environments import StepResult


class TransportError(RuntimeError):
    """A network-level failure talking to the oracle service (retryable)."""


class RemoteSessionError(RuntimeError):
    """The service rejected a request (unknown token, malformed action, ...)."""


class RemoteEnv:
    """A live service session presented as a budgeted environment."""

    def __init__(
        self,
        base_url: str,
        env_id: str = "env_a",
        session: requests.Session | None = None,
        timeout: float = 10.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.env_id = env_id
        self.timeout = timeout
        self._http = session if session is not None else requests.Session()
        payload = self._post("/sessions", {"env_id": env_id})
        self.token: str = payload["token"]
        self._year = int(payload["year"])
        self._done = False
        remaining = payload["remaining"]
        self._max_evaluations = int(remaining["evaluations"])
        self._max_episodes = int(remaining["episodes"])
        self._remaining = dict(remaining)

    # -- wire helpers -------------------------------------------------------

    def _request(self, method: str, path: str, payload: dict | None) -> dict:
        url = f"{self.base_url}{path}"
        try:
            response = self._http.request(method, url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"{method} {url} failed: {exc}") from exc
        try:
            body = response.json()
        except ValueError as exc:
            raise TransportError(f"non-JSON response from {url}") from exc
        if response.status_code == 200:
            return body
        code = body.get("error", "unknown_error") if isinstance(body, dict) else "unknown_error"
        if code == "budget_exhausted":
            raise BudgetExhaustedError("remote evaluation budget exhausted")
        if code == "episode_done":
            raise EpisodeDoneError("remote episode finished; reset first")
        raise RemoteSessionError(f"{method} {path} -> {response.status_code}: {code}")

    def _post(self, path: str, payload: dict | None = None) -> dict:
        return self._request("POST", path, payload)

    def _get(self, path: str) -> dict:
        return self._request("GET", path, None)

    # -- BudgetedEnv surface --------------------------------------------------

    @property
    def budget(self) -> BudgetSnapshot:
        return BudgetSnapshot(
            max_evaluations=self._max_evaluations,
            max_episodes=self._max_episodes,
            used_evaluations=self._max_evaluations - int(self._remaining["evaluations"]),
            used_episodes=self._max_episodes - int(self._remaining["episodes"]),
        )

    @property
    def year(self) -> int:
        return self._year

    @property
    def done(self) -> bool:
        return self._done

    def reset(self) -> int:
        payload = self._post(f"/sessions/{self.token}/reset")
        self._year = int(payload["year"])
        self._done = False
        if "remaining" in payload:
            self._remaining = dict(payload["remaining"])
        else:  # older servers: resync explicitly
            state = self._get(f"/sessions/{self.token}")
            self._remaining = dict(state["remaining"])
        return self._year

    def step(self, action: Action) -> StepResult:
        if not isinstance(action, Action):
            action = Action(float(action[0]), float(action[1]))
        payload = self._post(
            f"/sessions/{self.token}/step", {"action": [action.itn, action.irs]}
        )
        self._year = int(payload["year"])
        self._done = bool(payload["done"])
        self._remaining = dict(payload["remaining"])
        return StepResult(
            reward=float(payload["reward"]),
            year=self._year,
            done=self._done,
            remaining=self.budget,
        )


def remote_env_client(base_url: str, env_id: str = "env_a", **kwargs) -> RemoteEnv:
    """Open a fresh remote session satisfying the budgeted-environment contract."""
    return RemoteEnv(base_url, env_id=env_id, **kwargs)
