"""HTTP oracle service replaying the evaluation-budget contract over the wire.

Sessions wrap a fresh budgeted environment behind an unguessable token. Every
step consumes one of the session's 100 evaluations; a reset in the middle of
an episode forfeits it. Per-session state is serialized with a lock, so
concurrent steps on one token queue up and the budget stays exact regardless
of request interleaving.

Endpoints (JSON over HTTP):

* ``POST /sessions``                 body ``{"env_id": "env_a"}``
* ``POST /sessions/{token}/step``    body ``{"action": [itn, irs]}``
* ``POST /sessions/{token}/reset``
* ``GET  /sessions/{token}``

Step responses carry ``reward`` (number), ``year`` (integer), ``done``
(boolean) and ``remaining`` ``{"evaluations": int, "episodes": int}``. Error
bodies are ``{"error": code}`` with codes ``unknown_env``, ``unknown_token``,
``invalid_action``, ``episode_done`` and ``budget_exhausted``.
"""

from __future__ import annotations

import secrets
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .core import Action, BudgetExhaustedError, EpisodeDoneError
from .environments import (
    BudgetedEnv,
    EnvConfigA,
    EnvConfigB,
    build_env,
    default_env_a,
    default_env_b,
)


@dataclass
class ServerConfig:
    """Environment registry and session housekeeping knobs."""

    envs: dict[str, EnvConfigA | EnvConfigB] = field(default_factory=dict)
    session_ttl_seconds: float = 3600.0


def default_server_config() -> ServerConfig:
    return ServerConfig(envs={"env_a": default_env_a(), "env_b": default_env_b()})


@dataclass
class Session:
    token: str
    env_id: str
    env: BudgetedEnv
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)

    def touch(self) -> None:
        self.last_access = time.monotonic()

    def remaining(self) -> dict:
        budget = self.env.budget
        return {
            "evaluations": budget.remaining_evaluations,
            "episodes": budget.remaining_episodes,
        }


class SessionStore:
    """Token-keyed sessions with lazy idle expiry."""

    def __init__(self, config: ServerConfig):
        self.config = config
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _purge_expired(self) -> None:
        cutoff = time.monotonic() - self.config.session_ttl_seconds
        for token in [t for t, s in self._sessions.items() if s.last_access < cutoff]:
            del self._sessions[token]

    def create(self, env_id: str) -> Session:
        env_config = self.config.envs.get(env_id)
        if env_config is None:
            raise KeyError(env_id)
        session = Session(token=secrets.token_hex(16), env_id=env_id, env=build_env(env_config))
        with self._lock:
            self._purge_expired()
            self._sessions[session.token] = session
        return session

    def get(self, token: str) -> Session | None:
        with self._lock:
            self._purge_expired()
            session = self._sessions.get(token)
        if session is not None:
            session.touch()
        return session


def _error(status: int, code: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code})


def _parse_action(payload) -> Action | None:
    if not isinstance(payload, dict):
        return None
    raw = payload.get("action")
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        return None
    try:
        x, y = float(raw[0]), float(raw[1])
    except (TypeError, ValueError):
        return None
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        return None
    return Action(x, y)


def create_app(config: ServerConfig | None = None) -> FastAPI:
    """Build the service application around an environment registry."""
    config = config if config is not None else default_server_config()
    store = SessionStore(config)
    app = FastAPI(title="scarce-rl oracle service")
    app.state.store = store

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            payload = await request.json()
        except Exception:
            payload = {}
        env_id = payload.get("env_id") if isinstance(payload, dict) else None
        if not isinstance(env_id, str):
            return _error(400, "invalid_request")
        try:
            session = store.create(env_id)
        except KeyError:
            return _error(404, "unknown_env")
        return {"token": session.token, "year": session.env.year, "remaining": session.remaining()}

    @app.post("/sessions/{token}/step")
    async def step(token: str, request: Request):
        session = store.get(token)
        if session is None:
            return _error(404, "unknown_token")
        try:
            payload = await request.json()
        except Exception:
            payload = None
        action = _parse_action(payload)
        if action is None:
            return _error(400, "invalid_action")
        with session.lock:
            try:
                result = session.env.step(action)
            except BudgetExhaustedError:
                return _error(429, "budget_exhausted")
            except EpisodeDoneError:
                return _error(409, "episode_done")
            return {
                "reward": result.reward,
                "year": result.year,
                "done": result.done,
                "remaining": {
                    "evaluations": result.remaining.remaining_evaluations,
                    "episodes": result.remaining.remaining_episodes,
                },
            }

    @app.post("/sessions/{token}/reset")
    async def reset(token: str):
        session = store.get(token)
        if session is None:
            return _error(404, "unknown_token")
        with session.lock:
            year = session.env.reset()
            return {"year": year, "remaining": session.remaining()}

    @app.get("/sessions/{token}")
    async def state(token: str):
        session = store.get(token)
        if session is None:
            return _error(404, "unknown_token")
        with session.lock:
            return {
                "year": session.env.year,
                "done": session.env.done,
                "remaining": session.remaining(),
            }

    return app


@contextmanager
def background_server(app: FastAPI, host: str = "127.0.0.1", port: int = 8321):
    """Run the app in a daemon thread for tests and demos; yields the base URL."""
    import uvicorn

    server = uvicorn.Server(
        uvicorn.Config(app, host=host, port=port, log_level="warning", lifespan="off")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started:
        if time.monotonic() > deadline or not thread.is_alive():
            raise RuntimeError("service failed to start")
        time.sleep(0.02)
    try:
        yield f"http://{host}:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=5.0)
