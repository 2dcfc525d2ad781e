"""Line-delimited JSON protocol for driving environments remotely.

One JSON object per line, UTF-8, newline-terminated.  Requests:
``hello``, ``reset{seed, episode_source}``, ``step{action}``, ``close``.
Responses: ``hello{obs_dim, act_dim, layout}``, ``state{obs, reward, done,
info}``, ``closed``, or ``error{code, message}``.  Every request line gets
exactly one response line; malformed lines yield ``error`` with code
``parse`` and the session survives.  Floats are serialized as their
shortest round-trip decimal, so replays are bit-exact.
"""

from __future__ import annotations

import json
import math
import socketserver
import sys

from .environment import EnvConfig, Environment, episode_source_from_dict
from .errors import (
    ConfigError,
    ContractError,
    FormatError,
    LifecycleError,
    ShearctlError,
)

DEFAULT_PORT = 7420


def _encode(obj) -> str:
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


def _reject_constant(_):
    raise ValueError("non-finite numbers are not allowed on the wire")


def _finite(value, what):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ContractError(f"{what} must be a finite number")
    return float(value)


class Session:
    """One environment behind one request/response stream."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.env = Environment(config)
        self.has_episode = False
        self.closed = False
        self._last_id = None

    def handle_line(self, line: str) -> str:
        """Process one request line, always returning one response line."""
        try:
            response = self._dispatch(line)
        except Exception as exc:  # never crash the session
            response = {"type": "error", "code": "internal", "message": str(exc)}
        return _encode(response)

    # -- internals ----------------------------------------------------------

    def _dispatch(self, line: str):
        line = line.strip()
        if not line:
            return {"type": "error", "code": "parse", "message": "empty line"}
        try:
            request = json.loads(line, parse_constant=_reject_constant)
        except (json.JSONDecodeError, ValueError, RecursionError) as exc:
            return {"type": "error", "code": "parse", "message": f"bad JSON: {exc}"}
        if not isinstance(request, dict):
            return {"type": "error", "code": "parse", "message": "request must be an object"}

        msg_id = request.get("id")
        if msg_id is not None:
            if not isinstance(msg_id, int) or isinstance(msg_id, bool):
                return {"type": "error", "code": "parse", "message": "id must be an integer"}
            if self._last_id is not None and msg_id <= self._last_id:
                return self._with_id(
                    {
                        "type": "error",
                        "code": "contract",
                        "message": f"id {msg_id} not above previous id {self._last_id}",
                    },
                    msg_id,
                )
            self._last_id = msg_id

        kind = request.get("type")
        try:
            if self.closed:
                raise LifecycleError("session is closed")
            if kind == "hello":
                body = self._hello()
            elif kind == "reset":
                body = self._reset(request)
            elif kind == "step":
                body = self._step(request)
            elif kind == "close":
                self.closed = True
                body = {"type": "closed"}
            else:
                body = {
                    "type": "error",
                    "code": "parse",
                    "message": f"unknown request type {kind!r}",
                }
        except ShearctlError as exc:
            body = self._error_for(exc)
        return self._with_id(body, msg_id)

    @staticmethod
    def _with_id(body, msg_id):
        if msg_id is not None:
            body["id"] = msg_id
        return body

    def _hello(self):
        return {
            "type": "hello",
            "obs_dim": self.config.obs_dim,
            "act_dim": self.config.act_dim,
            "layout": self.config.layout,
        }

    def _reset(self, request):
        seed = request.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise ContractError("seed must be an integer")
        source = None
        if request.get("episode_source") is not None:
            source = episode_source_from_dict(request["episode_source"])
        obs = self.env.reset(seed=seed, episode_source=source)
        self.has_episode = True
        return {
            "type": "state",
            "obs": obs.flatten().tolist(),
            "reward": 0.0,
            "done": False,
            "info": {"episode_steps": self.env.episode_steps},
        }

    def _step(self, request):
        if not self.has_episode:
            raise ContractError("step before reset")
        action = request.get("action")
        if not isinstance(action, list):
            raise ContractError("action must be a list of numbers")
        action = [_finite(a, "action entry") for a in action]
        result = self.env.step(action)
        info = result.info
        return {
            "type": "state",
            "obs": result.observation.flatten().tolist(),
            "reward": result.reward,
            "done": result.done,
            "info": {
                "isd": info["isd"].tolist(),
                "base_shear": info["base_shear"],
                "forces": info["forces"].tolist(),
            },
        }

    def _error_for(self, exc: ShearctlError):
        if isinstance(exc, (ContractError, LifecycleError)):
            code = "contract"
        elif isinstance(exc, (ConfigError, FormatError)):
            code = "config"
        else:
            code = "internal"
        return {"type": "error", "code": code, "message": str(exc)}


def serve_stdio(config: EnvConfig, stdin=None, stdout=None) -> None:
    """Serve one session over standard streams until close or EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = Session(config)
    for line in stdin:
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()
        if session.closed:
            break


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session(self.server.env_config)
        while not session.closed:
            line = self.rfile.readline()
            if not line:
                break
            response = session.handle_line(line.decode("utf-8", errors="replace"))
            self.wfile.write(response.encode() + b"\n")
            self.wfile.flush()


class ProtocolServer(socketserver.ThreadingTCPServer):
    """One session per connection; sessions are independent."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: EnvConfig, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        super().__init__((host, port), _LineHandler)
        self.env_config = config


def serve_tcp(config: EnvConfig, host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> None:
    with ProtocolServer(config, host, port) as server:
        server.serve_forever()
