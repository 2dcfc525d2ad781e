"""Controller abstraction and the portable feed-forward policy format.

Controllers map environment observations to normalized actions in [-1, 1].
Neural policies trained elsewhere cross the process boundary as a JSON
weight file (schema 1); the evaluator here is the reference
implementation of that format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError, NumericalError

POLICY_SCHEMA = 1

_ACTIVATIONS = {
    "relu": lambda x: np.maximum(x, 0.0),
    "tanh": np.tanh,
}


class ZeroController:
    """Always-zero actions: the uncontrolled baseline."""

    def __init__(self, n_act: int):
        self.n_act = n_act

    def reset(self) -> None:
        pass

    def act(self, observation) -> np.ndarray:
        return np.zeros(self.n_act)


class RandomController:
    """Uniform random actions in [-1, 1]; deterministic per seed."""

    def __init__(self, n_act: int, seed: int = 0):
        self.n_act = n_act
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed)

    def act(self, observation) -> np.ndarray:
        return self._rng.uniform(-1.0, 1.0, self.n_act)


@dataclass(frozen=True, eq=False)
class MlpLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "bias", np.asarray(self.bias, dtype=float))
        if self.activation not in _ACTIVATIONS:
            raise FormatError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise FormatError("layer weights must be (rows, cols) with bias (rows,)")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise FormatError("layer parameters must be finite")


@dataclass(frozen=True, eq=False)
class MlpPolicy:
    """Stack of affine layers; the last activation must squash onto (-1, 1)."""

    layers: tuple[MlpLayer, ...]
    obs_layout: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.layers:
            raise FormatError("policy needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.weights.shape[1] != prev.weights.shape[0]:
                raise FormatError(
                    f"layer size mismatch: {prev.weights.shape} feeds {nxt.weights.shape}"
                )
        if self.layers[-1].activation != "tanh":
            raise FormatError("final activation must be the bounded squash 'tanh'")
        expected = (
            int(self.obs_layout["k"]) * len(self.obs_layout["instrumented"])
            + 1
            + int(self.obs_layout["n_act"])
        )
        if self.input_dim != expected:
            raise FormatError(
                f"first layer expects {self.input_dim} inputs but the observation "
                f"layout implies {expected}"
            )
        if self.output_dim != int(self.obs_layout["n_act"]):
            raise FormatError(
                f"last layer emits {self.output_dim} actions but layout declares "
                f"{self.obs_layout['n_act']}"
            )

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[0]


def mlp_forward(policy: MlpPolicy, observation) -> np.ndarray:
    """Deterministic forward pass; output lies in (-1, 1)."""
    x = np.asarray(observation, dtype=float)
    if x.shape != (policy.input_dim,):
        raise ContractError(
            f"observation must have shape ({policy.input_dim},), got {x.shape}"
        )
    for layer in policy.layers:
        x = _ACTIVATIONS[layer.activation](layer.weights @ x + layer.bias)
        if not np.all(np.isfinite(x)):
            raise NumericalError("non-finite activation in policy forward pass")
    return x


class MlpController:
    """Adapter: evaluate a loaded policy on environment observations."""

    def __init__(self, policy: MlpPolicy):
        self.policy = policy

    def reset(self) -> None:
        pass

    def act(self, observation) -> np.ndarray:
        return mlp_forward(self.policy, observation.flatten())


def layouts_match(a: dict, b: dict) -> bool:
    return (
        int(a["k"]) == int(b["k"])
        and list(map(int, a["instrumented"])) == list(map(int, b["instrumented"]))
        and int(a["n_act"]) == int(b["n_act"])
    )


def policy_to_dict(policy: MlpPolicy) -> dict:
    return {
        "schema": POLICY_SCHEMA,
        "layers": [
            {
                "rows": layer.weights.shape[0],
                "cols": layer.weights.shape[1],
                "weights": layer.weights.ravel().tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in policy.layers
        ],
        "obs_layout": {
            "k": int(policy.obs_layout["k"]),
            "instrumented": list(map(int, policy.obs_layout["instrumented"])),
            "n_act": int(policy.obs_layout["n_act"]),
        },
        "output": policy.layers[-1].activation,
        "metadata": policy.metadata,
    }


def policy_from_dict(data: dict) -> MlpPolicy:
    if data.get("schema") != POLICY_SCHEMA:
        raise FormatError(
            f"unsupported policy schema {data.get('schema')!r}; expected {POLICY_SCHEMA}"
        )
    try:
        layers = []
        for raw in data["layers"]:
            rows, cols = int(raw["rows"]), int(raw["cols"])
            weights = np.asarray(raw["weights"], dtype=float)
            if weights.shape != (rows * cols,):
                raise FormatError(
                    f"layer declares {rows}x{cols} but carries {weights.shape[0]} weights"
                )
            layers.append(
                MlpLayer(
                    weights=weights.reshape(rows, cols),
                    bias=raw["bias"],
                    activation=raw["activation"],
                )
            )
        layout = data["obs_layout"]
        output = data.get("output")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad policy document: {exc}") from exc
    policy = MlpPolicy(
        layers=tuple(layers), obs_layout=layout, metadata=data.get("metadata", {})
    )
    if output != policy.layers[-1].activation:
        raise FormatError(
            f"declared output {output!r} disagrees with the last layer's activation"
        )
    return policy


def save_policy(policy: MlpPolicy, path) -> None:
    Path(path).write_text(json.dumps(policy_to_dict(policy)) + "\n")


def load_policy(path, expected_layout: dict | None = None) -> MlpPolicy:
    """Load and validate a portable policy file.

    When ``expected_layout`` is given (the evaluating environment's layout),
    a mismatch is a load failure: weights trained against one observation
    ordering must not silently run against another.
    """
    path = Path(path)
    if not path.exists():
        raise FormatError(f"policy file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"policy file is not valid JSON: {exc}") from exc
    policy = policy_from_dict(data)
    if expected_layout is not None and not layouts_match(
        policy.obs_layout, expected_layout
    ):
        raise FormatError(
            f"policy observation layout {policy.obs_layout} does not match the "
            f"environment layout {expected_layout}"
        )
    return policy
