"""Sequential decision-making wrapper around the simulator.

One environment owns one episode at a time: an excitation record (loaded
or generated per seed), the building state marched by Newmark steps, and a
rolling window of instrumented absolute accelerations that, together with
the last ground-acceleration sample and the last normalized action, forms
the observation.  Rewards penalize displacements, base shear, and actuator
effort quadratically; they are always <= 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import excitation as excite
from .dynamics import (
    BuildingModel,
    NewmarkIntegrator,
    NewmarkParams,
    ResponseHistory,
    assemble_matrices,
)
from .errors import ConfigError, ContractError, FormatError, LifecycleError
from .models import model_from_dict, model_to_dict, load_model


@dataclass(frozen=True)
class RecordSource:
    """Episode excitation loaded from a file."""

    path: str
    units: str | None = None
    fmt: str | None = None
    scale: float = 1.0


@dataclass(frozen=True)
class GeneratorSource:
    """Episode excitation drawn from the noise-plus-impulse generator."""

    config: excite.TrainingExcitationConfig = field(
        default_factory=excite.TrainingExcitationConfig
    )


EpisodeSource = RecordSource | GeneratorSource | excite.GroundMotionRecord


@dataclass(frozen=True)
class EnvConfig:
    """Everything the environment needs besides the episode excitation.

    ``reward_weights`` = (w_x, w_v, w_a) multiply the squared scaled story
    displacements, base shear, and actuator forces; ``reward_scales`` =
    (x_scale [m], shear_scale [N], force_scale [N]) normalize those terms.
    """

    model: BuildingModel
    history_len: int = 5
    instrumented_stories: tuple[int, ...] | None = None
    dt: float = 0.01
    max_force: float = 1e5
    reward_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    reward_scales: tuple[float, float, float] = (0.1, 1e5, 5e4)
    episode_source: EpisodeSource | None = None

    def __post_init__(self):
        if self.history_len < 1:
            raise ConfigError("history_len must be >= 1")
        if self.dt <= 0.0:
            raise ConfigError("dt must be positive")
        if self.max_force <= 0.0:
            raise ConfigError("max_force must be positive")
        if any(w < 0.0 for w in self.reward_weights):
            raise ConfigError("reward weights must be non-negative")
        if any(s <= 0.0 for s in self.reward_scales):
            raise ConfigError("reward scales must be positive")
        stories = self.instrumented_stories
        if stories is None:
            stories = tuple(range(1, self.model.n_stories + 1))
        else:
            stories = tuple(int(s) for s in stories)
            if len(set(stories)) != len(stories):
                raise ConfigError("instrumented stories must be unique")
            for s in stories:
                if not 1 <= s <= self.model.n_stories:
                    raise ConfigError(f"instrumented story {s} out of range")
        object.__setattr__(self, "instrumented_stories", stories)
        if self.model.n_actuators < 1:
            raise ConfigError("environment needs at least one actuator")

    @property
    def n_instrumented(self) -> int:
        return len(self.instrumented_stories)

    @property
    def obs_dim(self) -> int:
        return self.history_len * self.n_instrumented + 1 + self.model.n_actuators

    @property
    def act_dim(self) -> int:
        return self.model.n_actuators

    @property
    def layout(self) -> dict:
        return {
            "k": self.history_len,
            "instrumented": list(self.instrumented_stories),
            "n_act": self.model.n_actuators,
        }


@dataclass(frozen=True)
class Observation:
    """RL-facing state: k acceleration frames (most recent last), the last
    ground-acceleration sample, and the last normalized action."""

    accel_history: np.ndarray
    ground_accel: float
    last_action: np.ndarray

    def flatten(self) -> np.ndarray:
        return np.concatenate(
            [self.accel_history.ravel(), [self.ground_accel], self.last_action]
        )


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


def compute_reward(x, base_shear, forces, weights, scales) -> float:
    """Negated weighted quadratic penalty on drift, base shear, and effort."""
    w_x, w_v, w_a = weights
    x_scale, v_scale, a_scale = scales
    x = np.asarray(x, dtype=float)
    forces = np.asarray(forces, dtype=float)
    penalty = (
        w_x * float(np.sum((x / x_scale) ** 2))
        + w_v * (float(base_shear) / v_scale) ** 2
        + w_a * float(np.sum((forces / a_scale) ** 2))
    )
    return -penalty


def build_observation(history_frames, ground_accel, last_action) -> Observation:
    """Stack the newest-last window into an observation."""
    return Observation(
        accel_history=np.asarray(history_frames, dtype=float),
        ground_accel=float(ground_accel),
        last_action=np.asarray(last_action, dtype=float),
    )


class Environment:
    """Episodic simulation of the controlled building.

    Instances are single-threaded: an episode's state lives between
    ``reset`` and the terminal ``step``.  Distinct instances are fully
    independent.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self.mats = assemble_matrices(config.model)
        self._masses = np.asarray(config.model.masses)
        self._instr_idx = np.array(
            [s - 1 for s in config.instrumented_stories], dtype=int
        )
        self._integ = NewmarkIntegrator(self.mats, NewmarkParams(dt=config.dt))
        self._record = None
        self._state = None
        self._sample_idx = 0
        self._done = True
        self._frames = None
        self._last_action = None

    # -- episode lifecycle -------------------------------------------------

    def reset(self, seed=None, episode_source=None) -> Observation:
        """Start a fresh episode; returns the all-zero initial observation."""
        source = episode_source if episode_source is not None else self.config.episode_source
        if source is None:
            raise ConfigError("no episode source configured or supplied")
        record = resolve_episode_source(source, seed, self.config.dt)
        self._record = record
        self._state = self._integ.initial_state(record.samples[0])
        self._sample_idx = 0
        self._done = False
        k, n_instr = self.config.history_len, self.config.n_instrumented
        self._frames = [np.zeros(n_instr) for _ in range(k)]
        self._last_action = np.zeros(self.config.act_dim)
        return self._observation(0.0)

    def step(self, action) -> StepResult:
        """Apply one normalized action over the next excitation sample."""
        if self._done or self._record is None:
            raise LifecycleError("step called before reset or after episode end")
        action = np.asarray(action, dtype=float)
        if action.shape != (self.config.act_dim,):
            raise ContractError(
                f"action must have shape ({self.config.act_dim},), got {action.shape}"
            )
        if not np.all(np.isfinite(action)):
            raise ContractError("action contains non-finite entries")
        clipped = np.clip(action, -1.0, 1.0)
        u = clipped * self.config.max_force

        self._sample_idx += 1
        ag = float(self._record.samples[self._sample_idx])
        self._state = self._integ.step(self._state, ag, u)
        self._done = self._sample_idx >= self._record.samples.shape[0] - 1

        abs_accel = self._state.a + ag
        self._frames.pop(0)
        self._frames.append(abs_accel[self._instr_idx])
        self._last_action = clipped

        isd = np.diff(self._state.x, prepend=0.0)
        base_shear = float(np.sum(self._masses * abs_accel))
        reward = compute_reward(
            self._state.x,
            base_shear,
            u,
            self.config.reward_weights,
            self.config.reward_scales,
        )
        info = {"isd": isd, "base_shear": base_shear, "forces": u}
        return StepResult(self._observation(ag), reward, self._done, info)

    # -- helpers -----------------------------------------------------------

    def _observation(self, ground_accel: float) -> Observation:
        return build_observation(
            np.stack(self._frames), ground_accel, self._last_action.copy()
        )

    @property
    def state(self):
        return self._state

    @property
    def record(self):
        return self._record

    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode_steps(self) -> int:
        """Steps remaining in a full episode of the current record."""
        if self._record is None:
            raise LifecycleError("no active episode")
        return self._record.samples.shape[0] - 1


def resolve_episode_source(source, seed, dt) -> excite.GroundMotionRecord:
    """Turn an episode source into a record sampled at the simulation dt."""
    if isinstance(source, excite.GroundMotionRecord):
        record = source
    elif isinstance(source, GeneratorSource):
        cfg = source.config
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        record = excite.generate_training_excitation(cfg)
    elif isinstance(source, RecordSource):
        try:
            record = excite.load_record(source.path, fmt=source.fmt, units=source.units)
        except FormatError as exc:
            raise ConfigError(str(exc)) from exc
        if source.scale != 1.0:
            record = record.scaled(source.scale)
    else:
        raise ConfigError(f"unsupported episode source {type(source).__name__}")
    return excite.resample(record, dt)


def rollout(env: Environment, controller, episode_source=None, seed=None):
    """Run one full episode; returns (ResponseHistory, total_reward).

    The controller sees the same observations an external agent would; with
    all-zero actions the histories are identical to the uncontrolled
    ``dynamics.simulate`` output.
    """
    obs = env.reset(seed=seed, episode_source=episode_source)
    if hasattr(controller, "reset"):
        controller.reset()
    record = env.record
    nsamp = record.samples.shape[0]
    n = env.config.model.n_stories
    x = np.empty((nsamp, n))
    v = np.empty_like(x)
    a = np.empty_like(x)
    forces = np.zeros((nsamp, env.config.act_dim))
    state = env.state
    x[0], v[0], a[0] = state.x, state.v, state.a
    total = 0.0
    i = 0
    while not env.done:
        action = controller.act(obs)
        result = env.step(action)
        obs = result.observation
        total += result.reward
        i += 1
        state = env.state
        x[i], v[i], a[i] = state.x, state.v, state.a
        forces[i] = result.info["forces"]
    ag = record.samples
    history = ResponseHistory(
        dt=env.config.dt,
        t=np.arange(nsamp) * env.config.dt,
        ag=ag,
        x=x,
        v=v,
        a=a,
        abs_accel=a + ag[:, np.newaxis],
        forces=forces,
    )
    return history, total


# -- configuration files ---------------------------------------------------


def episode_source_to_dict(source) -> dict | None:
    if source is None:
        return None
    if isinstance(source, GeneratorSource):
        cfg = source.config
        return {
            "type": "generator",
            "duration": cfg.duration,
            "dt": cfg.dt,
            "noise_std": cfg.noise_std,
            "impulse_rate": cfg.impulse_rate,
            "impulse_amp_range": list(cfg.impulse_amp_range),
            "impulse_width": cfg.impulse_width,
            "seed": cfg.seed,
        }
    if isinstance(source, RecordSource):
        out = {"type": "record", "path": source.path}
        if source.units:
            out["units"] = source.units
        if source.fmt:
            out["format"] = source.fmt
        if source.scale != 1.0:
            out["scale"] = source.scale
        return out
    raise ConfigError("only generator/record sources can be serialized")


def episode_source_from_dict(data: dict | None, base_dir: Path | None = None):
    if data is None:
        return None
    kind = data.get("type")
    if kind == "generator":
        fields = {k: v for k, v in data.items() if k != "type"}
        if "impulse_amp_range" in fields:
            fields["impulse_amp_range"] = tuple(fields["impulse_amp_range"])
        try:
            return GeneratorSource(excite.TrainingExcitationConfig(**fields))
        except TypeError as exc:
            raise ConfigError(f"bad generator source: {exc}") from exc
    if kind == "record":
        path = data.get("path")
        if not path:
            raise ConfigError("record source needs a path")
        if base_dir is not None and not Path(path).is_absolute():
            path = str(base_dir / path)
        return RecordSource(
            path=path,
            units=data.get("units"),
            fmt=data.get("format"),
            scale=float(data.get("scale", 1.0)),
        )
    raise ConfigError(f"unknown episode source type {kind!r}")


def config_to_dict(config: EnvConfig) -> dict:
    return {
        "model": model_to_dict(config.model),
        "history_len": config.history_len,
        "instrumented_stories": list(config.instrumented_stories),
        "dt": config.dt,
        "max_force": config.max_force,
        "reward_weights": list(config.reward_weights),
        "reward_scales": list(config.reward_scales),
        "episode_source": episode_source_to_dict(config.episode_source),
    }


def config_from_dict(data: dict, base_dir: Path | None = None, model: BuildingModel | None = None) -> EnvConfig:
    """Build an EnvConfig from its JSON form.

    ``model`` overrides whatever the document carries.  The document's
    ``model`` field may be an inline object or a path to a model file
    (resolved against ``base_dir``).
    """
    raw_model = data.get("model")
    if model is None:
        if raw_model is None:
            raise ConfigError("config has no model and none was supplied")
        if isinstance(raw_model, str):
            path = Path(raw_model)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            model = load_model(path)
        else:
            model = model_from_dict(raw_model)
    kwargs = {}
    for key in ("history_len", "dt", "max_force"):
        if key in data:
            kwargs[key] = data[key]
    if data.get("instrumented_stories") is not None:
        kwargs["instrumented_stories"] = tuple(data["instrumented_stories"])
    if "reward_weights" in data:
        kwargs["reward_weights"] = tuple(data["reward_weights"])
    if "reward_scales" in data:
        kwargs["reward_scales"] = tuple(data["reward_scales"])
    source = episode_source_from_dict(data.get("episode_source"), base_dir)
    return EnvConfig(model=model, episode_source=source, **kwargs)


def save_config(config: EnvConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")


def load_config(path, model: BuildingModel | None = None) -> EnvConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"environment config not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"environment config is not valid JSON: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent, model=model)
