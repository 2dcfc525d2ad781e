"""Manifest-driven evaluation runs: controller vs. uncontrolled, per record.

A run manifest names the model, environment config, controller, excitation
files, output directory, and seed.  Each excitation is simulated twice
(uncontrolled and controlled), metrics are computed, and everything is
written as deterministic CSV so identical manifests produce byte-identical
outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, lqg, metrics
from .environment import EnvConfig, Environment, config_from_dict, rollout
from .errors import ConfigError, ShearctlError
from .excitation import load_record, resample
from .models import load_model
from .policy import MlpController, ZeroController, load_policy


@dataclass(frozen=True)
class ExcitationSpec:
    path: str
    units: str | None = None
    fmt: str | None = None
    scale: float = 1.0


@dataclass(frozen=True)
class RunManifest:
    controller: dict
    excitations: tuple[ExcitationSpec, ...]
    output_dir: str
    seed: int = 0
    model_path: str | None = None
    env_config_path: str | None = None
    base_dir: Path = field(default_factory=Path)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def manifest_from_dict(data: dict, base_dir: Path) -> RunManifest:
    try:
        raw_exc = data["excitations"]
        controller = data["controller"]
        output_dir = data["output_dir"]
    except KeyError as exc:
        raise ConfigError(f"manifest is missing required key {exc}") from exc
    specs = []
    for item in raw_exc:
        if isinstance(item, str):
            specs.append(ExcitationSpec(path=item))
        else:
            specs.append(
                ExcitationSpec(
                    path=item["path"],
                    units=item.get("units"),
                    fmt=item.get("format"),
                    scale=float(item.get("scale", 1.0)),
                )
            )
    if not specs:
        raise ConfigError("manifest lists no excitations")
    if not isinstance(controller, dict) or "type" not in controller:
        raise ConfigError("manifest controller must be an object with a 'type'")
    return RunManifest(
        controller=controller,
        excitations=tuple(specs),
        output_dir=output_dir,
        seed=int(data.get("seed", 0)),
        model_path=data.get("model"),
        env_config_path=data.get("env_config"),
        base_dir=base_dir,
    )


def load_manifest(path) -> tuple[RunManifest, str]:
    """Read a manifest file; returns (manifest, sha256 of its canonical form)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest is not valid JSON: {exc}") from exc
    digest = hashlib.sha256(
        json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return manifest_from_dict(data, base_dir=path.parent.resolve()), digest


def build_env_config(manifest: RunManifest) -> EnvConfig:
    model = None
    if manifest.model_path is not None:
        model = load_model(manifest.resolve(manifest.model_path))
    if manifest.env_config_path is not None:
        cfg_path = manifest.resolve(manifest.env_config_path)
        if not cfg_path.exists():
            raise ConfigError(f"environment config not found: {cfg_path}")
        data = json.loads(cfg_path.read_text())
        return config_from_dict(data, base_dir=cfg_path.parent, model=model)
    if model is None:
        raise ConfigError("manifest needs a model file or an env config with a model")
    return EnvConfig(model=model)


def build_controller(spec: dict, config: EnvConfig):
    """Instantiate the controller named by a manifest controller spec.

    Returns (controller, design_or_None); the LQG design is returned so the
    caller can archive it.
    """
    kind = spec.get("type")
    if kind == "zero":
        return ZeroController(config.act_dim), None
    if kind == "lqg":
        mats = dynamics.assemble_matrices(config.model)
        design = lqg.design_lqg(
            mats,
            dt=config.dt,
            weights=config.reward_weights,
            scales=config.reward_scales,
            measured_stories=config.instrumented_stories,
            process_noise=float(spec.get("process_noise", 1.0)),
            measurement_noise=float(spec.get("measurement_noise", 1e-4)),
        )
        return lqg.LqgController(design, config.max_force), design
    if kind == "policy":
        path = spec.get("path")
        if not path:
            raise ConfigError("policy controller spec needs a path")
        policy = load_policy(path, expected_layout=config.layout)
        return MlpController(policy), None
    raise ConfigError(f"unknown controller type {kind!r}")


def write_history_csv(
    history: dynamics.ResponseHistory, model, path
) -> None:
    """Full response time series as CSV (drifts and shears included)."""
    isd, shear = dynamics.story_responses(history, model)
    n = history.x.shape[1]
    n_act = history.forces.shape[1]
    cols = (
        ["t", "ag"]
        + [f"x{j}" for j in range(1, n + 1)]
        + [f"v{j}" for j in range(1, n + 1)]
        + [f"a{j}" for j in range(1, n + 1)]
        + [f"aa{j}" for j in range(1, n + 1)]
        + [f"isd{j}" for j in range(1, n + 1)]
        + [f"shear{j}" for j in range(1, n + 1)]
        + [f"u{j}" for j in range(1, n_act + 1)]
    )
    blocks = np.hstack(
        [
            history.t[:, None],
            history.ag[:, None],
            history.x,
            history.v,
            history.a,
            history.abs_accel,
            isd,
            shear,
            history.forces,
        ]
    )
    lines = [",".join(cols)]
    for row in blocks:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


def run_evaluation(manifest: RunManifest, manifest_hash: str | None = None) -> metrics.SuiteSummary:
    """Execute a manifest; writes metric CSVs, plot data, and histories.

    A failure in any excitation aborts the run after logging which record
    failed (out/errors.log).
    """
    config = build_env_config(manifest)
    for spec in manifest.excitations:
        path = manifest.resolve(spec.path)
        if not path.exists():
            raise ConfigError(f"excitation file not found: {path}")
    out = manifest.resolve(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    controller, design = build_controller(manifest.controller, config)
    if design is not None:
        lqg.dump_design(design, out / "lqg_design.json")

    env = Environment(config)
    model = config.model
    reports = []
    for index, spec in enumerate(manifest.excitations):
        label = f"{index:02d}-{_slug(Path(spec.path).stem)}"
        try:
            record = load_record(manifest.resolve(spec.path), fmt=spec.fmt, units=spec.units)
            if spec.scale != 1.0:
                record = record.scaled(spec.scale)
            record = resample(record, config.dt)
            uncontrolled = dynamics.simulate(model, record)
            controlled, _ = rollout(
                env, controller, episode_source=record, seed=manifest.seed
            )
            report = metrics.compute_metrics(controlled, uncontrolled, model, label)
            write_history_csv(uncontrolled, model, out / f"response_{label}_uncontrolled.csv")
            write_history_csv(controlled, model, out / f"response_{label}_controlled.csv")
            reports.append(report)
        except ShearctlError as exc:
            (out / "errors.log").write_text(
                f"excitation {spec.path!r} failed: {exc}\n"
            )
            raise
    summary = metrics.aggregate(reports)
    metrics.write_metrics_csv(reports, out / "metrics.csv")
    metrics.write_summary_csv(summary, out / "summary.csv")
    metrics.write_plot_data(reports, summary, out / "plot_data.csv")
    if manifest_hash is not None:
        (out / "manifest_hash.txt").write_text(manifest_hash + "\n")
    return summary


def run_evaluation_file(path) -> metrics.SuiteSummary:
    manifest, digest = load_manifest(path)
    return run_evaluation(manifest, manifest_hash=digest)
