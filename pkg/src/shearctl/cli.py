"""Command-line entry points.

Subcommands: ``config init``, ``simulate``, ``evaluate``, ``serve``,
``generate-excitation``, ``inspect-policy``.  Exit code 0 on success, 1 on
a toolkit error (message on stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import dynamics, evaluation, lqg, metrics, protocol
from .environment import (
    EnvConfig,
    Environment,
    GeneratorSource,
    load_config,
    rollout,
    save_config,
)
from .errors import ConfigError, ShearctlError
from .excitation import (
    TrainingExcitationConfig,
    generate_training_excitation,
    load_record,
    resample,
    save_record,
)
from .models import benchmark_model, load_model, save_model
from .policy import MlpController, ZeroController, load_policy, mlp_forward, policy_to_dict


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shearctl",
        description="Simulate and evaluate active control of shear buildings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_config = sub.add_parser("config", help="configuration file helpers")
    config_sub = p_config.add_subparsers(dest="config_command", required=True)
    p_init = config_sub.add_parser(
        "init", help="write the default environment config (five-story benchmark)"
    )
    p_init.add_argument("--out", default="env.json", help="environment config path")
    p_init.add_argument("--model-out", help="also write the standalone model file")

    p_sim = sub.add_parser("simulate", help="run one record through the building")
    p_sim.add_argument("--record", required=True, help="ground-motion file")
    p_sim.add_argument("--units", choices=["g", "m/s2", "cm/s2"], help="record units")
    p_sim.add_argument("--format", dest="fmt", choices=["csv", "strong-motion"])
    p_sim.add_argument("--scale", type=float, default=1.0, help="amplitude factor")
    p_sim.add_argument("--model", help="building model JSON")
    p_sim.add_argument("--env", help="environment config JSON")
    p_sim.add_argument("--dt", type=float, help="integration step (default from config)")
    p_sim.add_argument(
        "--controller",
        default="zero",
        help="zero | lqg | policy:FILE (default: zero, i.e. uncontrolled)",
    )
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="response CSV path")

    p_eval = sub.add_parser("evaluate", help="run a full evaluation manifest")
    p_eval.add_argument("--manifest", required=True, help="run manifest JSON")

    p_serve = sub.add_parser("serve", help="serve environments over the wire protocol")
    p_serve.add_argument("--env", required=True, help="environment config JSON")
    p_serve.add_argument("--model", help="building model JSON (overrides config)")
    mode = p_serve.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    mode.add_argument(
        "--port",
        type=int,
        nargs="?",
        const=-1,
        help=f"TCP port (default ${{SHEARCTL_PORT}} or {protocol.DEFAULT_PORT})",
    )
    p_serve.add_argument("--host", default="127.0.0.1")

    p_gen = sub.add_parser(
        "generate-excitation", help="write a noise-plus-impulse training record"
    )
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--duration", type=float, default=15.0)
    p_gen.add_argument("--dt", type=float, default=0.01)
    p_gen.add_argument("--noise-std", type=float, default=0.25)
    p_gen.add_argument("--impulse-rate", type=float, default=0.2)
    p_gen.add_argument("--impulse-amp-min", type=float, default=0.5)
    p_gen.add_argument("--impulse-amp-max", type=float, default=2.0)
    p_gen.add_argument("--impulse-width", type=int, default=1)

    p_inspect = sub.add_parser("inspect-policy", help="validate and describe a policy file")
    p_inspect.add_argument("policy", help="portable policy JSON")
    p_inspect.add_argument("--env", help="check layout against this environment config")
    p_inspect.add_argument(
        "--probe",
        help="JSON file with {\"observations\": [[...], ...]}; prints actions as JSON",
    )
    return parser


def _load_env_config(env_path, model_path) -> EnvConfig:
    model = load_model(model_path) if model_path else None
    if env_path:
        return load_config(env_path, model=model)
    if model is not None:
        return EnvConfig(model=model)
    raise ConfigError("need --model and/or --env")


def _parse_controller(spec: str, config: EnvConfig):
    if spec == "zero":
        return ZeroController(config.act_dim)
    if spec == "lqg":
        design = lqg.design_lqg(
            dynamics.assemble_matrices(config.model),
            dt=config.dt,
            weights=config.reward_weights,
            scales=config.reward_scales,
            measured_stories=config.instrumented_stories,
        )
        return lqg.LqgController(design, config.max_force)
    if spec.startswith("policy:"):
        policy = load_policy(spec.split(":", 1)[1], expected_layout=config.layout)
        return MlpController(policy)
    raise ConfigError(f"unknown controller {spec!r} (zero | lqg | policy:FILE)")


def _cmd_config_init(args) -> int:
    config = EnvConfig(
        model=benchmark_model(),
        episode_source=GeneratorSource(TrainingExcitationConfig()),
    )
    save_config(config, args.out)
    print(f"wrote {args.out}")
    if args.model_out:
        save_model(config.model, args.model_out)
        print(f"wrote {args.model_out}")
    return 0


def _cmd_simulate(args) -> int:
    config = _load_env_config(args.env, args.model)
    if args.dt:
        import dataclasses

        config = dataclasses.replace(config, dt=args.dt)
    record = load_record(args.record, fmt=args.fmt, units=args.units)
    if args.scale != 1.0:
        record = record.scaled(args.scale)
    record = resample(record, config.dt)
    if args.controller == "zero":
        history = dynamics.simulate(config.model, record)
    else:
        controller = _parse_controller(args.controller, config)
        history, _ = rollout(
            Environment(config), controller, episode_source=record, seed=args.seed
        )
    evaluation.write_history_csv(history, config.model, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    summary = evaluation.run_evaluation_file(args.manifest)
    out = evaluation.load_manifest(args.manifest)[0]
    print(f"evaluated {len(summary.earthquakes)} excitation(s) -> {out.output_dir}")
    for metric, values in (
        (metrics.DRIFT_RATIO, summary.drift_ratio),
        (metrics.ACCEL_RATIO, summary.accel_ratio),
        (metrics.SHEAR_RATIO, summary.shear_ratio),
    ):
        body = " ".join(f"{v:.4f}" for v in values)
        print(f"  mean {metric} per story: {body}")
    print(f"  mean {metrics.ENERGY_RATIO}: {summary.energy_ratio:.6f}")
    return 0


def _cmd_serve(args) -> int:
    config = _load_env_config(args.env, args.model)
    if args.stdio:
        protocol.serve_stdio(config)
        return 0
    port = args.port
    if port == -1 or port is None:
        port = int(os.environ.get("SHEARCTL_PORT", protocol.DEFAULT_PORT))
    print(f"serving on {args.host}:{port}", file=sys.stderr)
    protocol.serve_tcp(config, host=args.host, port=port)
    return 0


def _cmd_generate_excitation(args) -> int:
    config = TrainingExcitationConfig(
        duration=args.duration,
        dt=args.dt,
        noise_std=args.noise_std,
        impulse_rate=args.impulse_rate,
        impulse_amp_range=(args.impulse_amp_min, args.impulse_amp_max),
        impulse_width=args.impulse_width,
        seed=args.seed,
    )
    save_record(generate_training_excitation(config), args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_inspect_policy(args) -> int:
    expected = None
    if args.env:
        expected = load_config(args.env).layout
    policy = load_policy(args.policy, expected_layout=expected)
    if args.probe:
        data = json.loads(Path(args.probe).read_text())
        actions = [mlp_forward(policy, obs).tolist() for obs in data["observations"]]
        print(json.dumps({"actions": actions}))
        return 0
    doc = policy_to_dict(policy)
    shapes = " -> ".join(
        [str(policy.input_dim)] + [str(l["rows"]) for l in doc["layers"]]
    )
    print(f"schema:      {doc['schema']}")
    print(f"layers:      {shapes}")
    print(f"activations: {', '.join(l['activation'] for l in doc['layers'])}")
    print(f"obs layout:  {doc['obs_layout']}")
    if doc["metadata"]:
        print(f"metadata:    {json.dumps(doc['metadata'], sort_keys=True)}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
    "generate-excitation": _cmd_generate_excitation,
    "inspect-policy": _cmd_inspect_policy,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "config":
            return _cmd_config_init(args)
        return _COMMANDS[args.command](args)
    except ShearctlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
