"""Building-model JSON files and the five-story benchmark fixture."""

from __future__ import annotations

import json
from pathlib import Path

from .dynamics import BuildingModel
from .errors import FormatError


def benchmark_model() -> BuildingModel:
    """Five-story benchmark: 1%/5% damping at modes 1/5, actuators at 1, 3, 5."""
    return BuildingModel(
        masses=(25e3, 20e3, 20e3, 18e3, 15e3),
        stiffnesses=(5e6, 4e6, 4e6, 3e6, 3e6),
        damping_spec=((1, 0.01), (5, 0.05)),
        actuator_stories=(1, 3, 5),
    )


def model_to_dict(model: BuildingModel) -> dict:
    if model.damping_spec is None:
        damping = None
    else:
        (mi, zi), (mj, zj) = model.damping_spec
        damping = {"mode_i": mi, "zeta_i": zi, "mode_j": mj, "zeta_j": zj}
    return {
        "n_stories": model.n_stories,
        "masses": list(model.masses),
        "stiffnesses": list(model.stiffnesses),
        "damping": damping,
        "actuator_stories": list(model.actuator_stories),
    }


def model_from_dict(data: dict) -> BuildingModel:
    try:
        damping = data["damping"]
        spec = None
        if damping is not None:
            spec = (
                (damping["mode_i"], damping["zeta_i"]),
                (damping["mode_j"], damping["zeta_j"]),
            )
        model = BuildingModel(
            masses=data["masses"],
            stiffnesses=data["stiffnesses"],
            damping_spec=spec,
            actuator_stories=data.get("actuator_stories", ()),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad building model document: {exc}") from exc
    declared = data.get("n_stories")
    if declared is not None and declared != model.n_stories:
        raise FormatError(
            f"n_stories={declared} does not match {model.n_stories} mass entries"
        )
    return model


def save_model(model: BuildingModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> BuildingModel:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"model file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(data)
