"""Controlled-vs-uncontrolled performance ratios and signal energies.

Four ratios per earthquake: peak story drift (per story), peak absolute
story acceleration (per story), control-force energy over uncontrolled
base-shear energy (scalar), and peak story shear (per story).  Multiple
earthquakes aggregate by the arithmetic mean per story.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import BuildingModel, ResponseHistory, story_responses
from .errors import ContractError, ShearctlError


class UndefinedRatioError(ShearctlError):
    """Denominator of a performance ratio is identically zero."""


DRIFT_RATIO = "J1"
ACCEL_RATIO = "J2"
ENERGY_RATIO = "J3"
SHEAR_RATIO = "J4"


@dataclass(frozen=True, eq=False)
class MetricsReport:
    earthquake: str
    drift_ratio: np.ndarray
    accel_ratio: np.ndarray
    energy_ratio: float
    shear_ratio: np.ndarray

    @property
    def n_stories(self) -> int:
        return self.drift_ratio.shape[0]


@dataclass(frozen=True, eq=False)
class SuiteSummary:
    earthquakes: tuple[str, ...]
    drift_ratio: np.ndarray
    accel_ratio: np.ndarray
    energy_ratio: float
    shear_ratio: np.ndarray


def signal_energy(series, dt: float) -> float:
    """Trapezoidal quadrature of |x(t)|^2 over the record duration."""
    if dt <= 0.0:
        raise ContractError("dt must be positive")
    series = np.asarray(series, dtype=float)
    return float(np.trapezoid(series * series, dx=dt))


def peak_ratio(controlled: np.ndarray, uncontrolled: np.ndarray) -> np.ndarray:
    """Per-column max |controlled| / max |uncontrolled|."""
    controlled = np.atleast_2d(np.asarray(controlled, dtype=float).T).T
    uncontrolled = np.atleast_2d(np.asarray(uncontrolled, dtype=float).T).T
    if controlled.shape != uncontrolled.shape:
        raise ContractError(
            f"paired histories differ in shape: {controlled.shape} vs {uncontrolled.shape}"
        )
    denom = np.max(np.abs(uncontrolled), axis=0)
    if np.any(denom == 0.0):
        raise UndefinedRatioError("uncontrolled peak is zero; ratio undefined")
    return np.max(np.abs(controlled), axis=0) / denom


def j1_j2(
    controlled_drift, uncontrolled_drift, controlled_accel, uncontrolled_accel
) -> tuple[np.ndarray, np.ndarray]:
    """Per-story peak-drift and peak-acceleration ratios."""
    return (
        peak_ratio(controlled_drift, uncontrolled_drift),
        peak_ratio(controlled_accel, uncontrolled_accel),
    )


def j3(control_forces, uncontrolled_base_shear, dt: float) -> float:
    """Summed per-actuator force energy over uncontrolled base-shear energy."""
    forces = np.atleast_2d(np.asarray(control_forces, dtype=float).T).T
    denom = signal_energy(uncontrolled_base_shear, dt)
    if denom == 0.0:
        raise UndefinedRatioError("uncontrolled base-shear energy is zero")
    total = sum(signal_energy(forces[:, i], dt) for i in range(forces.shape[1]))
    return total / denom


def j4(controlled_shear, uncontrolled_shear) -> np.ndarray:
    """Per-story peak story-shear ratio."""
    return peak_ratio(controlled_shear, uncontrolled_shear)


def compute_metrics(
    controlled: ResponseHistory,
    uncontrolled: ResponseHistory,
    model: BuildingModel,
    earthquake: str,
) -> MetricsReport:
    """All four ratios from one paired (controlled, uncontrolled) run."""
    if len(controlled) != len(uncontrolled) or controlled.dt != uncontrolled.dt:
        raise ContractError("controlled/uncontrolled histories are not aligned")
    isd_c, shear_c = story_responses(controlled, model)
    isd_u, shear_u = story_responses(uncontrolled, model)
    drift, accel = j1_j2(
        isd_c, isd_u, controlled.abs_accel, uncontrolled.abs_accel
    )
    energy = j3(controlled.forces, shear_u[:, 0], controlled.dt)
    shear = j4(shear_c, shear_u)
    return MetricsReport(
        earthquake=earthquake,
        drift_ratio=drift,
        accel_ratio=accel,
        energy_ratio=energy,
        shear_ratio=shear,
    )


def aggregate(reports: list[MetricsReport]) -> SuiteSummary:
    """Arithmetic mean of each metric across earthquakes."""
    if not reports:
        raise ContractError("nothing to aggregate")
    n = reports[0].n_stories
    if any(r.n_stories != n for r in reports):
        raise ContractError("reports mix different story counts")
    return SuiteSummary(
        earthquakes=tuple(r.earthquake for r in reports),
        drift_ratio=np.mean([r.drift_ratio for r in reports], axis=0),
        accel_ratio=np.mean([r.accel_ratio for r in reports], axis=0),
        energy_ratio=float(np.mean([r.energy_ratio for r in reports])),
        shear_ratio=np.mean([r.shear_ratio for r in reports], axis=0),
    )


# -- tabular output ----------------------------------------------------------
#
# metrics.csv      one row per earthquake/metric/story (J3 uses story "total";
#                  its force-energy sum convention is noted in the header)
# summary.csv      per-story mean over earthquakes
# plot_data.csv    wide layout: metric,story,<one column per earthquake>,mean


def _rows(report: MetricsReport):
    for story, value in enumerate(report.drift_ratio, start=1):
        yield DRIFT_RATIO, str(story), value
    for story, value in enumerate(report.accel_ratio, start=1):
        yield ACCEL_RATIO, str(story), value
    yield ENERGY_RATIO, "total", report.energy_ratio
    for story, value in enumerate(report.shear_ratio, start=1):
        yield SHEAR_RATIO, str(story), value


def write_metrics_csv(reports: list[MetricsReport], path) -> None:
    lines = [
        "# J3 sums signal energy over all actuators",
        "earthquake,metric,story,value",
    ]
    for report in reports:
        for metric, story, value in _rows(report):
            lines.append(f"{report.earthquake},{metric},{story},{repr(float(value))}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(summary: SuiteSummary, path) -> None:
    lines = ["metric,story,mean"]
    fake = MetricsReport(
        earthquake="",
        drift_ratio=summary.drift_ratio,
        accel_ratio=summary.accel_ratio,
        energy_ratio=summary.energy_ratio,
        shear_ratio=summary.shear_ratio,
    )
    for metric, story, value in _rows(fake):
        lines.append(f"{metric},{story},{repr(float(value))}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(reports: list[MetricsReport], summary: SuiteSummary, path) -> None:
    names = [r.earthquake for r in reports]
    lines = ["metric,story," + ",".join(names) + ",mean"]
    per_story = [
        (DRIFT_RATIO, "drift_ratio"),
        (ACCEL_RATIO, "accel_ratio"),
        (ENERGY_RATIO, "energy_ratio"),
        (SHEAR_RATIO, "shear_ratio"),
    ]
    for metric, attr in per_story:
        if metric == ENERGY_RATIO:
            values = [repr(float(getattr(r, attr))) for r in reports]
            lines.append(
                f"{metric},total," + ",".join(values) + f",{repr(float(getattr(summary, attr)))}"
            )
            continue
        n = reports[0].n_stories
        for story in range(n):
            values = [repr(float(getattr(r, attr)[story])) for r in reports]
            lines.append(
                f"{metric},{story + 1},"
                + ",".join(values)
                + f",{repr(float(getattr(summary, attr)[story]))}"
            )
    Path(path).write_text("\n".join(lines) + "\n")
