"""CSV and JSON artifacts for profiles, trajectories and run reports."""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from simprof.constants import CsvConfig
from simprof.models import CurveSet, FluxSet, Profile, RunReport, Trajectory

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _format(value: float) -> str:
    return CsvConfig.FLOAT_FORMAT.format(float(value))


def write_csv(curves: CurveSet, path: PathLike) -> Path:
    """Write curves as CSV with a header row, LF line endings and 17 significant digits.

    Raises:
        OSError: If the path cannot be written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator=CsvConfig.LINE_TERMINATOR)
        writer.writerow([curves.x_label, *curves.names])
        columns = [curves.columns[name] for name in curves.names]
        for i, x in enumerate(curves.x):
            writer.writerow([_format(x), *(_format(column[i]) for column in columns)])
    logger.info("wrote %s", path)
    return path


def read_csv(path: PathLike, title: str = "") -> CurveSet:
    """Read a curve file written by `write_csv`.

    Raises:
        ValueError: If the file has no header or no data rows
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2 or len(rows[0]) < 2:
        msg = f"{path} holds no curve data"
        raise ValueError(msg)
    header, body = rows[0], rows[1:]
    data = np.array([[float(cell) for cell in row] for row in body], dtype=float)
    columns = {name: data[:, k + 1] for k, name in enumerate(header[1:])}
    return CurveSet(header[0], data[:, 0], columns, title or path.stem)


def _plain(value: Any) -> Any:
    """JSON-compatible copy; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_report(report: RunReport, path: PathLike) -> Path:
    """Write the run report as indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_plain(report.to_dict()), indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("wrote %s (status %s)", path, report.status)
    return path


def profile_curves(profile: Profile, title: str = "") -> CurveSet:
    """One column per profile component against y."""
    columns = {label: profile.component(k) for k, label in enumerate(profile.labels)}
    return CurveSet("y", profile.y, columns, title)


def flux_curves(fluxes: FluxSet, labels: tuple[str, ...], title: str = "") -> CurveSet:
    """Diffusive fluxes Q_j and reaction multipliers Lambda_r against y."""
    columns: dict[str, Any] = {}
    for j, label in enumerate(labels):
        columns[f"Q_{label}"] = fluxes.diffusive[:, j]
    for r in range(fluxes.multipliers.shape[1]):
        columns[f"Lambda{r + 1}"] = fluxes.multipliers[:, r]
    return CurveSet("y", fluxes.grid.nodes, columns, title)


def write_trajectory_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """Write all snapshots in long format with columns t, x and one column per field component."""
    if not trajectory.snapshots:
        msg = "trajectory has no snapshots to write"
        raise ValueError(msg)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = trajectory.labels or tuple(f"u{k + 1}" for k in range(trajectory.snapshots[0].components))
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator=CsvConfig.LINE_TERMINATOR)
        writer.writerow(["t", "x", *labels])
        for snap in trajectory.snapshots:
            t = _format(snap.t)
            for x, row in zip(snap.x, snap.values):
                writer.writerow([t, _format(x), *(_format(v) for v in row)])
    logger.info("wrote %s (%d snapshots)", path, len(trajectory.snapshots))
    return path


def write_zero_tracks_csv(trajectory: Trajectory, path: PathLike) -> Path:
    """Write tracked zeros as rows (track, t, x, speed, terminated)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator=CsvConfig.LINE_TERMINATOR)
        writer.writerow(["track", "t", "x", "speed", "terminated"])
        for index, track in enumerate(trajectory.zero_tracks):
            for t, x, speed in zip(track.times, track.positions, track.speeds()):
                writer.writerow([index, _format(t), _format(x), _format(speed), int(track.terminated)])
    logger.info("wrote %s (%d tracks)", path, len(trajectory.zero_tracks))
    return path
