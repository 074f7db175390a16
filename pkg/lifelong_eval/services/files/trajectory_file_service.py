"""
Trajectory files: one pose per line, "timestamp tx ty tz qx qy qz qw"
(seconds, meters, unit quaternion scalar-last). Lines starting with '#' and
blank lines are skipped.
"""
import logging
import math
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TextIO

import numpy as np

from lifelong_eval.constants import TIMESTAMP_DECIMALS
from lifelong_eval.exceptions import InvalidRecordError, TrajectoryOrderError, TrajectoryParseError
from lifelong_eval.models.trajectory import Trajectory

logger = logging.getLogger(__name__)

FIELD_COUNT: int = 8
HEADER: str = "# timestamp tx ty tz qx qy qz qw"


def parse_trajectory(
        stream: Iterable[str] | TextIO,
        source_label: str = "",
        frame_id: str = "map"
) -> Trajectory:
    """
    Parse a trajectory from a stream of text lines.

    Quaternions are renormalized on ingest; records are never reordered.

    Args:
        stream (Iterable[str] | TextIO): Lines of the file.
        source_label (str): Label kept on the trajectory and used in error messages.
        frame_id (str): Frame the poses are expressed in.

    Returns:
        Trajectory: The validated trajectory.

    Raises:
        TrajectoryParseError: On a wrong field count or a non-numeric/non-finite field.
        TrajectoryOrderError: When a timestamp does not increase strictly.
        InvalidRecordError: On a zero-norm quaternion.
    """
    rows: list[list[float]] = []
    previous_time: float | None = None
    previous_line: int = 0

    for line_number, raw_line in enumerate(stream, start=1):
        line: str = raw_line.strip()
        if not line or line.startswith("#"):
            continue

        fields: list[str] = line.split()
        if len(fields) != FIELD_COUNT:
            raise TrajectoryParseError(
                f"expected {FIELD_COUNT} fields 'timestamp tx ty tz qx qy qz qw', got {len(fields)}",
                line_number, source_label or None,
            )

        try:
            values: list[float] = [float(field) for field in fields]
        except ValueError as e:
            raise TrajectoryParseError(f"non-numeric field: {e}", line_number, source_label or None) from e
        if not all(math.isfinite(v) for v in values):
            raise TrajectoryParseError("non-finite value", line_number, source_label or None)

        timestamp: float = values[0]
        if previous_time is not None and timestamp <= previous_time:
            raise TrajectoryOrderError(
                f"timestamp {fields[0]} does not increase after {previous_time!r} (line {previous_line})",
                line_number, source_label or None,
            )

        norm: float = math.sqrt(sum(v * v for v in values[4:]))
        if norm == 0.0:
            raise InvalidRecordError("zero-norm quaternion", line_number, source_label or None)

        rows.append(values)
        previous_time, previous_line = timestamp, line_number

    if not rows:
        logger.warning("Trajectory %s has no records", source_label or "<stream>")
        return Trajectory.empty(frame_id, source_label)

    data: np.ndarray = np.array(rows, dtype=float)
    quaternions: np.ndarray = data[:, 4:8] / np.linalg.norm(data[:, 4:8], axis=1, keepdims=True)
    return Trajectory(data[:, 0], data[:, 1:4], quaternions, frame_id, source_label)

def serialize_trajectory(trajectory: Trajectory) -> str:
    """
    Render a trajectory in the 8-field text format.

    Timestamps are printed at fixed precision; pose values use the shortest
    representation that parses back to the same float.
    """
    lines: list[str] = [HEADER]
    for timestamp, position, quaternion in zip(trajectory.timestamps, trajectory.positions, trajectory.quaternions):
        values: str = " ".join(repr(float(v)) for v in (*position, *quaternion))
        lines.append(f"{float(timestamp):.{TIMESTAMP_DECIMALS}f} {values}")
    return "\n".join(lines) + "\n"

def load_trajectory(path: Path | str, frame_id: str = "map", source_label: str | None = None) -> Trajectory:
    """
    Read a trajectory file.

    Raises:
        OSError: If the file cannot be read.
        TrajectoryParseError: See `parse_trajectory`; the message names the file and line.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as stream:
        return parse_trajectory(stream, source_label or str(path), frame_id)

def load_trajectories(paths: list[Path], frame_id: str = "map", max_workers: int = 1) -> list[Trajectory]:
    """Load several files, concurrently when `max_workers` > 1; results keep the input order."""
    if max_workers <= 1:
        return [load_trajectory(path, frame_id) for path in paths]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda p: load_trajectory(p, frame_id), paths))

def save_trajectory(trajectory: Trajectory, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_trajectory(trajectory), encoding="utf-8")
