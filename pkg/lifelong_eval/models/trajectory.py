from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError, TrajectoryOrderError

# Loaded quaternions are renormalized; anything further off was built by hand
TRAJECTORY_NORM_TOLERANCE: float = 1e-6


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Time-ordered sequence of poses with metadata.

    The arrays are made read-only on construction.

    Attributes:
        timestamps (np.ndarray): (N,) seconds, strictly increasing.
        positions (np.ndarray): (N, 3) meters.
        quaternions (np.ndarray): (N, 4) unit quaternions, scalar-last (x, y, z, w).
        frame_id (str): Frame the poses are expressed in.
        source_label (str): Where the trajectory came from (file name, algorithm...).
    """
    timestamps: np.ndarray
    positions: np.ndarray
    quaternions: np.ndarray
    frame_id: str = "map"
    source_label: str = ""

    def __post_init__(self) -> None:
        timestamps: np.ndarray = np.array(self.timestamps, dtype=float).reshape(-1)
        positions: np.ndarray = np.array(self.positions, dtype=float).reshape(-1, 3)
        quaternions: np.ndarray = np.array(self.quaternions, dtype=float).reshape(-1, 4)

        if not (len(timestamps) == len(positions) == len(quaternions)):
            raise InvalidInputError(
                f"Trajectory arrays disagree in length: {len(timestamps)} timestamps, "
                f"{len(positions)} positions, {len(quaternions)} quaternions"
            )
        if not (np.all(np.isfinite(timestamps)) and np.all(np.isfinite(positions))
                and np.all(np.isfinite(quaternions))):
            raise InvalidInputError("Trajectory contains non-finite values")

        steps: np.ndarray = np.diff(timestamps)
        if np.any(steps <= 0.0):
            index: int = int(np.argmax(steps <= 0.0)) + 1
            raise TrajectoryOrderError(
                f"timestamps must be strictly increasing (record {index}: "
                f"{timestamps[index]!r} after {timestamps[index - 1]!r})"
            )

        norms: np.ndarray = np.linalg.norm(quaternions, axis=1)
        if np.any(np.abs(norms - 1.0) > TRAJECTORY_NORM_TOLERANCE):
            raise InvalidInputError("Trajectory quaternions must be unit-norm")

        for array in (timestamps, positions, quaternions):
            array.setflags(write=False)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "quaternions", quaternions)

    @classmethod
    def empty(cls, frame_id: str = "map", source_label: str = "") -> "Trajectory":
        return cls(np.empty(0), np.empty((0, 3)), np.empty((0, 4)), frame_id, source_label)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def is_empty(self) -> bool:
        return len(self.timestamps) == 0

    @property
    def start(self) -> float:
        return float(self.timestamps[0])

    @property
    def end(self) -> float:
        return float(self.timestamps[-1])

    def replace(self, **changes) -> "Trajectory":
        """Copy with some arrays or metadata swapped; validation runs again."""
        values: dict = {
            "timestamps": self.timestamps,
            "positions": self.positions,
            "quaternions": self.quaternions,
            "frame_id": self.frame_id,
            "source_label": self.source_label,
        }
        values.update(changes)
        return Trajectory(**values)

    def select(self, mask: np.ndarray) -> "Trajectory":
        return self.replace(
            timestamps=self.timestamps[mask],
            positions=self.positions[mask],
            quaternions=self.quaternions[mask],
        )

    def within(self, t_min: float, t_max: float) -> "Trajectory":
        """Records with t_min <= t <= t_max."""
        return self.select((self.timestamps >= t_min) & (self.timestamps <= t_max))

    def shifted(self, offset: float) -> "Trajectory":
        return self.replace(timestamps=self.timestamps + offset)
