"""
Immutable rigid-body values shared by every service.

Quaternions are stored scalar-first on the value objects (w, x, y, z) and
exchanged scalar-last (x, y, z, w) with numpy/scipy arrays and trajectory files.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import QUATERNION_NORM_TOLERANCE
from ..exceptions import InvalidInputError


@dataclass(frozen=True)
class Rotation:
    """
    Unit quaternion. Normalized on construction.

    Attributes:
        w (float): Scalar part.
        x (float): First vector component.
        y (float): Second vector component.
        z (float): Third vector component.
    """
    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self) -> None:
        components: tuple[float, ...] = (self.w, self.x, self.y, self.z)
        if not all(math.isfinite(c) for c in components):
            raise InvalidInputError(f"Quaternion has non-finite components: {components}")

        norm: float = math.sqrt(sum(c * c for c in components))
        if norm == 0.0:
            raise InvalidInputError("Quaternion has zero norm")

        # Already unit quaternions keep their exact bits
        if abs(norm - 1.0) > QUATERNION_NORM_TOLERANCE / 10:
            object.__setattr__(self, "w", float(self.w / norm))
            object.__setattr__(self, "x", float(self.x / norm))
            object.__setattr__(self, "y", float(self.y / norm))
            object.__setattr__(self, "z", float(self.z / norm))

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_xyzw(cls, quaternion: np.ndarray | tuple[float, ...]) -> "Rotation":
        qx, qy, qz, qw = (float(c) for c in quaternion)
        return cls(qw, qx, qy, qz)

    @classmethod
    def from_axis_angle(cls, axis: tuple[float, float, float], degrees: float) -> "Rotation":
        """
        Build a rotation of `degrees` about `axis` (any non-zero length).

        Raises:
            InvalidInputError: If the axis has zero length.
        """
        axis_array: np.ndarray = np.asarray(axis, dtype=float)
        length: float = float(np.linalg.norm(axis_array))
        if length == 0.0:
            raise InvalidInputError("Rotation axis has zero length")
        half: float = math.radians(degrees) / 2.0
        vector: np.ndarray = axis_array / length * math.sin(half)
        return cls(math.cos(half), float(vector[0]), float(vector[1]), float(vector[2]))

    def as_xyzw(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.w], dtype=float)

    def negated(self) -> "Rotation":
        """The other quaternion of the double cover; the same physical rotation."""
        return Rotation(-self.w, -self.x, -self.y, -self.z)


def _as_vector(values: tuple[float, ...] | np.ndarray) -> tuple[float, float, float]:
    vector: tuple[float, ...] = tuple(float(v) for v in values)
    if len(vector) != 3:
        raise InvalidInputError(f"Translation must have 3 components, got {len(vector)}")
    if not all(math.isfinite(v) for v in vector):
        raise InvalidInputError(f"Translation has non-finite components: {vector}")
    return vector  # type: ignore[return-value]


@dataclass(frozen=True)
class RigidTransform:
    """
    Rotation followed by translation (meters).

    Attributes:
        rotation (Rotation): Orientation part.
        translation (tuple[float, float, float]): Position part, meters.
    """
    rotation: Rotation = field(default_factory=Rotation.identity)
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "translation", _as_vector(self.translation))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @property
    def position(self) -> np.ndarray:
        return np.array(self.translation, dtype=float)


@dataclass(frozen=True)
class SimilarityTransform:
    """
    Scaled rigid transform: x -> scale * R x + t.

    With scale 1 it acts exactly like the RigidTransform with the same rotation
    and translation.

    Attributes:
        scale (float): Positive scale factor.
        rotation (Rotation): Rotation part.
        translation (tuple[float, float, float]): Offset, meters.
    """
    scale: float = 1.0
    rotation: Rotation = field(default_factory=Rotation.identity)
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not math.isfinite(self.scale) or self.scale <= 0.0:
            raise InvalidInputError(f"Similarity scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "translation", _as_vector(self.translation))

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls()

    @property
    def rigid(self) -> RigidTransform:
        """Rotation and translation without the scale."""
        return RigidTransform(self.rotation, self.translation)


@dataclass(frozen=True)
class Pose:
    """
    A timestamped rigid-body transform in a named frame.

    Attributes:
        timestamp (float): Seconds.
        transform (RigidTransform): Pose of the body in `frame_id`.
        frame_id (str): Name of the reference frame.
    """
    timestamp: float
    transform: RigidTransform
    frame_id: str = "map"

    def __post_init__(self) -> None:
        if not math.isfinite(self.timestamp):
            raise InvalidInputError(f"Pose timestamp is not finite: {self.timestamp}")
