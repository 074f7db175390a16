import math
from typing import Annotated, Any

from pydantic import PlainSerializer, field_validator, model_validator
from sqlmodel import SQLModel, Field

from ..constants import DEFAULT_DELTA, DEFAULT_EPSILON, DEFAULT_PHI, DEFAULT_RPE_INTERVAL, DEFAULT_TAU, \
    SCENE_EPSILON, METRIC_DECIMALS
from ..custom_types import RPEUnit, SceneKind
from .geometry import Rotation, SimilarityTransform


def _threshold_to_json(value: float) -> float | str:
    # JSON has no infinity; unbounded thresholds travel as the string "inf"
    return "inf" if math.isinf(value) else round(value, METRIC_DECIMALS)


Threshold = Annotated[float, PlainSerializer(_threshold_to_json, when_used="json")]

# --- Transform models ---

class TransformPublic(SQLModel):
    """
    Serializable form of a similarity transform.

    Attributes:
        scale (float): Positive scale factor, 1 for rigid transforms.
        rotation (list[float]): Unit quaternion as [w, x, y, z].
        translation (list[float]): Translation in meters.
    """
    scale: float = Field(default=1.0, gt=0)
    rotation: list[float] = Field(default_factory=lambda: [1.0, 0.0, 0.0, 0.0], min_length=4, max_length=4)
    translation: list[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)

    @classmethod
    def from_transform(cls, transform: SimilarityTransform) -> "TransformPublic":
        rotation: Rotation = transform.rotation
        return cls(
            scale=transform.scale,
            rotation=[rotation.w, rotation.x, rotation.y, rotation.z],
            translation=list(transform.translation),
        )

    def to_transform(self) -> SimilarityTransform:
        return SimilarityTransform(self.scale, Rotation(*self.rotation), tuple(self.translation))

# --- Metric configuration ---

class MetricConfig(SQLModel):
    """
    Thresholds and windows of the correctness and accuracy metrics.

    Attributes:
        epsilon (float): ATE threshold in meters; may be infinite.
        phi (float): AOE threshold in degrees; may be infinite.
        delta (float): Seconds a correct estimate stays valid.
        tau (float): Re-localization score decay, seconds.
        rpe_interval (float): RPE pair separation, seconds or frames per `rpe_unit`.
        rpe_unit (RPEUnit): Unit of `rpe_interval`.
    """
    epsilon: Threshold = Field(default=DEFAULT_EPSILON, gt=0)
    phi: Threshold = Field(default=DEFAULT_PHI, gt=0)
    delta: float = Field(default=DEFAULT_DELTA, gt=0)
    tau: float = Field(default=DEFAULT_TAU, gt=0)
    rpe_interval: float = Field(default=DEFAULT_RPE_INTERVAL, gt=0)
    rpe_unit: RPEUnit = RPEUnit.SECONDS

    @field_validator("delta", "tau", "rpe_interval")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @classmethod
    def for_scene(cls, kind: SceneKind, **values: Any) -> "MetricConfig":
        """Defaults for a scene kind; explicit values win."""
        values.setdefault("epsilon", SCENE_EPSILON.get(kind.value, DEFAULT_EPSILON))
        return cls.model_validate(values)

    def with_overrides(self, **overrides: float | None) -> "MetricConfig":
        """Copy with the non-None overrides applied and validated."""
        data: dict[str, Any] = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return MetricConfig.model_validate(data)

# --- Scene manifest ---

class SequenceEntry(SQLModel):
    """
    One sequence of a scene.

    Attributes:
        sequence_id (str): Identifier, unique within the scene.
        ground_truth_path (str): Path to the ground-truth trajectory file.
        t_min (float): Start of the data span, seconds.
        t_max (float): End of the data span, seconds.
    """
    sequence_id: str = Field(min_length=1)
    ground_truth_path: str = Field(min_length=1)
    t_min: float
    t_max: float

    @model_validator(mode="after")
    def _check_span(self) -> "SequenceEntry":
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)) or self.t_min >= self.t_max:
            raise ValueError(f"invalid span [{self.t_min}, {self.t_max}] for sequence {self.sequence_id}")
        return self

    @property
    def span(self) -> float:
        return self.t_max - self.t_min

class SceneManifest(SQLModel):
    """
    A scene: its ordered sequences, ground truth and metric configuration.

    Attributes:
        scene_name (str): Scene name.
        scene_kind (SceneKind): Scene kind; picks the default ATE threshold.
        frame_id (str): Persistent frame of the ground truth.
        sequences (list[SequenceEntry]): Sequences in playback order.
        metric_config (MetricConfig): Thresholds for this scene.
        sensor_extrinsic (TransformPublic | None): Ground truth -> estimating sensor frame.
        pairs (list[tuple[str, str]]): Controlled-factor sequence pairs.
        perturbation (PerturbationSpec | None): Perturbation used by the synthetic generator.
    """
    scene_name: str = Field(min_length=1)
    scene_kind: SceneKind = SceneKind.CUSTOM
    frame_id: str = "map"
    sequences: list[SequenceEntry] = Field(min_length=1)
    metric_config: MetricConfig = Field(default_factory=MetricConfig)
    sensor_extrinsic: TransformPublic | None = None
    pairs: list[tuple[str, str]] = Field(default_factory=list)
    perturbation: "PerturbationSpec | None" = None

    @model_validator(mode="after")
    def _check_sequences(self) -> "SceneManifest":
        ids: list[str] = [s.sequence_id for s in self.sequences]
        duplicates: set[str] = {i for i in ids if ids.count(i) > 1}
        if duplicates:
            raise ValueError(f"duplicate sequence ids: {sorted(duplicates)}")

        for previous, current in zip(self.sequences, self.sequences[1:]):
            if current.t_min < previous.t_max:
                raise ValueError(
                    f"sequence {current.sequence_id} starts at {current.t_min} before "
                    f"{previous.sequence_id} ends at {previous.t_max}"
                )

        for first, second in self.pairs:
            for sequence_id in (first, second):
                if sequence_id not in ids:
                    raise ValueError(f"pair references unknown sequence {sequence_id}")
        return self

    def sequence(self, sequence_id: str) -> SequenceEntry:
        for entry in self.sequences:
            if entry.sequence_id == sequence_id:
                return entry
        raise KeyError(sequence_id)

# --- Synthetic perturbations ---

class PerturbationSpec(SQLModel):
    """
    Controlled perturbation of a trajectory, applied in this fixed order:
    time shift, rigid/similarity offset, linear drift, i.i.d. noise, dropouts, jump.

    Attributes:
        rigid_offset (TransformPublic): Frame change applied to every pose.
        time_shift (float): Seconds added to every timestamp.
        drift_rate (float): Meters per second of accumulated position drift.
        drift_direction (list[float]): Direction of the position drift.
        drift_yaw_rate (float): Degrees per second of heading drift about z.
        noise_sigma (float): Meters, per-axis position noise in the body frame.
        noise_sigma_rotation (float): Degrees, per-axis rotation-vector noise in the body frame.
        dropout_windows (list[tuple[float, float]]): [t_a, t_b) windows without output.
        jump_time (float | None): Time from which a constant displacement is added.
        jump_displacement (list[float] | None): The displacement, meters.
    """
    rigid_offset: TransformPublic = Field(default_factory=TransformPublic)
    time_shift: float = 0.0
    drift_rate: float = Field(default=0.0, ge=0)
    drift_direction: list[float] = Field(default_factory=lambda: [1.0, 0.0, 0.0], min_length=3, max_length=3)
    drift_yaw_rate: float = 0.0
    noise_sigma: float = Field(default=0.0, ge=0)
    noise_sigma_rotation: float = Field(default=0.0, ge=0)
    dropout_windows: list[tuple[float, float]] = Field(default_factory=list)
    jump_time: float | None = None
    jump_displacement: list[float] | None = Field(default=None, min_length=3, max_length=3)

    @model_validator(mode="after")
    def _check_windows(self) -> "PerturbationSpec":
        windows: list[tuple[float, float]] = sorted(self.dropout_windows)
        for start, end in windows:
            if start >= end:
                raise ValueError(f"dropout window [{start}, {end}] is empty")
        for (_, previous_end), (next_start, _) in zip(windows, windows[1:]):
            if next_start < previous_end:
                raise ValueError("dropout windows overlap")
        if (self.jump_time is None) != (self.jump_displacement is None):
            raise ValueError("jump_time and jump_displacement go together")
        if self.drift_rate > 0 and not any(c != 0.0 for c in self.drift_direction):
            raise ValueError("drift_direction must be non-zero when drifting")
        return self

    @property
    def is_identity(self) -> bool:
        return self == PerturbationSpec()


SceneManifest.model_rebuild()
