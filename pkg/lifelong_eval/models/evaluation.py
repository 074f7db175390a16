from collections.abc import Sequence
from dataclasses import dataclass
from typing import Annotated, overload

import numpy as np
from pydantic import PlainSerializer
from sqlmodel import SQLModel, Field

from ..constants import METRIC_DECIMALS, SCORE_DECIMALS
from ..custom_types import AlignmentMethod, EvaluationMode
from .config import MetricConfig, TransformPublic
from .geometry import RigidTransform, Rotation, SimilarityTransform

# Values keep full precision in memory; rounding happens on JSON output only
Meters = Annotated[float, PlainSerializer(lambda v: round(v, METRIC_DECIMALS), when_used="json")]
Seconds = Annotated[float, PlainSerializer(lambda v: round(v, METRIC_DECIMALS), when_used="json")]
Degrees = Annotated[float, PlainSerializer(lambda v: round(v, METRIC_DECIMALS), when_used="json")]
Score = Annotated[float, PlainSerializer(lambda v: round(v, SCORE_DECIMALS), when_used="json")]

# --- Association and alignment values ---

@dataclass(frozen=True)
class AssociatedPair:
    """
    An estimated pose and the ground truth interpolated at its timestamp.

    Attributes:
        timestamp (float): Seconds, inside the ground-truth coverage.
        estimate (RigidTransform): Estimated pose.
        ground_truth (RigidTransform): Interpolated ground-truth pose.
    """
    timestamp: float
    estimate: RigidTransform
    ground_truth: RigidTransform


@dataclass(frozen=True, eq=False)
class Association(Sequence[AssociatedPair]):
    """
    The associated pairs of one estimate/ground-truth couple, held as arrays.

    Behaves as a read-only sequence of AssociatedPair.

    Attributes:
        timestamps (np.ndarray): (M,) seconds.
        estimate_positions (np.ndarray): (M, 3).
        estimate_quaternions (np.ndarray): (M, 4) scalar-last.
        ground_truth_positions (np.ndarray): (M, 3).
        ground_truth_quaternions (np.ndarray): (M, 4) scalar-last.
        dropped_count (int): Estimates outside the ground-truth coverage.
    """
    timestamps: np.ndarray
    estimate_positions: np.ndarray
    estimate_quaternions: np.ndarray
    ground_truth_positions: np.ndarray
    ground_truth_quaternions: np.ndarray
    dropped_count: int = 0

    def __len__(self) -> int:
        return len(self.timestamps)

    @overload
    def __getitem__(self, index: int) -> AssociatedPair: ...

    @overload
    def __getitem__(self, index: slice) -> "Association": ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return Association(
                self.timestamps[index],
                self.estimate_positions[index],
                self.estimate_quaternions[index],
                self.ground_truth_positions[index],
                self.ground_truth_quaternions[index],
                self.dropped_count,
            )
        return AssociatedPair(
            float(self.timestamps[index]),
            RigidTransform(Rotation.from_xyzw(self.estimate_quaternions[index]),
                           tuple(self.estimate_positions[index])),
            RigidTransform(Rotation.from_xyzw(self.ground_truth_quaternions[index]),
                           tuple(self.ground_truth_positions[index])),
        )

    @classmethod
    def from_pairs(cls, pairs: Sequence[AssociatedPair]) -> "Association":
        if isinstance(pairs, Association):
            return pairs
        return cls(
            np.array([p.timestamp for p in pairs], dtype=float),
            np.array([p.estimate.translation for p in pairs], dtype=float).reshape(-1, 3),
            np.array([p.estimate.rotation.as_xyzw() for p in pairs], dtype=float).reshape(-1, 4),
            np.array([p.ground_truth.translation for p in pairs], dtype=float).reshape(-1, 3),
            np.array([p.ground_truth.rotation.as_xyzw() for p in pairs], dtype=float).reshape(-1, 4),
        )


@dataclass(frozen=True)
class Alignment:
    """
    Transform mapping estimate positions onto the ground truth.

    Attributes:
        transform (SimilarityTransform): The fitted transform (scale 1 for Horn).
        residual_rmse (float): RMSE of the position residuals after alignment, meters.
        pair_count (int): Number of pairs used.
        method (AlignmentMethod): Which closed form produced it.
        degenerate (bool): The point set was collinear or coincident; best-effort result.
    """
    transform: SimilarityTransform
    residual_rmse: float
    pair_count: int
    method: AlignmentMethod = AlignmentMethod.HORN
    degenerate: bool = False

    @classmethod
    def identity(cls) -> "Alignment":
        return cls(SimilarityTransform.identity(), 0.0, 0)

# --- Metric results ---

class PoseError(SQLModel):
    """
    Errors of one aligned estimate against its ground truth.

    Attributes:
        timestamp (float): Seconds.
        ate (float): Position error, meters.
        aoe (float): Orientation error, degrees in [0, 180].
        correct (bool): ate <= epsilon and aoe <= phi.
    """
    timestamp: Seconds
    ate: Meters = Field(ge=0)
    aoe: Degrees = Field(ge=0, le=180)
    correct: bool

class RobustnessResult(SQLModel):
    """
    Correct Rate, Correct Rate of Tracking and re-localization score of one sequence.

    Attributes:
        cr (float): Correct Rate over [t_min, t_max].
        cr_t (float | None): Correct Rate over [t0, t_max]; None without estimates.
        cs_r (float): Re-localization score of the first estimate.
        t0 (float | None): First estimate timestamp.
        t_min (float): Start of the data span.
        t_max (float): End of the data span.
    """
    cr: Score = Field(ge=0, le=1)
    cr_t: Score | None = Field(default=None, ge=0, le=1)
    cs_r: Score = Field(ge=0, le=1)
    t0: Seconds | None = None
    t_min: Seconds
    t_max: Seconds

class AccuracyResult(SQLModel):
    """
    Accuracy statistics over correct estimates only.

    Attributes:
        gated_ate_rmse (float): ATE RMSE of correct poses, meters.
        gated_ate_mean (float): Mean ATE of correct poses.
        gated_ate_median (float): Median ATE of correct poses.
        gated_ate_max (float): Largest ATE among correct poses.
        gated_rpe_rmse (float | None): Translational RPE RMSE over correct pose pairs; None without pairs.
        sample_count (int): Number of correct poses.
        rpe_pair_count (int): Number of RPE pairs used.
    """
    gated_ate_rmse: Meters
    gated_ate_mean: Meters
    gated_ate_median: Meters
    gated_ate_max: Meters
    gated_rpe_rmse: Meters | None = None
    sample_count: int = Field(ge=1)
    rpe_pair_count: int = Field(default=0, ge=0)

class AlignmentPublic(SQLModel):
    """Serializable form of an Alignment."""
    transform: TransformPublic
    residual_rmse: Meters
    pair_count: int
    method: AlignmentMethod
    degenerate: bool = False

    @classmethod
    def from_alignment(cls, alignment: Alignment) -> "AlignmentPublic":
        return cls(
            transform=TransformPublic.from_transform(alignment.transform),
            residual_rmse=alignment.residual_rmse,
            pair_count=alignment.pair_count,
            method=alignment.method,
            degenerate=alignment.degenerate,
        )

class SequenceEvaluation(SQLModel):
    """
    Everything computed for one sequence.

    Attributes:
        sequence_id (str): Sequence identifier.
        t_min (float): Start of the data span.
        t_max (float): End of the data span.
        estimate_count (int): Estimates associated with ground truth.
        dropped_count (int): Estimates outside ground-truth coverage or data span.
        alignment (AlignmentPublic | None): Alignment used (own or propagated).
        robustness (RobustnessResult): CR, CR-T and CS-R.
        accuracy (AccuracyResult | None): Gated accuracy; None without correct poses.
        ate_rmse (float | None): ATE RMSE over all associated poses.
        cr_unbounded (float): CR with infinite thresholds, coverage only.
        timeline (list[PoseError]): Per-pose errors in time order.
        failure (str | None): Why the sequence could not be evaluated, if so.
    """
    sequence_id: str
    t_min: Seconds
    t_max: Seconds
    estimate_count: int = 0
    dropped_count: int = 0
    alignment: AlignmentPublic | None = None
    robustness: RobustnessResult
    accuracy: AccuracyResult | None = None
    ate_rmse: Meters | None = None
    cr_unbounded: Score = 0.0
    timeline: list[PoseError] = Field(default_factory=list)
    failure: str | None = None

    @property
    def span(self) -> float:
        return self.t_max - self.t_min

class SceneEvaluation(SQLModel):
    """
    Per-sequence results of a scene and their weighted aggregates.

    Attributes:
        scene_name (str): Scene name.
        mode (EvaluationMode): Per-sequence or lifelong.
        metric_config (MetricConfig): Thresholds used.
        per_sequence (list[SequenceEvaluation]): In manifest order.
        scene_cr (float): Span-weighted CR (CR^inf in per-sequence mode).
        scene_ate_rmse (float | None): Count-weighted pooled ATE RMSE (gated in lifelong mode).
        propagation_transform (TransformPublic | None): First-sequence alignment in lifelong mode.
    """
    scene_name: str
    mode: EvaluationMode
    metric_config: MetricConfig
    per_sequence: list[SequenceEvaluation] = Field(default_factory=list)
    scene_cr: Score = 0.0
    scene_ate_rmse: Meters | None = None
    propagation_transform: TransformPublic | None = None

class PairEvaluation(SQLModel):
    """
    Re-localization score of the second sequence of a controlled-factor pair.

    Attributes:
        first_id (str): Sequence whose alignment is propagated.
        second_id (str): Sequence being scored.
        cs_r (float): Re-localization score of the second sequence.
        t0 (float | None): First estimate of the second sequence.
        t_min (float): Start of the second sequence's data span.
        first_correct (bool | None): Correctness of that first estimate.
        metric_config (MetricConfig): Thresholds used.
    """
    first_id: str
    second_id: str
    cs_r: Score = Field(ge=0, le=1)
    t0: Seconds | None = None
    t_min: Seconds
    first_correct: bool | None = None
    metric_config: MetricConfig

class OffsetEstimate(SQLModel):
    """
    Time offset of a target trajectory's clock relative to a reference.

    The target is synchronized by subtracting `offset` from its timestamps.

    Attributes:
        offset (float): Seconds, within the search window.
        ate_rmse_at_optimum (float): ATE RMSE at `offset`, meters.
        search_window (tuple[float, float]): Probed offset range, seconds.
        resolution (float): Refinement tolerance, seconds.
        degenerate (bool): The objective was flat; the offset is indeterminate.
        probe_count (int): Offsets evaluated.
        excluded_count (int): Grid offsets skipped for insufficient overlap.
    """
    offset: Seconds
    ate_rmse_at_optimum: Meters = Field(ge=0)
    search_window: tuple[Seconds, Seconds]
    resolution: Seconds
    degenerate: bool = False
    probe_count: int = 0
    excluded_count: int = 0
