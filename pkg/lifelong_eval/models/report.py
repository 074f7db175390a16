from typing import Any

from sqlmodel import SQLModel, Field

from ..constants import REPORT_SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION
from ..custom_types import CorrectnessStatus, EvaluationMode, EventKind
from .config import MetricConfig, TransformPublic
from .evaluation import Meters, PairEvaluation, Score, Seconds, SequenceEvaluation

# --- Timeline models ---

class TimelineSegment(SQLModel):
    """
    Stretch of a sequence with one correctness status.

    Attributes:
        start (float): Seconds, inclusive.
        end (float): Seconds, exclusive except for the last segment of a sequence.
        status (CorrectnessStatus): correct, incorrect or absent (no valid estimate).
    """
    start: Seconds
    end: Seconds
    status: CorrectnessStatus

class TimelineEvent(SQLModel):
    """
    Initialization or re-localization: the first estimate after no output.

    Attributes:
        time (float): Timestamp of the estimate.
        kind (EventKind): Initialization for the first estimate of a run, re-localization otherwise.
        correct (bool): Whether that estimate is correct.
    """
    time: Seconds
    kind: EventKind
    correct: bool

class SequenceTimeline(SQLModel):
    """Segments partitioning [t_min, t_max] of one sequence, and its events."""
    sequence_id: str
    t_min: Seconds
    t_max: Seconds
    segments: list[TimelineSegment] = Field(default_factory=list)
    events: list[TimelineEvent] = Field(default_factory=list)

# --- Report document ---

class ReportDocument(SQLModel):
    """
    Versioned structured report of one evaluation.

    Attributes:
        schema_version (str): Version of this document layout.
        tool (str): Producing tool.
        tool_version (str): Its version.
        scene_name (str): Evaluated scene.
        mode (EvaluationMode): per_sequence, lifelong or pair.
        manifest (dict[str, Any]): Echo of the scene manifest.
        metric_config (MetricConfig): Thresholds in effect.
        scene_cr (float | None): Span-weighted scene CR.
        scene_ate_rmse (float | None): Pooled scene ATE RMSE.
        propagation_transform (TransformPublic | None): Lifelong alignment of sequence 1.
        sequences (list[SequenceEvaluation]): Per-sequence results, manifest order.
        timelines (list[SequenceTimeline]): Correctness timelines, manifest order.
        pairs (list[PairEvaluation]): Controlled-factor pair results (pair mode).
    """
    schema_version: str = REPORT_SCHEMA_VERSION
    tool: str = TOOL_NAME
    tool_version: str = TOOL_VERSION
    scene_name: str
    mode: EvaluationMode
    manifest: dict[str, Any] = Field(default_factory=dict)
    metric_config: MetricConfig
    scene_cr: Score | None = None
    scene_ate_rmse: Meters | None = None
    propagation_transform: TransformPublic | None = None
    sequences: list[SequenceEvaluation] = Field(default_factory=list)
    timelines: list[SequenceTimeline] = Field(default_factory=list)
    pairs: list[PairEvaluation] = Field(default_factory=list)
