from datetime import datetime, timezone
from typing import Any

from sqlmodel import SQLModel, Field, Relationship, Column, JSON, Enum as SMEnum

from ..constants import LABEL_MAX_LENGTH, PATH_MAX_LENGTH, SCENE_NAME_MAX_LENGTH
from ..custom_types import EvaluationMode


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)

# --- EvaluationRun models ---

class EvaluationRunBase(SQLModel):
    """
    Base model for stored evaluation runs.

    Attributes:
        scene_name (str): Evaluated scene. Indexed for lookup.
        mode (EvaluationMode): per_sequence, lifelong or pair, stored as a
            non-native enum so any SQL backend accepts it.
        manifest_path (str): Manifest the run was computed from.
        scale_free (bool): Whether similarity alignment was used.
        label (str | None): Free-form note set by the user.
        scene_cr (float | None): Span-weighted scene CR; None in pair mode.
        scene_ate_rmse (float | None): Pooled scene ATE RMSE.
        created_at (datetime): When the run was stored (UTC).
    """
    scene_name: str = Field(max_length=SCENE_NAME_MAX_LENGTH, index=True)
    mode: EvaluationMode = Field(
        sa_column=Column(
            SMEnum(
                EvaluationMode,
                name="evaluation_mode",
                native_enum=False,
                values_callable=lambda x: [e.value for e in x]
            )
        )
    )
    manifest_path: str = Field(max_length=PATH_MAX_LENGTH)
    scale_free: bool = False
    label: str | None = Field(default=None, max_length=LABEL_MAX_LENGTH)
    scene_cr: float | None = None
    scene_ate_rmse: float | None = None
    created_at: datetime = Field(default_factory=_utc_now)

class EvaluationRun(EvaluationRunBase, table=True):
    """
    Database model of an evaluation run.

    Inherits from EvaluationRunBase and adds:
        id (int | None): Primary key.
        report (dict): The full report document, JSON-serialized.
        sequences (list["SequenceResult"]): Per-sequence results, deleted with the run.
    """
    __tablename__ = "evaluation_runs"

    id: int | None = Field(default=None, primary_key=True)
    report: dict[str, Any] = Field(default_factory=dict, sa_column=Column(JSON))
    sequences: list["SequenceResult"] = Relationship(
        back_populates="run",
        sa_relationship_kwargs={"cascade": "all, delete-orphan", "order_by": "SequenceResult.position"}
    )

class EvaluationRunCreate(SQLModel):
    """
    Request to evaluate a scene and store the result.

    Attributes:
        manifest_path (str): Scene manifest readable by the server.
        estimate_paths (list[str]): Estimate files in manifest order, or one directory.
        mode (EvaluationMode): Evaluation mode.
        epsilon (float | None): ATE threshold override, meters.
        phi (float | None): AOE threshold override, degrees.
        delta (float | None): Validity window override, seconds.
        tau (float | None): Re-localization decay override, seconds.
        scale_free (bool): Similarity alignment.
        pairs (list[tuple[str, str]] | None): Pairs to score in pair mode.
        label (str | None): Note stored with the run.
    """
    manifest_path: str = Field(min_length=1, max_length=PATH_MAX_LENGTH)
    estimate_paths: list[str] = Field(min_length=1)
    mode: EvaluationMode = EvaluationMode.PER_SEQUENCE
    epsilon: float | None = None
    phi: float | None = None
    delta: float | None = None
    tau: float | None = None
    scale_free: bool = False
    pairs: list[tuple[str, str]] | None = None
    label: str | None = Field(default=None, max_length=LABEL_MAX_LENGTH)

class EvaluationRunPublic(EvaluationRunBase):
    """
    Model for exposing EvaluationRun data publicly.

    Inherits from EvaluationRunBase and adds:
        id (int): The unique identifier of the run.
    """
    id: int

class EvaluationRunUpdate(SQLModel):
    """Model for updating EvaluationRun entries; only the label is editable."""
    label: str | None = Field(default=None, max_length=LABEL_MAX_LENGTH)

# --- SequenceResult models ---

class SequenceResultBase(SQLModel):
    """
    Base model for the stored result of one sequence of a run.

    Attributes:
        run_id (int): Foreign key to EvaluationRun.id.
        position (int): Index in manifest order, from 0.
        sequence_id (str): Sequence identifier.
        t_min (float): Start of the data span.
        t_max (float): End of the data span.
        estimate_count (int): Associated estimates.
        cr (float): Correct Rate.
        cr_t (float | None): Correct Rate of Tracking.
        cs_r (float): Re-localization score.
        cr_unbounded (float): CR with unbounded thresholds.
        ate_rmse (float | None): ATE RMSE over all associated estimates.
        gated_ate_rmse (float | None): ATE RMSE over correct estimates.
        gated_rpe_rmse (float | None): RPE RMSE over correct estimate pairs.
        failure (str | None): Why the sequence could not be evaluated.
    """
    run_id: int = Field(foreign_key="evaluation_runs.id", index=True)
    position: int = Field(ge=0)
    sequence_id: str = Field(max_length=SCENE_NAME_MAX_LENGTH)
    t_min: float
    t_max: float
    estimate_count: int = 0
    cr: float
    cr_t: float | None = None
    cs_r: float
    cr_unbounded: float = 0.0
    ate_rmse: float | None = None
    gated_ate_rmse: float | None = None
    gated_rpe_rmse: float | None = None
    failure: str | None = None

class SequenceResult(SequenceResultBase, table=True):
    """
    Database model of a sequence result.

    Inherits from SequenceResultBase and adds:
        id (int | None): Primary key.
        run (EvaluationRun): Relationship back to the run.
    """
    __tablename__ = "sequence_results"

    id: int | None = Field(default=None, primary_key=True)
    run: EvaluationRun = Relationship(back_populates="sequences")

class SequenceResultPublic(SequenceResultBase):
    id: int

# --- Combined models for nested relationships ---

class EvaluationRunPublicWithSequences(EvaluationRunPublic):
    """Model combining EvaluationRunPublic with its sequence results."""
    sequences: list[SequenceResultPublic] = []

class EvaluationRunFull(EvaluationRunPublicWithSequences):
    """Model combining the sequence results with the stored report document."""
    report: dict[str, Any] = {}

# --- Stateless requests ---

class SyncRequest(SQLModel):
    """
    Offset estimation between two trajectory files readable by the server.

    Attributes:
        reference_path (str): Reference trajectory.
        target_path (str): Trajectory whose clock offset is sought.
        window (float | None): Half-width of the search, seconds.
        coarse_step (float | None): Grid step, seconds.
        resolution (float | None): Refinement tolerance, seconds.
    """
    reference_path: str = Field(min_length=1, max_length=PATH_MAX_LENGTH)
    target_path: str = Field(min_length=1, max_length=PATH_MAX_LENGTH)
    window: float | None = Field(default=None, gt=0)
    coarse_step: float | None = Field(default=None, gt=0)
    resolution: float | None = Field(default=None, gt=0)
