"""
Structured reports: assembly from evaluation results, correctness timelines,
JSON emission at a chosen detail level and per-pose CSV export.
"""
import logging
from pathlib import Path
from typing import Any

import pandas as pd

from lifelong_eval.constants import METRIC_DECIMALS, TIMESTAMP_DECIMALS
from lifelong_eval.custom_types import CorrectnessStatus, EvaluationMode, EventKind
from lifelong_eval.models.config import MetricConfig, SceneManifest
from lifelong_eval.models.evaluation import PairEvaluation, PoseError, SceneEvaluation, SequenceEvaluation
from lifelong_eval.models.report import ReportDocument, SequenceTimeline, TimelineEvent, TimelineSegment
from lifelong_eval.views.report_views import ReportView

logger = logging.getLogger(__name__)

CSV_COLUMNS: list[str] = ["sequence_id", "timestamp", "ate", "aoe", "correct"]


def _status(correct: bool) -> CorrectnessStatus:
    return CorrectnessStatus.CORRECT if correct else CorrectnessStatus.INCORRECT

def build_timeline(
        evaluation: SequenceEvaluation,
        delta: float,
        first_event: EventKind = EventKind.INITIALIZATION
) -> SequenceTimeline:
    """
    Correctness timeline of one sequence.

    Each estimate at t_k holds its status until the next estimate or for at
    most `delta` seconds, whichever comes first; uncovered time is absent.
    Adjacent segments with the same status are merged, so the segments
    partition [t_min, t_max] without overlap. The first estimate is an event of
    kind `first_event`; any estimate following more than `delta` seconds
    without output is a re-localization.

    Args:
        evaluation (SequenceEvaluation): Result carrying the per-pose errors.
        delta (float): Validity window of an estimate, seconds.
        first_event (EventKind): Kind of the first estimate's event.

    Returns:
        SequenceTimeline: Segments and events in time order.
    """
    t_min, t_max = evaluation.t_min, evaluation.t_max
    errors: list[PoseError] = evaluation.timeline
    pieces: list[tuple[float, float, CorrectnessStatus]] = []
    events: list[TimelineEvent] = []

    if errors:
        pieces.append((t_min, errors[0].timestamp, CorrectnessStatus.ABSENT))
    else:
        pieces.append((t_min, t_max, CorrectnessStatus.ABSENT))

    for index, error in enumerate(errors):
        following: float = errors[index + 1].timestamp if index + 1 < len(errors) else t_max
        valid_until: float = min(following, error.timestamp + delta)
        pieces.append((error.timestamp, valid_until, _status(error.correct)))
        pieces.append((valid_until, following, CorrectnessStatus.ABSENT))

        if index == 0:
            events.append(TimelineEvent(time=error.timestamp, kind=first_event, correct=error.correct))
        elif error.timestamp - errors[index - 1].timestamp > delta:
            events.append(TimelineEvent(time=error.timestamp, kind=EventKind.RELOCALIZATION, correct=error.correct))

    segments: list[TimelineSegment] = []
    for start, end, status in pieces:
        if end <= start:
            continue
        if segments and segments[-1].status == status and segments[-1].end == start:
            segments[-1].end = end
        else:
            segments.append(TimelineSegment(start=start, end=end, status=status))

    return SequenceTimeline(sequence_id=evaluation.sequence_id, t_min=t_min, t_max=t_max,
                            segments=segments, events=events)

def manifest_echo(manifest: SceneManifest) -> dict[str, Any]:
    return manifest.model_dump(mode="json", exclude={"perturbation"})

def build_report(scene: SceneEvaluation, manifest: SceneManifest) -> ReportDocument:
    """
    Assemble the report of a per-sequence or lifelong scene evaluation.

    In lifelong mode the first estimate of every sequence after the first is a
    re-localization event.
    """
    timelines: list[SequenceTimeline] = []
    for index, evaluation in enumerate(scene.per_sequence):
        first_event: EventKind = (
            EventKind.RELOCALIZATION if scene.mode == EvaluationMode.LIFELONG and index > 0
            else EventKind.INITIALIZATION
        )
        timelines.append(build_timeline(evaluation, scene.metric_config.delta, first_event))

    return ReportDocument(
        scene_name=scene.scene_name,
        mode=scene.mode,
        manifest=manifest_echo(manifest),
        metric_config=scene.metric_config,
        scene_cr=scene.scene_cr,
        scene_ate_rmse=scene.scene_ate_rmse,
        propagation_transform=scene.propagation_transform,
        sequences=scene.per_sequence,
        timelines=timelines,
    )

def build_pair_report(manifest: SceneManifest, pairs: list[PairEvaluation], config: MetricConfig) -> ReportDocument:
    return ReportDocument(
        scene_name=manifest.scene_name,
        mode=EvaluationMode.PAIR,
        manifest=manifest_echo(manifest),
        metric_config=config,
        pairs=pairs,
    )

def _exclusions(view: ReportView) -> dict[str, Any] | None:
    match view:
        case ReportView.SUMMARY:
            return {"timelines": True, "sequences": {"__all__": {"timeline"}}}
        case ReportView.WITH_TIMELINE:
            return {"sequences": {"__all__": {"timeline"}}}
        case ReportView.FULL:
            return None
        case _:
            raise ValueError(f"Invalid view type: {view}")

def report_payload(document: ReportDocument, view: ReportView = ReportView.WITH_TIMELINE) -> dict[str, Any]:
    """JSON-ready dictionary of the document at a detail level; numbers rounded for output."""
    return document.model_dump(mode="json", exclude=_exclusions(view))

def render_report(document: ReportDocument, view: ReportView = ReportView.WITH_TIMELINE) -> str:
    """
    JSON text of the document. Identical documents give identical text.
    """
    return document.model_dump_json(indent=2, exclude=_exclusions(view)) + "\n"

def parse_report(text: str) -> ReportDocument:
    return ReportDocument.model_validate_json(text)

def save_report(document: ReportDocument, path: Path | str, view: ReportView = ReportView.WITH_TIMELINE) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(document, view), encoding="utf-8")
    logger.info("Report written to %s", path)

def pose_errors_frame(document: ReportDocument) -> pd.DataFrame:
    """
    One row per associated estimate of every sequence, in manifest and time order.
    """
    rows: list[dict[str, Any]] = [
        {
            "sequence_id": evaluation.sequence_id,
            "timestamp": error.timestamp,
            "ate": error.ate,
            "aoe": error.aoe,
            "correct": error.correct,
        }
        for evaluation in document.sequences
        for error in evaluation.timeline
    ]
    frame: pd.DataFrame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    return frame.round({"timestamp": TIMESTAMP_DECIMALS, "ate": METRIC_DECIMALS, "aoe": METRIC_DECIMALS})

def save_pose_errors(document: ReportDocument, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pose_errors_frame(document).to_csv(path, index=False)
    logger.info("Per-pose errors written to %s", path)
