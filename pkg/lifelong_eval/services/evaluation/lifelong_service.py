"""
Per-sequence and lifelong scene evaluation.

Per-sequence mode aligns every sequence on its own. Lifelong mode aligns the
first sequence only and carries that transform to all later sequences, which
are assumed to be expressed in the algorithm's single persistent map frame.
"""
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lifelong_eval.constants import PAIR_EPSILON, PAIR_PHI, PAIR_TAU
from lifelong_eval.custom_types import AlignmentMethod, EvaluationMode
from lifelong_eval.exceptions import DegenerateScaleError, InvalidInputError, InvalidSpanError, NoOverlapError, \
    SceneEvaluationError, UnderdeterminedAlignmentError
from lifelong_eval.models.config import MetricConfig, SceneManifest, SequenceEntry, TransformPublic
from lifelong_eval.models.evaluation import Alignment, AlignmentPublic, Association, PairEvaluation, \
    PoseError, RobustnessResult, SceneEvaluation, SequenceEvaluation
from lifelong_eval.models.geometry import RigidTransform
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.evaluation import metrics_service
from lifelong_eval.services.geometry import align_service
from lifelong_eval.services.geometry.trajgeom_service import quaternion_multiply, rotate_vectors

logger = logging.getLogger(__name__)

# Failures that mean "this sequence produced nothing usable", not bad input
_UNJUDGEABLE = (NoOverlapError, UnderdeterminedAlignmentError, DegenerateScaleError)


def to_sensor_frame(ground_truth: Trajectory, extrinsic: TransformPublic | None) -> Trajectory:
    """
    Move ground-truth poses into the estimating sensor's frame: G -> G * X.
    """
    if extrinsic is None or ground_truth.is_empty:
        return ground_truth
    transform: RigidTransform = extrinsic.to_transform().rigid
    rotation: np.ndarray = transform.rotation.as_xyzw()
    positions: np.ndarray = ground_truth.positions + rotate_vectors(ground_truth.quaternions, transform.position)
    quaternions: np.ndarray = quaternion_multiply(ground_truth.quaternions, rotation)
    return ground_truth.replace(positions=positions, quaternions=quaternions)

def _associate_in_span(estimate: Trajectory, ground_truth: Trajectory, entry: SequenceEntry) -> Association:
    in_span: Trajectory = estimate.within(entry.t_min, entry.t_max)
    outside: int = len(estimate) - len(in_span)
    if outside:
        logger.warning("%d estimates of sequence %s lie outside its data span [%s, %s] and are dropped",
                       outside, entry.sequence_id, entry.t_min, entry.t_max)
    association: Association = align_service.associate(in_span, ground_truth)
    return Association(
        association.timestamps,
        association.estimate_positions,
        association.estimate_quaternions,
        association.ground_truth_positions,
        association.ground_truth_quaternions,
        association.dropped_count + outside,
    )

def _judge(
        entry: SequenceEntry,
        association: Association,
        alignment: Alignment,
        config: MetricConfig
) -> SequenceEvaluation:
    """Metrics of one associated sequence under a given alignment."""
    errors: list[PoseError] = metrics_service.pose_errors(association, alignment, config)
    cr, cr_t = metrics_service.correct_rate(errors, entry.t_min, entry.t_max, config.delta)
    cs_r: float = metrics_service.relocalization_score(errors, entry.t_min, config.tau)

    return SequenceEvaluation(
        sequence_id=entry.sequence_id,
        t_min=entry.t_min,
        t_max=entry.t_max,
        estimate_count=len(association),
        dropped_count=association.dropped_count,
        alignment=AlignmentPublic.from_alignment(alignment),
        robustness=RobustnessResult(
            cr=cr, cr_t=cr_t, cs_r=cs_r,
            t0=errors[0].timestamp if errors else None,
            t_min=entry.t_min, t_max=entry.t_max,
        ),
        accuracy=metrics_service.gated_accuracy(errors, association, config, alignment),
        ate_rmse=metrics_service.ate_rmse(errors),
        cr_unbounded=metrics_service.coverage_rate(association.timestamps, entry.t_min, entry.t_max, config.delta),
        timeline=errors,
    )

def unjudged_sequence(entry: SequenceEntry, reason: str, dropped_count: int = 0) -> SequenceEvaluation:
    """
    Result of a sequence without usable estimates: CR = 0, CS-R = 0.
    """
    return SequenceEvaluation(
        sequence_id=entry.sequence_id,
        t_min=entry.t_min,
        t_max=entry.t_max,
        dropped_count=dropped_count,
        robustness=RobustnessResult(cr=0.0, cr_t=None, cs_r=0.0, t0=None, t_min=entry.t_min, t_max=entry.t_max),
        failure=reason,
    )

def evaluate_sequence(
        estimate: Trajectory,
        ground_truth: Trajectory,
        config: MetricConfig,
        entry: SequenceEntry | None = None,
        scale_free: bool = False
) -> SequenceEvaluation:
    """
    Evaluate one sequence on its own: associate, align, judge.

    Args:
        estimate (Trajectory): Estimated trajectory.
        ground_truth (Trajectory): Ground truth in the estimating sensor's frame.
        config (MetricConfig): Thresholds.
        entry (SequenceEntry | None): Sequence id and data span; defaults to the
            ground-truth coverage.
        scale_free (bool): Fit a scale as well (Umeyama) for estimates without metric scale.

    Returns:
        SequenceEvaluation: Robustness, accuracy and the per-pose timeline.

    Raises:
        NoOverlapError: If no estimate falls in the ground-truth coverage.
        UnderdeterminedAlignmentError: With fewer than 3 associated estimates.
        DegenerateScaleError: In scale-free mode on motionless estimates.
        InvalidSpanError: If no entry is given and the ground truth spans no time.
    """
    if entry is None:
        if len(ground_truth) < 2 or ground_truth.start >= ground_truth.end:
            raise InvalidSpanError(
                f"Ground truth {ground_truth.source_label or ''} with {len(ground_truth)} samples spans no time; "
                f"give the sequence span explicitly"
            )
        entry = SequenceEntry(
            sequence_id=estimate.source_label or "sequence",
            ground_truth_path=ground_truth.source_label or "-",
            t_min=ground_truth.start,
            t_max=ground_truth.end,
        )

    association: Association = _associate_in_span(estimate, ground_truth, entry)
    alignment: Alignment = (
        align_service.align_umeyama(association) if scale_free else align_service.align_horn(association)
    )
    return _judge(entry, association, alignment, config)

def _ordered_map(function: Callable, items: Sequence, max_workers: int) -> list:
    if max_workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(function, items))

def evaluate_per_sequence(
        manifest: SceneManifest,
        estimates: Sequence[Trajectory],
        ground_truths: Sequence[Trajectory],
        config: MetricConfig | None = None,
        scale_free: bool = False,
        max_workers: int = 1
) -> SceneEvaluation:
    """
    Evaluate every sequence separately and aggregate the scene.

    Scene CR is CR with unbounded thresholds weighted by span; scene ATE RMSE
    pools all associated estimates. Sequences without usable estimates score 0.

    Args:
        manifest (SceneManifest): The scene.
        estimates (Sequence[Trajectory]): One estimate per sequence, manifest order.
        ground_truths (Sequence[Trajectory]): One ground truth per sequence, manifest order.
        config (MetricConfig | None): Overrides the manifest's thresholds.
        scale_free (bool): Use Umeyama alignment.
        max_workers (int): Sequences evaluated concurrently.

    Returns:
        SceneEvaluation: Per-sequence results in manifest order and aggregates.
    """
    config = config or manifest.metric_config
    _check_lengths(manifest, estimates, ground_truths)

    def run(index: int) -> SequenceEvaluation:
        entry: SequenceEntry = manifest.sequences[index]
        ground_truth: Trajectory = to_sensor_frame(ground_truths[index], manifest.sensor_extrinsic)
        try:
            return evaluate_sequence(estimates[index], ground_truth, config, entry, scale_free)
        except _UNJUDGEABLE as e:
            logger.warning("Sequence %s not evaluated: %s", entry.sequence_id, e)
            return unjudged_sequence(entry, str(e), len(estimates[index]))

    results: list[SequenceEvaluation] = _ordered_map(run, range(len(manifest.sequences)), max_workers)
    return aggregate_scene(manifest.scene_name, EvaluationMode.PER_SEQUENCE, config, results)

def evaluate_lifelong(
        manifest: SceneManifest,
        estimates: Sequence[Trajectory],
        ground_truths: Sequence[Trajectory],
        config: MetricConfig | None = None,
        scale_free: bool = False,
        max_workers: int = 1
) -> SceneEvaluation:
    """
    Lifelong evaluation: one alignment from the first sequence, propagated.

    The transform fitted on sequence 1 (with a scale only when `scale_free`)
    is applied unchanged to every sequence; it is never re-fitted per sequence.
    CS-R is computed per sequence from its own t_min. Sequences without
    estimates score CR = 0 and CS-R = 0.

    Args:
        manifest (SceneManifest): The scene, sequences in playback order.
        estimates (Sequence[Trajectory]): Estimates in the persistent map frame, manifest order.
        ground_truths (Sequence[Trajectory]): Ground truths, manifest order.
        config (MetricConfig | None): Overrides the manifest's thresholds.
        scale_free (bool): Fit a scale on sequence 1 and propagate it.
        max_workers (int): Sequences judged concurrently after the first alignment.

    Returns:
        SceneEvaluation: Per-sequence results and span/count weighted aggregates.

    Raises:
        SceneEvaluationError: If the first sequence cannot be aligned.
    """
    config = config or manifest.metric_config
    _check_lengths(manifest, estimates, ground_truths)
    sensor_truths: list[Trajectory] = [to_sensor_frame(gt, manifest.sensor_extrinsic) for gt in ground_truths]

    alignment: Alignment = propagation_alignment(
        manifest.sequences[0], estimates[0], sensor_truths[0], scale_free
    )

    def run(index: int) -> SequenceEvaluation:
        entry: SequenceEntry = manifest.sequences[index]
        try:
            association: Association = _associate_in_span(estimates[index], sensor_truths[index], entry)
        except NoOverlapError as e:
            logger.warning("Sequence %s has no estimates to judge: %s", entry.sequence_id, e)
            return unjudged_sequence(entry, str(e), len(estimates[index]))
        return _judge(entry, association, alignment, config)

    results: list[SequenceEvaluation] = _ordered_map(run, range(len(manifest.sequences)), max_workers)
    scene: SceneEvaluation = aggregate_scene(manifest.scene_name, EvaluationMode.LIFELONG, config, results)
    scene.propagation_transform = TransformPublic.from_transform(alignment.transform)
    return scene

def propagation_alignment(
        entry: SequenceEntry,
        estimate: Trajectory,
        ground_truth: Trajectory,
        scale_free: bool = False
) -> Alignment:
    """
    Alignment of a scene's first sequence, to be carried to the later ones.

    Raises:
        SceneEvaluationError: If the sequence cannot be associated or aligned.
    """
    try:
        association: Association = _associate_in_span(estimate, ground_truth, entry)
        method: AlignmentMethod = AlignmentMethod.UMEYAMA if scale_free else AlignmentMethod.HORN
        logger.info("Aligning first sequence %s with %s on %d pairs", entry.sequence_id, method.value, len(association))
        return align_service.align_umeyama(association) if scale_free else align_service.align_horn(association)
    except _UNJUDGEABLE as e:
        raise SceneEvaluationError(
            f"First sequence {entry.sequence_id} cannot be aligned, later sequences are unjudgeable: {e}"
        ) from e

def evaluate_pair(
        manifest: SceneManifest,
        first_id: str,
        second_id: str,
        estimates: dict[str, Trajectory],
        ground_truths: dict[str, Trajectory],
        config: MetricConfig | None = None
) -> PairEvaluation:
    """
    Re-localization score of the second sequence of a controlled-factor pair.

    The first sequence's alignment is propagated to the second; by default the
    judgment uses epsilon = 0.3 m, phi = inf and tau = 60 s.

    Args:
        manifest (SceneManifest): Scene holding both sequences.
        first_id (str): Sequence mapped first.
        second_id (str): Sequence that must re-localize.
        estimates (dict[str, Trajectory]): Estimates by sequence id, one map frame.
        ground_truths (dict[str, Trajectory]): Ground truths by sequence id.
        config (MetricConfig | None): Overrides the pair thresholds.

    Returns:
        PairEvaluation: CS-R of the second sequence.

    Raises:
        SceneEvaluationError: If the first sequence cannot be aligned.
    """
    config = config or pair_metric_config(manifest.metric_config)
    first_entry: SequenceEntry = manifest.sequence(first_id)
    second_entry: SequenceEntry = manifest.sequence(second_id)

    alignment: Alignment = propagation_alignment(
        first_entry, estimates[first_id], to_sensor_frame(ground_truths[first_id], manifest.sensor_extrinsic)
    )

    errors: list[PoseError] = []
    try:
        association: Association = _associate_in_span(
            estimates[second_id], to_sensor_frame(ground_truths[second_id], manifest.sensor_extrinsic), second_entry
        )
        errors = metrics_service.pose_errors(association, alignment, config)
    except NoOverlapError as e:
        logger.warning("Sequence %s never localizes: %s", second_id, e)

    return PairEvaluation(
        first_id=first_id,
        second_id=second_id,
        cs_r=metrics_service.relocalization_score(errors, second_entry.t_min, config.tau),
        t0=errors[0].timestamp if errors else None,
        t_min=second_entry.t_min,
        first_correct=errors[0].correct if errors else None,
        metric_config=config,
    )

def pair_metric_config(base: MetricConfig | None = None) -> MetricConfig:
    """The controlled-factor pair judgment: epsilon 0.3 m, phi unbounded, tau 60 s."""
    base = base or MetricConfig()
    return base.with_overrides(epsilon=PAIR_EPSILON, phi=PAIR_PHI, tau=PAIR_TAU)

def aggregate_scene(
        scene_name: str,
        mode: EvaluationMode,
        config: MetricConfig,
        results: list[SequenceEvaluation]
) -> SceneEvaluation:
    """
    Weighted scene aggregates.

    CR is averaged weighted by sequence span; per-sequence mode uses CR with
    unbounded thresholds, lifelong mode CR under the configured thresholds.
    ATE RMSE pools squared errors weighted by estimate counts: all associated
    estimates in per-sequence mode, only correct ones in lifelong mode.
    """
    spans: np.ndarray = np.array([r.span for r in results], dtype=float)
    if mode == EvaluationMode.PER_SEQUENCE:
        rates: np.ndarray = np.array([r.cr_unbounded for r in results], dtype=float)
        weighted: list[tuple[int, float]] = [
            (r.estimate_count, r.ate_rmse) for r in results if r.ate_rmse is not None and r.estimate_count
        ]
    else:
        rates = np.array([r.robustness.cr for r in results], dtype=float)
        weighted = [
            (r.accuracy.sample_count, r.accuracy.gated_ate_rmse) for r in results if r.accuracy is not None
        ]

    scene_cr: float = float(np.sum(rates * spans) / np.sum(spans)) if len(results) else 0.0

    scene_ate: float | None = None
    if weighted:
        counts: np.ndarray = np.array([count for count, _ in weighted], dtype=float)
        rmses: np.ndarray = np.array([rmse for _, rmse in weighted], dtype=float)
        scene_ate = float(np.sqrt(np.sum(counts * rmses ** 2) / np.sum(counts)))

    return SceneEvaluation(
        scene_name=scene_name,
        mode=mode,
        metric_config=config,
        per_sequence=results,
        scene_cr=scene_cr,
        scene_ate_rmse=scene_ate,
    )

def _check_lengths(manifest: SceneManifest, estimates: Sequence, ground_truths: Sequence) -> None:
    expected: int = len(manifest.sequences)
    if len(estimates) != expected or len(ground_truths) != expected:
        raise InvalidInputError(
            f"Scene {manifest.scene_name} has {expected} sequences but got {len(estimates)} estimates "
            f"and {len(ground_truths)} ground truths"
        )
