import logging
import math
from collections.abc import Sequence

import numpy as np

from lifelong_eval.custom_types import RPEUnit
from lifelong_eval.exceptions import InvalidInputError, InvalidSpanError
from lifelong_eval.models.config import MetricConfig
from lifelong_eval.models.evaluation import AccuracyResult, Alignment, AssociatedPair, Association, PoseError
from lifelong_eval.services.geometry.trajgeom_service import apply_to_arrays, quaternion_conjugate, \
    quaternion_multiply, rotate_vectors, rotation_angles

logger = logging.getLogger(__name__)


def error_arrays(pairs: Sequence[AssociatedPair], alignment: Alignment) -> tuple[np.ndarray, np.ndarray]:
    """
    ATE (meters) and AOE (degrees) of every pair after applying the alignment.

    Returns:
        tuple[np.ndarray, np.ndarray]: (M,) ATE and (M,) AOE arrays.
    """
    association: Association = Association.from_pairs(pairs)
    if len(association) == 0:
        return np.empty(0), np.empty(0)
    positions, quaternions = apply_to_arrays(
        alignment.transform, association.estimate_positions, association.estimate_quaternions
    )
    ate: np.ndarray = np.linalg.norm(positions - association.ground_truth_positions, axis=1)
    aoe: np.ndarray = rotation_angles(quaternions, association.ground_truth_quaternions)
    return ate, aoe

def pose_errors(pairs: Sequence[AssociatedPair], alignment: Alignment, config: MetricConfig) -> list[PoseError]:
    """
    Per-pose errors and correctness.

    A pose is correct when ATE <= epsilon and AOE <= phi; both bounds inclusive.

    Args:
        pairs (Sequence[AssociatedPair]): Time-ordered associated pairs.
        alignment (Alignment): Transform applied to the estimates first.
        config (MetricConfig): Thresholds epsilon (m) and phi (deg).

    Returns:
        list[PoseError]: One entry per pair; empty for no pairs.
    """
    association: Association = Association.from_pairs(pairs)
    ate, aoe = error_arrays(association, alignment)
    correct: np.ndarray = (ate <= config.epsilon) & (aoe <= config.phi)
    return [
        PoseError(timestamp=float(t), ate=float(a), aoe=float(o), correct=bool(c))
        for t, a, o, c in zip(association.timestamps, ate, aoe, correct)
    ]

def _valid_time(times: np.ndarray, mask: np.ndarray, t_max: float, delta: float) -> float:
    """Sum of min(t_{k+1} - t_k, delta) over the masked estimates, with t_{N+1} = t_max."""
    following: np.ndarray = np.append(times[1:], t_max)
    windows: np.ndarray = np.minimum(following - times, delta)
    return float(np.sum(windows[mask]))

def _check_span(times: np.ndarray, t_min: float, t_max: float) -> None:
    if not t_max > t_min:
        raise InvalidSpanError(f"Data span [{t_min}, {t_max}] is empty or reversed")
    if len(times) and (times[0] < t_min or times[-1] > t_max):
        raise InvalidSpanError(
            f"Estimates [{times[0]}, {times[-1]}] extend outside the data span [{t_min}, {t_max}]"
        )

def correct_rate(
        errors: Sequence[PoseError],
        t_min: float,
        t_max: float,
        delta: float
) -> tuple[float, float | None]:
    """
    Correct Rate and Correct Rate of Tracking.

    Each correct estimate at t_k counts for min(t_{k+1} - t_k, delta) seconds,
    with t_{N+1} = t_max. CR divides by t_max - t_min, CR-T by t_max - t_0.

    Args:
        errors (Sequence[PoseError]): Time-ordered per-pose errors.
        t_min (float): Start of the data span.
        t_max (float): End of the data span.
        delta (float): Validity window of a correct estimate, seconds.

    Returns:
        tuple[float, float | None]: (CR, CR-T), both in [0, 1]; CR-T is None
        without estimates or when t_0 = t_max.

    Raises:
        InvalidSpanError: If t_max <= t_min or estimates fall outside the span.
    """
    times: np.ndarray = np.array([e.timestamp for e in errors], dtype=float)
    _check_span(times, t_min, t_max)
    if not len(times):
        return 0.0, None
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")

    correct: np.ndarray = np.array([e.correct for e in errors], dtype=bool)
    numerator: float = _valid_time(times, correct, t_max, delta)

    cr: float = min(max(numerator / (t_max - t_min), 0.0), 1.0)
    tracking_span: float = t_max - float(times[0])
    cr_t: float | None = min(max(numerator / tracking_span, 0.0), 1.0) if tracking_span > 0 else None
    return cr, cr_t

def coverage_rate(timestamps: np.ndarray, t_min: float, t_max: float, delta: float) -> float:
    """CR with unbounded thresholds: every estimate counts as correct."""
    times: np.ndarray = np.asarray(timestamps, dtype=float)
    _check_span(times, t_min, t_max)
    if not len(times):
        return 0.0
    return min(_valid_time(times, np.ones(len(times), dtype=bool), t_max, delta) / (t_max - t_min), 1.0)

def relocalization_score(errors: Sequence[PoseError], t_min: float, tau: float) -> float:
    """
    Re-localization score exp(-(t_0 - t_min) / tau) gated by the first estimate's correctness.

    Args:
        errors (Sequence[PoseError]): Time-ordered per-pose errors.
        t_min (float): Start of the data span.
        tau (float): Decay, seconds.

    Returns:
        float: Score in [0, 1]; 1 for an immediate correct estimate, 0 without
        estimates or when the first estimate is incorrect.

    Raises:
        InvalidInputError: If tau is not positive.
        InvalidSpanError: If the first estimate precedes t_min.
    """
    if not tau > 0:
        raise InvalidInputError(f"tau must be positive, got {tau}")
    if not errors:
        return 0.0

    first: PoseError = errors[0]
    if first.timestamp < t_min:
        raise InvalidSpanError(f"First estimate at {first.timestamp} precedes t_min {t_min}")
    if not first.correct:
        return 0.0
    return math.exp(-(first.timestamp - t_min) / tau)

def _rpe_pairs(times: np.ndarray, config: MetricConfig) -> tuple[np.ndarray, np.ndarray]:
    """
    Index pairs (i, j) separated by the RPE interval.

    In seconds mode j is the estimate nearest to t_i + interval, accepted within
    half the median sampling cycle; in frames mode j = i + interval.
    """
    count: int = len(times)
    if count < 2:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)

    if config.rpe_unit == RPEUnit.FRAMES:
        step: int = max(int(round(config.rpe_interval)), 1)
        first: np.ndarray = np.arange(0, max(count - step, 0))
        return first, first + step

    tolerance: float = 0.5 * float(np.median(np.diff(times)))
    targets: np.ndarray = times + config.rpe_interval
    right: np.ndarray = np.clip(np.searchsorted(times, targets), 1, count - 1)
    left: np.ndarray = right - 1
    nearest: np.ndarray = np.where(np.abs(times[left] - targets) <= np.abs(times[right] - targets), left, right)
    indices: np.ndarray = np.arange(count)
    keep: np.ndarray = (nearest > indices) & (np.abs(times[nearest] - targets) <= tolerance)
    return indices[keep], nearest[keep]

def relative_errors(
        association: Association,
        first: np.ndarray,
        second: np.ndarray,
        scale: float = 1.0
) -> np.ndarray:
    """
    Translational relative pose errors of the index pairs.

    For ground-truth poses Q and estimates P the error is the translation of
    (Q_i^-1 Q_j)^-1 (P_i^-1 P_j); the estimate motion is scaled by `scale`.
    """
    gt_q, gt_p = association.ground_truth_quaternions, association.ground_truth_positions
    est_q, est_p = association.estimate_quaternions, association.estimate_positions

    gt_inverse: np.ndarray = quaternion_conjugate(gt_q[first])
    gt_motion_q: np.ndarray = quaternion_multiply(gt_inverse, gt_q[second])
    gt_motion_t: np.ndarray = rotate_vectors(gt_inverse, gt_p[second] - gt_p[first])
    est_motion_t: np.ndarray = scale * rotate_vectors(quaternion_conjugate(est_q[first]), est_p[second] - est_p[first])

    error_t: np.ndarray = rotate_vectors(quaternion_conjugate(gt_motion_q), est_motion_t - gt_motion_t)
    return np.linalg.norm(error_t, axis=1)

def gated_accuracy(
        errors: Sequence[PoseError],
        pairs: Sequence[AssociatedPair],
        config: MetricConfig,
        alignment: Alignment | None = None
) -> AccuracyResult | None:
    """
    ATE and RPE statistics over correct estimates only.

    RPE pairs whose index range contains an incorrect estimate are discarded.

    Args:
        errors (Sequence[PoseError]): Per-pose errors, index-aligned with `pairs`.
        pairs (Sequence[AssociatedPair]): The associated pairs.
        config (MetricConfig): RPE interval and unit.
        alignment (Alignment | None): Its scale applies to estimate motion (scale-free estimates).

    Returns:
        AccuracyResult | None: None when no estimate is correct.

    Raises:
        InvalidInputError: If `errors` and `pairs` differ in length.
    """
    association: Association = Association.from_pairs(pairs)
    if len(errors) != len(association):
        raise InvalidInputError(f"{len(errors)} errors for {len(association)} pairs")

    correct: np.ndarray = np.array([e.correct for e in errors], dtype=bool)
    if not np.any(correct):
        return None

    ate: np.ndarray = np.array([e.ate for e in errors], dtype=float)[correct]

    first, second = _rpe_pairs(association.timestamps, config)
    incorrect_before: np.ndarray = np.concatenate([[0], np.cumsum(~correct)])
    clean: np.ndarray = (incorrect_before[second + 1] - incorrect_before[first]) == 0
    first, second = first[clean], second[clean]

    rpe_rmse: float | None = None
    if len(first):
        scale: float = alignment.transform.scale if alignment is not None else 1.0
        rpe: np.ndarray = relative_errors(association, first, second, scale)
        rpe_rmse = float(np.sqrt(np.mean(rpe ** 2)))

    return AccuracyResult(
        gated_ate_rmse=float(np.sqrt(np.mean(ate ** 2))),
        gated_ate_mean=float(np.mean(ate)),
        gated_ate_median=float(np.median(ate)),
        gated_ate_max=float(np.max(ate)),
        gated_rpe_rmse=rpe_rmse,
        sample_count=int(len(ate)),
        rpe_pair_count=int(len(first)),
    )

def ate_rmse(errors: Sequence[PoseError]) -> float | None:
    """ATE RMSE over all estimates, correct or not."""
    if not errors:
        return None
    ate: np.ndarray = np.array([e.ate for e in errors], dtype=float)
    return float(np.sqrt(np.mean(ate ** 2)))
