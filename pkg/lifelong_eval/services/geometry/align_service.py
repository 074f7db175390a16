import logging
from collections.abc import Sequence

import numpy as np

from lifelong_eval.constants import DEGENERACY_RATIO, MIN_ALIGNMENT_PAIRS
from lifelong_eval.custom_types import AlignmentMethod
from lifelong_eval.exceptions import DegenerateScaleError, NoOverlapError, UnderdeterminedAlignmentError
from lifelong_eval.models.evaluation import Alignment, AssociatedPair, Association
from lifelong_eval.models.geometry import Rotation, SimilarityTransform
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.geometry.trajgeom_service import lerp_arrays, rotation_from_matrix, rotation_to_matrix, \
    slerp_arrays

logger = logging.getLogger(__name__)


def associate(estimate: Trajectory, ground_truth: Trajectory) -> Association:
    """
    Pair every estimated pose inside the ground-truth coverage with the ground
    truth interpolated at its timestamp.

    Estimates before the first or after the last ground-truth sample are dropped
    and counted in `dropped_count`.

    Args:
        estimate (Trajectory): Estimated trajectory.
        ground_truth (Trajectory): Reference trajectory.

    Returns:
        Association: The pairs, in estimate order.

    Raises:
        NoOverlapError: If no estimate falls inside the ground-truth coverage.
    """
    if estimate.is_empty or ground_truth.is_empty:
        raise NoOverlapError(
            f"Cannot associate {estimate.source_label or 'estimate'} with "
            f"{ground_truth.source_label or 'ground truth'}: empty trajectory"
        )

    # Keep estimates inside the ground-truth coverage
    gt_times: np.ndarray = ground_truth.timestamps
    inside: np.ndarray = (estimate.timestamps >= gt_times[0]) & (estimate.timestamps <= gt_times[-1])
    dropped: int = int(len(estimate) - np.count_nonzero(inside))
    if not np.any(inside):
        raise NoOverlapError(
            f"No estimate of {estimate.source_label or 'the estimate'} in ground-truth coverage "
            f"[{gt_times[0]}, {gt_times[-1]}] (estimates span [{estimate.start}, {estimate.end}])"
        )
    if dropped:
        logger.warning("%d of %d estimates of %s lie outside ground-truth coverage and are dropped",
                       dropped, len(estimate), estimate.source_label or "estimate")

    times: np.ndarray = estimate.timestamps[inside]

    # Bracketing ground-truth segment of each estimate
    if len(gt_times) == 1:
        lower: np.ndarray = np.zeros(len(times), dtype=int)
        upper: np.ndarray = lower
        fractions: np.ndarray = np.zeros(len(times))
    else:
        lower = np.clip(np.searchsorted(gt_times, times, side="right") - 1, 0, len(gt_times) - 2)
        upper = lower + 1
        fractions = (times - gt_times[lower]) / (gt_times[upper] - gt_times[lower])

    gt_positions: np.ndarray = lerp_arrays(ground_truth.positions[lower], ground_truth.positions[upper], fractions)
    gt_quaternions: np.ndarray = slerp_arrays(
        ground_truth.quaternions[lower], ground_truth.quaternions[upper], fractions
    )

    return Association(
        timestamps=times,
        estimate_positions=estimate.positions[inside],
        estimate_quaternions=estimate.quaternions[inside],
        ground_truth_positions=gt_positions,
        ground_truth_quaternions=gt_quaternions,
        dropped_count=dropped,
    )

def _is_degenerate(singular_values: np.ndarray) -> bool:
    # Rank below 2 leaves a rotation axis undetermined
    return bool(singular_values[0] <= 0.0 or singular_values[1] <= DEGENERACY_RATIO * singular_values[0])

def _residual_fit(
        source: np.ndarray,
        target: np.ndarray,
        rotation: Rotation,
        scale: float
) -> tuple[SimilarityTransform, float]:
    rotation_matrix: np.ndarray = rotation_to_matrix(rotation)
    translation: np.ndarray = target.mean(axis=0) - scale * rotation_matrix @ source.mean(axis=0)

    aligned: np.ndarray = scale * source @ rotation_matrix.T + translation
    residual: float = float(np.sqrt(np.mean(np.sum((aligned - target) ** 2, axis=1))))
    return SimilarityTransform(scale, rotation, tuple(translation)), residual

def fit_positions_horn(source: np.ndarray, target: np.ndarray) -> tuple[SimilarityTransform, float, bool]:
    """
    Horn's closed-form rigid fit of target ~ R source + t.

    The optimal rotation is the unit quaternion along the eigenvector of the
    largest eigenvalue of the symmetric 4x4 matrix built from the
    cross-covariance of the centered points. Being a quaternion, it is always
    a proper rotation; its sign is chosen so that w >= 0.

    Args:
        source (np.ndarray): (N, 3) points to move.
        target (np.ndarray): (N, 3) points to match.

    Returns:
        tuple[SimilarityTransform, float, bool]: Transform (scale 1), residual RMSE
        and whether the point set was degenerate (collinear or coincident).
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)

    m: np.ndarray = (source - source.mean(axis=0)).T @ (target - target.mean(axis=0))
    n: np.ndarray = np.array([
        [m[0, 0] + m[1, 1] + m[2, 2], m[1, 2] - m[2, 1], m[2, 0] - m[0, 2], m[0, 1] - m[1, 0]],
        [m[1, 2] - m[2, 1], m[0, 0] - m[1, 1] - m[2, 2], m[0, 1] + m[1, 0], m[2, 0] + m[0, 2]],
        [m[2, 0] - m[0, 2], m[0, 1] + m[1, 0], m[1, 1] - m[0, 0] - m[2, 2], m[1, 2] + m[2, 1]],
        [m[0, 1] - m[1, 0], m[2, 0] + m[0, 2], m[1, 2] + m[2, 1], m[2, 2] - m[0, 0] - m[1, 1]],
    ])
    # eigh sorts eigenvalues ascending
    _, eigenvectors = np.linalg.eigh(n)
    w, x, y, z = eigenvectors[:, -1]
    if w < 0:
        w, x, y, z = -w, -x, -y, -z

    transform, residual = _residual_fit(source, target, Rotation(float(w), float(x), float(y), float(z)), 1.0)
    return transform, residual, _is_degenerate(np.linalg.svd(m, compute_uv=False))

def fit_positions(
        source: np.ndarray,
        target: np.ndarray,
        with_scale: bool
) -> tuple[SimilarityTransform, float, bool]:
    """
    Umeyama's closed-form least-squares fit of target ~ s R source + t.

    SVD of the cross-covariance with determinant sign correction, so the
    rotation is always proper. With `with_scale` False the scale stays 1.

    Args:
        source (np.ndarray): (N, 3) points to move.
        target (np.ndarray): (N, 3) points to match.
        with_scale (bool): Also estimate the optimal positive scale.

    Returns:
        tuple[SimilarityTransform, float, bool]: Transform, residual RMSE and
        whether the point set was degenerate (collinear or coincident).

    Raises:
        DegenerateScaleError: If a scale is requested and the source has no spread.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)

    source_centered: np.ndarray = source - source.mean(axis=0)
    covariance: np.ndarray = (target - target.mean(axis=0)).T @ source_centered / len(source)
    u, singular_values, vt = np.linalg.svd(covariance)

    correction: np.ndarray = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0.0:
        correction[2, 2] = -1.0
    rotation_matrix: np.ndarray = u @ correction @ vt

    scale: float = 1.0
    if with_scale:
        source_variance: float = float(np.mean(np.sum(source_centered ** 2, axis=1)))
        if source_variance <= 0.0:
            raise DegenerateScaleError("Estimate positions have zero variance; scale is undefined")
        scale = float(np.trace(np.diag(singular_values) @ correction) / source_variance)
        if scale <= 0.0:
            raise DegenerateScaleError(f"Non-positive optimal scale {scale}")

    transform, residual = _residual_fit(source, target, rotation_from_matrix(rotation_matrix), scale)
    return transform, residual, _is_degenerate(singular_values)

def _align(pairs: Sequence[AssociatedPair], method: AlignmentMethod, with_scale: bool = False) -> Alignment:
    association: Association = Association.from_pairs(pairs)
    if len(association) < MIN_ALIGNMENT_PAIRS:
        raise UnderdeterminedAlignmentError(
            f"{method.value} alignment needs at least {MIN_ALIGNMENT_PAIRS} pairs, got {len(association)}"
        )

    if method == AlignmentMethod.HORN:
        transform, residual, degenerate = fit_positions_horn(
            association.estimate_positions, association.ground_truth_positions
        )
    else:
        transform, residual, degenerate = fit_positions(
            association.estimate_positions, association.ground_truth_positions, with_scale
        )
    if degenerate:
        logger.warning("Degenerate point set for %s alignment (%d pairs are collinear or coincident); "
                       "the rotation is a best-effort result", method.value, len(association))

    return Alignment(transform, residual, len(association), method, degenerate)

def align_horn(pairs: Sequence[AssociatedPair]) -> Alignment:
    """
    Rigid alignment (scale 1) of estimate positions onto ground-truth positions.

    Args:
        pairs (Sequence[AssociatedPair]): Associated pairs, at least 3.

    Returns:
        Alignment: Transform mapping estimates into the ground-truth frame.

    Raises:
        UnderdeterminedAlignmentError: With fewer than 3 pairs.
    """
    return _align(pairs, AlignmentMethod.HORN)

def align_umeyama(pairs: Sequence[AssociatedPair], with_scale: bool = True) -> Alignment:
    """
    Similarity alignment with the jointly optimal positive scale.

    With `with_scale` False the scale is fixed to 1; the rotation and
    translation then agree with `align_horn` up to round-off.

    Raises:
        UnderdeterminedAlignmentError: With fewer than 3 pairs.
        DegenerateScaleError: If the estimate positions have zero variance.
    """
    return _align(pairs, AlignmentMethod.UMEYAMA, with_scale)
