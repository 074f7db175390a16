"""
Time offset between two trajectories of the same motion recorded on different clocks.

The offset o is the delay of the target clock: the target is synchronized by
subtracting o from its timestamps. It is found by minimizing the ATE RMSE of
the rigidly aligned target against the reference over a window of offsets.
"""
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import minimize_scalar

from lifelong_eval.constants import MIN_ALIGNMENT_PAIRS, SYNC_COARSE_STEP, SYNC_FLAT_TOLERANCE, \
    SYNC_MIN_OVERLAP_FRACTION, SYNC_RESOLUTION, SYNC_WINDOW
from lifelong_eval.exceptions import InsufficientDataError, InvalidInputError, NoOverlapError
from lifelong_eval.models.evaluation import Association, OffsetEstimate
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.geometry import align_service

logger = logging.getLogger(__name__)


def probe_offset(reference: Trajectory, target: Trajectory, offset: float) -> float | None:
    """
    ATE RMSE of the target, synchronized with `offset`, after rigid alignment to the reference.

    Returns:
        float | None: The residual, or None when fewer than half of the target
        poses (or fewer than 3) overlap the reference at this offset.
    """
    synchronized: Trajectory = target.shifted(-offset)
    overlapping: Trajectory = synchronized.within(reference.start, reference.end)
    if len(overlapping) < MIN_ALIGNMENT_PAIRS or len(overlapping) < SYNC_MIN_OVERLAP_FRACTION * len(target):
        return None

    association: Association = align_service.associate(overlapping, reference)
    _, residual, _ = align_service.fit_positions(
        association.estimate_positions, association.ground_truth_positions, with_scale=False
    )
    return residual

def estimate_offset(
        reference: Trajectory,
        target: Trajectory,
        window: float = SYNC_WINDOW,
        coarse_step: float = SYNC_COARSE_STEP,
        resolution: float = SYNC_RESOLUTION,
        max_workers: int = 1
) -> OffsetEstimate:
    """
    Find the clock offset of `target` relative to `reference`.

    A grid over [-window, window] at `coarse_step` is probed first; the best
    grid cell is then refined with a bounded scalar search down to
    `resolution`. Offsets where the trajectories overlap too little are
    excluded with a warning. A flat objective (constant positions) is flagged
    degenerate and reports the offset closest to zero.

    Args:
        reference (Trajectory): Reference trajectory.
        target (Trajectory): Trajectory whose clock offset is sought.
        window (float): Half-width of the searched offset range, seconds.
        coarse_step (float): Largest grid spacing, seconds.
        resolution (float): Refinement tolerance, seconds.
        max_workers (int): Grid probes evaluated concurrently.

    Returns:
        OffsetEstimate: The offset minimizing ATE RMSE over every probed offset.

    Raises:
        InvalidInputError: If window, step or resolution is not positive.
        InsufficientDataError: If either trajectory has fewer than 3 poses.
        NoOverlapError: If every probed offset is excluded.
    """
    if not (window > 0 and coarse_step > 0 and resolution > 0):
        raise InvalidInputError(
            f"window, coarse_step and resolution must be positive, got {window}, {coarse_step}, {resolution}"
        )
    if coarse_step > window:
        raise InvalidInputError(f"coarse_step {coarse_step} exceeds the window {window}")
    for trajectory in (reference, target):
        if len(trajectory) < MIN_ALIGNMENT_PAIRS:
            raise InsufficientDataError(
                f"Trajectory {trajectory.source_label or ''} has {len(trajectory)} poses; "
                f"at least {MIN_ALIGNMENT_PAIRS} are needed to estimate an offset"
            )

    # Spacing never exceeds coarse_step and the grid ends exactly on the window
    cell_count: int = math.ceil(window / coarse_step - 1e-9)
    spacing: float = window / cell_count
    grid: np.ndarray = np.clip(np.arange(-cell_count, cell_count + 1) * spacing, -window, window)

    def probe(offset: float) -> float | None:
        return probe_offset(reference, target, float(offset))

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            grid_values: list[float | None] = list(pool.map(probe, grid))
    else:
        grid_values = [probe(offset) for offset in grid]

    probes: dict[float, float] = {
        float(offset): value for offset, value in zip(grid, grid_values) if value is not None
    }
    excluded: int = len(grid) - len(probes)
    if excluded:
        logger.warning("%d of %d grid offsets excluded for insufficient overlap", excluded, len(grid))
    if not probes:
        raise NoOverlapError(f"No offset in [-{window}, {window}] s leaves enough overlap between the trajectories")

    residuals: np.ndarray = np.array(list(probes.values()))
    degenerate: bool = bool(residuals.max() - residuals.min() < SYNC_FLAT_TOLERANCE)

    best_offset: float = _best(probes)
    if degenerate:
        logger.warning("Sync objective is flat within %s m; the offset is indeterminate", SYNC_FLAT_TOLERANCE)
    else:
        penalty: float = 2.0 * float(residuals.max()) + 1.0

        def objective(offset: float) -> float:
            value: float | None = probe(offset)
            if value is None:
                return penalty
            probes[float(offset)] = value
            return value

        lower: float = max(best_offset - spacing, -window)
        upper: float = min(best_offset + spacing, window)
        result = minimize_scalar(objective, bounds=(lower, upper), method="bounded", options={"xatol": resolution})
        logger.debug("Refinement in [%s, %s] took %d evaluations", lower, upper, result.nfev)
        best_offset = _best(probes)

    logger.info("Estimated offset %.6f s (ATE RMSE %.6f m)", best_offset, probes[best_offset])
    return OffsetEstimate(
        offset=best_offset,
        ate_rmse_at_optimum=probes[best_offset],
        search_window=(-window, window),
        resolution=resolution,
        degenerate=degenerate,
        probe_count=len(probes),
        excluded_count=excluded,
    )

def _best(probes: dict[float, float]) -> float:
    # Ties go to the offset closest to zero
    return min(probes, key=lambda offset: (probes[offset], abs(offset)))

def offset_consistency(estimates: Sequence[OffsetEstimate]) -> float:
    """
    Sample standard deviation of redundant estimates of one physical offset.

    Raises:
        InsufficientDataError: With fewer than 2 estimates.
    """
    if len(estimates) < 2:
        raise InsufficientDataError(f"Consistency needs at least 2 offset estimates, got {len(estimates)}")
    offsets: np.ndarray = np.array([estimate.offset for estimate in estimates], dtype=float)
    return float(np.std(offsets, ddof=1))
