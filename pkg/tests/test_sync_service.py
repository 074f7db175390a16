import math

import numpy as np
import pytest

from lifelong_eval.custom_types import TrajectoryShape
from lifelong_eval.exceptions import InsufficientDataError, InvalidInputError, NoOverlapError
from lifelong_eval.models.config import PerturbationSpec
from lifelong_eval.models.evaluation import OffsetEstimate
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.tools import sync_service, synthgen_service


@pytest.fixture
def reference() -> Trajectory:
    return synthgen_service.generate_trajectory(TrajectoryShape.BACK_AND_FORTH, 10.0, 100.0, seed=3)

def _estimate(offset: float) -> OffsetEstimate:
    return OffsetEstimate(offset=offset, ate_rmse_at_optimum=0.0, search_window=(-0.5, 0.5), resolution=1e-4)


@pytest.mark.parametrize("shift", [-0.2, -0.05, 0.007, 0.05, 0.2])
def test_recovers_known_shift(reference: Trajectory, shift: float):
    target: Trajectory = synthgen_service.perturb(reference, PerturbationSpec(time_shift=shift))

    estimate: OffsetEstimate = sync_service.estimate_offset(reference, target)

    assert estimate.offset == pytest.approx(shift, abs=5e-4)
    assert estimate.ate_rmse_at_optimum < 1e-3
    assert not estimate.degenerate
    assert estimate.search_window == (-0.5, 0.5)

@pytest.mark.parametrize("shift", [-0.05, 0.05])
def test_swapping_inputs_negates_offset(reference: Trajectory, shift: float):
    target: Trajectory = synthgen_service.perturb(reference, PerturbationSpec(time_shift=shift))

    forward: OffsetEstimate = sync_service.estimate_offset(reference, target)
    backward: OffsetEstimate = sync_service.estimate_offset(target, reference)

    assert backward.offset == pytest.approx(-forward.offset, abs=1e-3)

def test_concurrent_grid_gives_same_result(reference: Trajectory):
    target: Trajectory = synthgen_service.perturb(reference, PerturbationSpec(time_shift=0.03))

    serial: OffsetEstimate = sync_service.estimate_offset(reference, target)
    parallel: OffsetEstimate = sync_service.estimate_offset(reference, target, max_workers=4)

    assert parallel.offset == serial.offset

def test_motionless_input_is_degenerate():
    count: int = 1000
    still: Trajectory = Trajectory(
        np.arange(count) / 100.0, np.zeros((count, 3)), np.tile([0.0, 0.0, 0.0, 1.0], (count, 1))
    )

    estimate: OffsetEstimate = sync_service.estimate_offset(still, still.shifted(0.05))

    assert estimate.degenerate
    assert estimate.ate_rmse_at_optimum == pytest.approx(0.0, abs=1e-12)

def test_probe_excludes_small_overlap(reference: Trajectory):
    short: Trajectory = reference.within(0.0, 1.0)
    assert sync_service.probe_offset(short, reference, 0.0) is None

def test_no_overlap_anywhere(reference: Trajectory):
    with pytest.raises(NoOverlapError):
        sync_service.estimate_offset(reference, reference.shifted(100.0))

@pytest.mark.parametrize("kwargs", [
    {"window": 0.0},
    {"coarse_step": -0.01},
    {"resolution": 0.0},
    {"window": 0.01, "coarse_step": 0.02},
])
def test_invalid_search_parameters(reference: Trajectory, kwargs: dict):
    with pytest.raises(InvalidInputError):
        sync_service.estimate_offset(reference, reference, **kwargs)

def test_too_few_poses(reference: Trajectory):
    with pytest.raises(InsufficientDataError):
        sync_service.estimate_offset(reference.select(np.arange(len(reference)) < 2), reference)

def test_offset_consistency():
    assert sync_service.offset_consistency([_estimate(0.001), _estimate(0.003)]) == pytest.approx(math.sqrt(2) * 1e-3, abs=1e-12)

def test_offset_consistency_needs_two_estimates():
    with pytest.raises(InsufficientDataError):
        sync_service.offset_consistency([_estimate(0.001)])

def test_non_dividing_step_stays_inside_window():
    # Back-and-forth motion repeats every 2 s, so a shift past the window would alias inside it
    u_shape: Trajectory = synthgen_service.generate_trajectory(TrajectoryShape.U_SHAPE, 10.0, 100.0, seed=3)
    target: Trajectory = synthgen_service.perturb(u_shape, PerturbationSpec(time_shift=0.58))

    estimate: OffsetEstimate = sync_service.estimate_offset(u_shape, target, window=0.5, coarse_step=0.3)

    assert -0.5 <= estimate.offset <= 0.5
    assert estimate.offset == pytest.approx(0.5, abs=1e-3)

def test_non_dividing_step_recovers_shift(reference: Trajectory):
    target: Trajectory = synthgen_service.perturb(reference, PerturbationSpec(time_shift=0.05))

    estimate: OffsetEstimate = sync_service.estimate_offset(reference, target, window=0.5, coarse_step=0.3)

    assert estimate.offset == pytest.approx(0.05, abs=5e-4)

@pytest.mark.parametrize("shape", [TrajectoryShape.U_SHAPE, TrajectoryShape.CORRIDOR, TrajectoryShape.BACK_AND_FORTH])
def test_moving_trajectories_are_never_degenerate(shape: TrajectoryShape):
    moving: Trajectory = synthgen_service.generate_trajectory(shape, 10.0, 30.0, seed=21)

    estimate: OffsetEstimate = sync_service.estimate_offset(moving, moving.shifted(0.02))

    assert not estimate.degenerate
