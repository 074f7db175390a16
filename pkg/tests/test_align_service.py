import logging

import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from lifelong_eval.custom_types import AlignmentMethod
from lifelong_eval.exceptions import DegenerateScaleError, NoOverlapError, UnderdeterminedAlignmentError
from lifelong_eval.models.evaluation import Alignment, Association
from lifelong_eval.models.geometry import Rotation
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.geometry.align_service import align_horn, align_umeyama, associate
from lifelong_eval.services.geometry.trajgeom_service import rotation_angle


def _association(estimate_positions: np.ndarray, ground_truth_positions: np.ndarray) -> Association:
    count: int = len(estimate_positions)
    identity: np.ndarray = np.tile([0.0, 0.0, 0.0, 1.0], (count, 1))
    return Association(np.arange(count, dtype=float), estimate_positions, identity, ground_truth_positions, identity)

def _random_frame(rng: np.random.Generator) -> tuple[ScipyRotation, np.ndarray]:
    return ScipyRotation.random(random_state=rng), rng.uniform(-10.0, 10.0, size=3)


class TestAssociate:

    @pytest.fixture
    def ground_truth(self) -> Trajectory:
        return Trajectory(
            np.array([0.0, 1.0, 2.0]),
            np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]),
            np.tile([0.0, 0.0, 0.0, 1.0], (3, 1)),
        )

    def test_interpolates_ground_truth_at_estimate_times(self, ground_truth):
        estimate: Trajectory = ground_truth.replace(timestamps=np.array([0.5, 1.5, 2.0]))

        association: Association = associate(estimate, ground_truth)

        np.testing.assert_allclose(association.ground_truth_positions[:, 0], [0.5, 1.5, 2.0])
        assert association.dropped_count == 0

    def test_drops_estimates_outside_coverage(self, ground_truth, caplog):
        estimate: Trajectory = ground_truth.replace(timestamps=np.array([0.5, 1.5, 3.0]))

        with caplog.at_level(logging.WARNING):
            association: Association = associate(estimate, ground_truth)

        assert len(association) == 2
        assert association.dropped_count == 1
        assert "outside ground-truth coverage" in caplog.text

    def test_no_estimate_inside_coverage(self, ground_truth):
        with pytest.raises(NoOverlapError):
            associate(ground_truth.shifted(10.0), ground_truth)

    def test_empty_estimate(self, ground_truth):
        with pytest.raises(NoOverlapError):
            associate(Trajectory.empty(), ground_truth)

    def test_pairs_read_back_as_poses(self, ground_truth):
        association: Association = associate(ground_truth, ground_truth)
        assert association[1].timestamp == 1.0
        assert association[1].ground_truth.translation == (1.0, 0.0, 0.0)


def test_horn_recovers_random_rigid_transforms(rng):
    for _ in range(500):
        rotation, translation = _random_frame(rng)
        estimate: np.ndarray = rng.normal(scale=5.0, size=(rng.integers(50, 120), 3))

        alignment: Alignment = align_horn(_association(estimate, rotation.apply(estimate) + translation))

        assert alignment.method == AlignmentMethod.HORN
        assert alignment.transform.scale == 1.0
        np.testing.assert_allclose(alignment.transform.translation, translation, atol=1e-9)
        recovered: Rotation = alignment.transform.rotation
        assert recovered.w >= 0.0
        assert rotation_angle(recovered, Rotation.from_xyzw(rotation.as_quat())) < 1e-7
        assert alignment.residual_rmse < 1e-9

def test_umeyama_recovers_random_similarity_transforms(rng):
    for _ in range(500):
        rotation, translation = _random_frame(rng)
        scale: float = float(rng.uniform(0.5, 2.0))
        estimate: np.ndarray = rng.normal(scale=5.0, size=(rng.integers(50, 120), 3))

        alignment: Alignment = align_umeyama(_association(estimate, scale * rotation.apply(estimate) + translation))

        assert alignment.transform.scale == pytest.approx(scale, rel=1e-9)
        np.testing.assert_allclose(alignment.transform.translation, translation, atol=1e-9)
        assert rotation_angle(alignment.transform.rotation, Rotation.from_xyzw(rotation.as_quat())) < 1e-7

def test_umeyama_without_scale_agrees_with_horn(rng):
    for _ in range(200):
        rotation, translation = _random_frame(rng)
        estimate: np.ndarray = rng.normal(scale=3.0, size=(60, 3))
        ground_truth: np.ndarray = rotation.apply(estimate) + translation + rng.normal(scale=0.05, size=(60, 3))
        association: Association = _association(estimate, ground_truth)

        horn: Alignment = align_horn(association)
        umeyama: Alignment = align_umeyama(association, with_scale=False)

        assert umeyama.method == AlignmentMethod.UMEYAMA
        assert umeyama.transform.scale == 1.0
        np.testing.assert_allclose(umeyama.transform.translation, horn.transform.translation, atol=1e-9)
        assert rotation_angle(umeyama.transform.rotation, horn.transform.rotation) < 1e-7
        assert umeyama.residual_rmse == pytest.approx(horn.residual_rmse, abs=1e-9)

@pytest.mark.parametrize("align", [align_horn, align_umeyama])
def test_alignment_never_does_worse_than_no_alignment(rng, align):
    for _ in range(100):
        rotation, translation = _random_frame(rng)
        estimate: np.ndarray = rng.normal(scale=2.0, size=(40, 3))
        # Near-identity frame change
        small: ScipyRotation = ScipyRotation.from_rotvec(rotation.as_rotvec() * 0.01)
        ground_truth: np.ndarray = small.apply(estimate) + 0.01 * translation + rng.normal(scale=0.2, size=(40, 3))

        alignment: Alignment = align(_association(estimate, ground_truth))
        unaligned_rmse: float = float(np.sqrt(np.mean(np.sum((ground_truth - estimate) ** 2, axis=1))))

        assert alignment.residual_rmse <= unaligned_rmse + 1e-12

@pytest.mark.parametrize("sigma", [0.01, 0.1, 0.5])
def test_residual_matches_the_noise_level(rng, sigma: float):
    rotation, translation = _random_frame(rng)
    estimate: np.ndarray = rng.normal(scale=5.0, size=(1500, 3))
    # Isotropic noise with an expected squared norm of sigma**2
    noise: np.ndarray = rng.normal(scale=sigma / np.sqrt(3.0), size=(1500, 3))

    alignment: Alignment = align_horn(_association(estimate, rotation.apply(estimate) + translation + noise))

    assert 0.5 * sigma <= alignment.residual_rmse <= 1.5 * sigma

def test_rotation_is_proper_for_reflected_data(rng):
    estimate: np.ndarray = rng.normal(size=(40, 3))
    mirrored: np.ndarray = estimate * [1.0, 1.0, -1.0]

    alignment: Alignment = align_horn(_association(estimate, mirrored))

    matrix: np.ndarray = ScipyRotation.from_quat(alignment.transform.rotation.as_xyzw()).as_matrix()
    assert np.linalg.det(matrix) == pytest.approx(1.0)

def test_alignment_needs_three_pairs(rng):
    with pytest.raises(UnderdeterminedAlignmentError):
        align_horn(_association(rng.normal(size=(2, 3)), rng.normal(size=(2, 3))))

def test_scale_of_coincident_points_is_undefined():
    with pytest.raises(DegenerateScaleError):
        align_umeyama(_association(np.ones((10, 3)), np.zeros((10, 3))))

def test_collinear_points_are_flagged(caplog):
    line: np.ndarray = np.outer(np.linspace(0.0, 9.0, 10), [1.0, 0.0, 0.0])

    with caplog.at_level(logging.WARNING):
        alignment: Alignment = align_horn(_association(line, line + [0.0, 2.0, 0.0]))

    assert alignment.degenerate
    assert alignment.residual_rmse == pytest.approx(0.0, abs=1e-12)
    assert "Degenerate" in caplog.text
