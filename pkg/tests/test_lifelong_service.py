import math

import numpy as np
import pytest

from lifelong_eval.custom_types import EvaluationMode, TrajectoryShape
from lifelong_eval.exceptions import InvalidSpanError, LifelongEvalError, SceneEvaluationError
from lifelong_eval.models.config import MetricConfig, PerturbationSpec, SceneManifest, TransformPublic
from lifelong_eval.models.evaluation import AccuracyResult, PairEvaluation, RobustnessResult, SceneEvaluation, \
    SequenceEvaluation
from lifelong_eval.models.geometry import Rotation
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.evaluation import lifelong_service
from lifelong_eval.services.geometry.trajgeom_service import rotation_angle, similarity_inverse
from lifelong_eval.services.tools import synthgen_service
from lifelong_eval.services.tools.synthgen_service import SyntheticScene


def _with_jump(scene: SyntheticScene, index: int, displacement: list[float]) -> list[Trajectory]:
    """Estimates of the scene with a constant displacement over all of sequence `index`."""
    estimates: list[Trajectory] = list(scene.estimates)
    jump: PerturbationSpec = PerturbationSpec(
        jump_time=scene.manifest.sequences[index].t_min, jump_displacement=displacement
    )
    estimates[index] = synthgen_service.perturb(estimates[index], jump)
    return estimates

def _sequence(sequence_id: str, span: tuple[float, float], cr: float, cr_unbounded: float,
              count: int, ate: float | None, gated: tuple[int, float] | None) -> SequenceEvaluation:
    accuracy: AccuracyResult | None = None
    if gated is not None:
        accuracy = AccuracyResult(gated_ate_rmse=gated[1], gated_ate_mean=gated[1], gated_ate_median=gated[1],
                                  gated_ate_max=gated[1], sample_count=gated[0])
    return SequenceEvaluation(
        sequence_id=sequence_id,
        t_min=span[0],
        t_max=span[1],
        estimate_count=count,
        robustness=RobustnessResult(cr=cr, cs_r=0.0, t_min=span[0], t_max=span[1]),
        accuracy=accuracy,
        ate_rmse=ate,
        cr_unbounded=cr_unbounded,
    )


def test_self_evaluation_is_perfect(loop_ground_truth: Trajectory):
    result: SequenceEvaluation = lifelong_service.evaluate_sequence(loop_ground_truth, loop_ground_truth, MetricConfig())

    assert result.robustness.cr == pytest.approx(1.0, abs=1e-9)
    assert result.robustness.cs_r == 1.0
    assert result.ate_rmse == pytest.approx(0.0, abs=1e-9)
    assert result.cr_unbounded == pytest.approx(1.0, abs=1e-9)
    assert result.estimate_count == len(loop_ground_truth)

def test_estimates_outside_span_are_dropped(synthetic_scene: SyntheticScene):
    entry = synthetic_scene.manifest.sequences[0].model_copy(update={"t_min": 2.0, "t_max": 8.0})
    ground_truth: Trajectory = synthetic_scene.ground_truths[0]

    result: SequenceEvaluation = lifelong_service.evaluate_sequence(ground_truth, ground_truth, MetricConfig(), entry)

    assert result.dropped_count == len(ground_truth) - len(ground_truth.within(2.0, 8.0))
    assert result.robustness.t_min == 2.0

def test_single_sample_ground_truth_has_no_span(loop_ground_truth: Trajectory):
    single: Trajectory = loop_ground_truth.select(np.arange(len(loop_ground_truth)) == 0)

    with pytest.raises(InvalidSpanError):
        lifelong_service.evaluate_sequence(single, single, MetricConfig())


class TestLifelong:

    def test_propagated_alignment_recovers_map_frame(self, synthetic_scene: SyntheticScene, map_offset: TransformPublic):
        scene: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, synthetic_scene.estimates, synthetic_scene.ground_truths
        )

        expected: TransformPublic = TransformPublic.from_transform(similarity_inverse(map_offset.to_transform()))
        assert scene.mode == EvaluationMode.LIFELONG
        assert scene.scene_cr == pytest.approx(1.0, abs=1e-9)
        assert all(s.robustness.cs_r == 1.0 for s in scene.per_sequence)
        assert scene.propagation_transform is not None
        np.testing.assert_allclose(scene.propagation_transform.translation, expected.translation, atol=1e-9)

    def test_jump_in_middle_sequence(self, synthetic_scene: SyntheticScene):
        estimates: list[Trajectory] = _with_jump(synthetic_scene, 1, [10.0, 0.0, 0.0])

        scene: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, estimates, synthetic_scene.ground_truths, MetricConfig(epsilon=3.0)
        )

        first, middle, last = scene.per_sequence
        assert first.robustness.cr == pytest.approx(1.0, abs=1e-9)
        assert middle.robustness.cr == 0.0
        assert middle.robustness.cs_r == 0.0
        assert middle.accuracy is None
        assert middle.failure is None
        assert last.robustness.cr == pytest.approx(1.0, abs=1e-9)
        assert [e.ate for e in middle.timeline] == pytest.approx([10.0] * len(middle.timeline), abs=1e-9)

        spans: list[float] = [s.span for s in scene.per_sequence]
        expected: float = sum(s.robustness.cr * span for s, span in zip(scene.per_sequence, spans)) / sum(spans)
        assert scene.scene_cr == pytest.approx(expected, abs=1e-12)
        assert scene.scene_cr == pytest.approx(2.0 / 3.0, abs=1e-6)

    def test_per_sequence_alignment_hides_the_jump(self, synthetic_scene: SyntheticScene):
        estimates: list[Trajectory] = _with_jump(synthetic_scene, 1, [10.0, 0.0, 0.0])

        scene: SceneEvaluation = lifelong_service.evaluate_per_sequence(
            synthetic_scene.manifest, estimates, synthetic_scene.ground_truths, MetricConfig(epsilon=3.0)
        )

        assert scene.mode == EvaluationMode.PER_SEQUENCE
        assert scene.per_sequence[1].robustness.cr == pytest.approx(1.0, abs=1e-9)
        assert scene.scene_ate_rmse == pytest.approx(0.0, abs=1e-9)

    def test_missing_later_sequence_scores_zero(self, synthetic_scene: SyntheticScene):
        estimates: list[Trajectory] = list(synthetic_scene.estimates)
        estimates[2] = Trajectory.empty()

        scene: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, estimates, synthetic_scene.ground_truths
        )

        missing: SequenceEvaluation = scene.per_sequence[2]
        assert missing.robustness.cr == 0.0
        assert missing.robustness.cs_r == 0.0
        assert missing.failure is not None
        assert scene.scene_cr == pytest.approx(2.0 / 3.0, abs=1e-6)

    def test_unalignable_first_sequence(self, synthetic_scene: SyntheticScene):
        estimates: list[Trajectory] = list(synthetic_scene.estimates)
        estimates[0] = Trajectory.empty()

        with pytest.raises(SceneEvaluationError):
            lifelong_service.evaluate_lifelong(synthetic_scene.manifest, estimates, synthetic_scene.ground_truths)

    def test_scale_free_propagates_the_scale(self):
        offset: TransformPublic = TransformPublic(scale=0.5, translation=[1.0, 2.0, 0.0])
        scene_data: SyntheticScene = synthgen_service.generate_scene(
            "mono", TrajectoryShape.U_SHAPE, 2, 10.0, 10.0, PerturbationSpec(rigid_offset=offset), seed=2
        )

        scene: SceneEvaluation = lifelong_service.evaluate_lifelong(
            scene_data.manifest, scene_data.estimates, scene_data.ground_truths, scale_free=True
        )

        assert scene.propagation_transform.scale == pytest.approx(2.0, rel=1e-9)
        assert scene.scene_cr == pytest.approx(1.0, abs=1e-9)

    def test_count_mismatch(self, synthetic_scene: SyntheticScene):
        with pytest.raises(LifelongEvalError):
            lifelong_service.evaluate_lifelong(
                synthetic_scene.manifest, synthetic_scene.estimates[:2], synthetic_scene.ground_truths
            )

    def test_concurrent_judging_keeps_order(self, synthetic_scene: SyntheticScene):
        serial: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, synthetic_scene.estimates, synthetic_scene.ground_truths
        )
        parallel: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, synthetic_scene.estimates, synthetic_scene.ground_truths, max_workers=3
        )

        assert [s.sequence_id for s in parallel.per_sequence] == [s.sequence_id for s in serial.per_sequence]
        assert parallel.scene_cr == serial.scene_cr

    def test_propagation_matches_per_sequence_alignment_in_a_common_frame(self, synthetic_scene: SyntheticScene):
        lifelong: SceneEvaluation = lifelong_service.evaluate_lifelong(
            synthetic_scene.manifest, synthetic_scene.estimates, synthetic_scene.ground_truths
        )
        separate: SceneEvaluation = lifelong_service.evaluate_per_sequence(
            synthetic_scene.manifest, synthetic_scene.estimates, synthetic_scene.ground_truths
        )

        for propagated, own in zip(lifelong.per_sequence, separate.per_sequence):
            np.testing.assert_allclose(own.alignment.transform.translation, lifelong.propagation_transform.translation, atol=1e-9)
            assert rotation_angle(
                own.alignment.transform.to_transform().rotation, lifelong.propagation_transform.to_transform().rotation
            ) < 1e-7
            assert propagated.robustness.cr == pytest.approx(own.robustness.cr, abs=1e-12)
            assert propagated.robustness.cs_r == own.robustness.cs_r
            assert [e.ate for e in propagated.timeline] == pytest.approx([e.ate for e in own.timeline], abs=1e-9)


class TestPair:

    def test_immediate_relocalization(self, synthetic_scene: SyntheticScene):
        manifest: SceneManifest = synthetic_scene.manifest
        ids: list[str] = [s.sequence_id for s in manifest.sequences]

        pair: PairEvaluation = lifelong_service.evaluate_pair(
            manifest, ids[0], ids[1], dict(zip(ids, synthetic_scene.estimates)), dict(zip(ids, synthetic_scene.ground_truths))
        )

        assert pair.cs_r == 1.0
        assert pair.first_correct is True
        assert pair.metric_config.epsilon == 0.3
        assert math.isinf(pair.metric_config.phi)

    def test_delayed_relocalization(self, synthetic_scene: SyntheticScene):
        manifest: SceneManifest = synthetic_scene.manifest
        ids: list[str] = [s.sequence_id for s in manifest.sequences]
        estimates: dict[str, Trajectory] = dict(zip(ids, synthetic_scene.estimates))
        t_min: float = manifest.sequences[1].t_min
        estimates[ids[1]] = estimates[ids[1]].within(t_min + 6.0, manifest.sequences[1].t_max)

        pair: PairEvaluation = lifelong_service.evaluate_pair(
            manifest, ids[0], ids[1], estimates, dict(zip(ids, synthetic_scene.ground_truths))
        )

        assert pair.t0 == pytest.approx(t_min + 6.0)
        assert pair.cs_r == pytest.approx(math.exp(-0.1), abs=1e-9)

    def test_second_sequence_never_localizes(self, synthetic_scene: SyntheticScene):
        manifest: SceneManifest = synthetic_scene.manifest
        ids: list[str] = [s.sequence_id for s in manifest.sequences]
        estimates: dict[str, Trajectory] = dict(zip(ids, synthetic_scene.estimates))
        estimates[ids[1]] = Trajectory.empty()

        pair: PairEvaluation = lifelong_service.evaluate_pair(
            manifest, ids[0], ids[1], estimates, dict(zip(ids, synthetic_scene.ground_truths))
        )

        assert pair.cs_r == 0.0
        assert pair.t0 is None


def test_sensor_extrinsic_moves_ground_truth():
    yaw: Rotation = Rotation.from_axis_angle((0, 0, 1), 90.0)
    ground_truth: Trajectory = Trajectory(
        np.array([0.0, 1.0]), np.zeros((2, 3)), np.array([[0.0, 0.0, 0.0, 1.0], yaw.as_xyzw()])
    )

    moved: Trajectory = lifelong_service.to_sensor_frame(ground_truth, TransformPublic(translation=[1.0, 0.0, 0.0]))

    np.testing.assert_allclose(moved.positions, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], atol=1e-12)
    assert rotation_angle(Rotation.from_xyzw(moved.quaternions[1]), yaw) == pytest.approx(0.0, abs=1e-6)


class TestAggregateScene:

    @pytest.fixture
    def results(self) -> list[SequenceEvaluation]:
        return [
            _sequence("a", (0.0, 10.0), cr=0.5, cr_unbounded=1.0, count=100, ate=0.2, gated=(40, 0.1)),
            _sequence("b", (20.0, 50.0), cr=0.2, cr_unbounded=0.5, count=300, ate=0.4, gated=(50, 0.3)),
        ]

    def test_per_sequence_weights(self, results):
        scene: SceneEvaluation = lifelong_service.aggregate_scene("s", EvaluationMode.PER_SEQUENCE, MetricConfig(), results)

        assert scene.scene_cr == pytest.approx((1.0 * 10 + 0.5 * 30) / 40)
        assert scene.scene_ate_rmse == pytest.approx(math.sqrt((100 * 0.04 + 300 * 0.16) / 400))

    def test_lifelong_weights(self, results):
        scene: SceneEvaluation = lifelong_service.aggregate_scene("s", EvaluationMode.LIFELONG, MetricConfig(), results)

        assert scene.scene_cr == pytest.approx((0.5 * 10 + 0.2 * 30) / 40)
        assert scene.scene_ate_rmse == pytest.approx(math.sqrt((40 * 0.01 + 50 * 0.09) / 90))

    def test_no_correct_poses_anywhere(self):
        results = [_sequence("a", (0.0, 10.0), cr=0.0, cr_unbounded=1.0, count=10, ate=5.0, gated=None)]
        scene: SceneEvaluation = lifelong_service.aggregate_scene("s", EvaluationMode.LIFELONG, MetricConfig(), results)
        assert scene.scene_ate_rmse is None

    @pytest.mark.parametrize("mode", [EvaluationMode.PER_SEQUENCE, EvaluationMode.LIFELONG])
    def test_order_of_sequences_does_not_matter(self, results, mode: EvaluationMode):
        results = results + [_sequence("c", (60.0, 65.0), cr=0.9, cr_unbounded=0.8, count=20, ate=0.05, gated=(18, 0.04))]

        forward: SceneEvaluation = lifelong_service.aggregate_scene("s", mode, MetricConfig(), results)
        backward: SceneEvaluation = lifelong_service.aggregate_scene("s", mode, MetricConfig(), results[::-1])
        rotated: SceneEvaluation = lifelong_service.aggregate_scene("s", mode, MetricConfig(), results[1:] + results[:1])

        for other in (backward, rotated):
            assert other.scene_cr == pytest.approx(forward.scene_cr, abs=1e-12)
            assert other.scene_ate_rmse == pytest.approx(forward.scene_ate_rmse, abs=1e-12)
