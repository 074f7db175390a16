"""
Synthetic ground truth and controlled perturbations.

Randomness comes from numpy's PCG64 generator (`np.random.default_rng(seed)`),
so a seed reproduces the same trajectory on every platform.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation

from lifelong_eval.custom_types import SceneKind, TrajectoryShape
from lifelong_eval.exceptions import InvalidInputError
from lifelong_eval.models.config import MetricConfig, PerturbationSpec, SceneManifest, SequenceEntry
from lifelong_eval.models.geometry import SimilarityTransform
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.files.manifest_service import manifest_to_yaml
from lifelong_eval.services.files.trajectory_file_service import save_trajectory
from lifelong_eval.services.geometry.trajgeom_service import apply_to_arrays, quaternion_multiply, rotate_vectors

logger = logging.getLogger(__name__)

DEFAULT_SIZE: float = 5.0
BACK_AND_FORTH_FREQUENCY: float = 0.5
MANIFEST_NAME: str = "manifest.yaml"


@dataclass(frozen=True)
class SyntheticScene:
    """
    A generated scene: manifest plus ground truth and estimates per sequence.

    Attributes:
        manifest (SceneManifest): Ground-truth paths are relative (gt/<id>.txt).
        ground_truths (list[Trajectory]): In manifest order.
        estimates (list[Trajectory]): Perturbed copies, one persistent map frame.
    """
    manifest: SceneManifest
    ground_truths: list[Trajectory]
    estimates: list[Trajectory]


def _yaw_quaternions(yaw: np.ndarray) -> np.ndarray:
    return ScipyRotation.from_euler("z", yaw).as_quat()

def _tangent_yaw(positions: np.ndarray) -> np.ndarray:
    velocity: np.ndarray = np.gradient(positions, axis=0)
    return np.arctan2(velocity[:, 1], velocity[:, 0])

def _u_shape(progress: np.ndarray, size: float) -> np.ndarray:
    # Two legs of length `size` joined by a half circle, at constant speed
    radius: float = size / 2.0
    total: float = 2.0 * size + math.pi * radius
    arc: np.ndarray = progress * total
    turn: np.ndarray = np.clip((arc - size) / radius, 0.0, math.pi) - math.pi / 2.0

    x: np.ndarray = np.where(arc < size, arc, size + radius * np.cos(turn))
    y: np.ndarray = np.where(arc < size, 0.0, radius + radius * np.sin(turn))
    back: np.ndarray = arc > size + math.pi * radius
    x = np.where(back, size - (arc - size - math.pi * radius), x)
    y = np.where(back, 2.0 * radius, y)
    return np.column_stack([x, y, np.zeros_like(x)])

def generate_trajectory(
        shape: TrajectoryShape,
        duration: float,
        rate: float,
        seed: int = 0,
        start_time: float = 0.0,
        size: float = DEFAULT_SIZE,
        frame_id: str = "map"
) -> Trajectory:
    """
    Smooth synthetic trajectory of a given shape.

    Samples are taken at `rate` Hz from `start_time`, round(duration * rate) of
    them. The seed varies the size (+/-20 %), the starting heading and a gentle
    height undulation; the same seed gives bit-identical output. Poses head
    along the path tangent, except back-and-forth which oscillates along one
    axis at constant heading. A loop closes exactly on its start.

    Args:
        shape (TrajectoryShape): loop, corridor, u-shape or back-and-forth.
        duration (float): Seconds, positive.
        rate (float): Hz, positive.
        seed (int): Generator seed.
        start_time (float): First timestamp.
        size (float): Nominal extent in meters.
        frame_id (str): Frame of the poses.

    Returns:
        Trajectory: The generated ground truth.

    Raises:
        InvalidInputError: If duration or rate is not positive, or fewer than 2 samples result.
    """
    if not (duration > 0 and rate > 0):
        raise InvalidInputError(f"duration and rate must be positive, got {duration} s and {rate} Hz")
    count: int = int(round(duration * rate))
    if count < 2:
        raise InvalidInputError(f"{duration} s at {rate} Hz gives fewer than 2 samples")

    rng: np.random.Generator = np.random.default_rng(seed)
    scale: float = size * rng.uniform(0.8, 1.2)
    heading: float = rng.uniform(-math.pi, math.pi)
    undulation: float = rng.uniform(0.0, 0.1) * scale
    phase: float = rng.uniform(0.0, 2.0 * math.pi)

    elapsed: np.ndarray = np.arange(count) / rate
    progress: np.ndarray = elapsed / elapsed[-1]
    cycle: np.ndarray = 2.0 * math.pi * progress

    match shape:
        case TrajectoryShape.LOOP:
            radius: float = scale / 2.0
            local: np.ndarray = np.column_stack([
                radius * np.sin(cycle),
                radius * (1.0 - np.cos(cycle)),
                undulation * (np.sin(cycle + phase) - math.sin(phase)),
            ])
        case TrajectoryShape.CORRIDOR:
            length: float = 4.0 * scale
            local = np.column_stack([
                length * progress,
                0.05 * scale * np.sin(3.0 * cycle + phase),
                undulation * np.sin(cycle + phase),
            ])
        case TrajectoryShape.U_SHAPE:
            local = _u_shape(progress, scale)
            local[:, 2] = undulation * np.sin(cycle + phase)
        case TrajectoryShape.BACK_AND_FORTH:
            amplitude: float = 0.2 * scale
            local = np.column_stack([
                amplitude * np.sin(2.0 * math.pi * BACK_AND_FORTH_FREQUENCY * elapsed),
                np.zeros(count),
                np.zeros(count),
            ])
        case _:
            raise InvalidInputError(f"Unknown trajectory shape: {shape}")

    # Rotate the whole shape to the seeded heading
    turn: np.ndarray = _yaw_quaternions(np.array([heading]))[0]
    positions: np.ndarray = rotate_vectors(turn, local)

    if shape == TrajectoryShape.LOOP:
        positions[-1] = positions[0]

    yaw: np.ndarray = (
        np.full(count, heading) if shape == TrajectoryShape.BACK_AND_FORTH else _tangent_yaw(positions)
    )
    return Trajectory(
        start_time + elapsed,
        positions,
        _yaw_quaternions(yaw),
        frame_id,
        f"synthetic-{shape.value}-{seed}",
    )

def perturb(trajectory: Trajectory, spec: PerturbationSpec, seed: int = 0) -> Trajectory:
    """
    Apply a perturbation, step by step in a fixed order.

    1. time shift: every timestamp + time_shift
    2. frame change: rigid_offset applied to every pose
    3. drift: drift_rate * (t - t_first) along drift_direction, plus heading drift
       of drift_yaw_rate * (t - t_first) about z on orientations
    4. noise: Gaussian body-frame position noise (noise_sigma, meters), then
       body-frame rotation-vector noise (noise_sigma_rotation, degrees)
    5. dropouts: records with t_a <= t < t_b removed; a window missing the
       trajectory span is logged as a warning
    6. jump: jump_displacement added from jump_time on

    Steps with a zero parameter are skipped, so a zero spec returns the input
    values unchanged.

    Args:
        trajectory (Trajectory): Input trajectory.
        spec (PerturbationSpec): What to apply.
        seed (int): Seed of the noise generator.

    Returns:
        Trajectory: The perturbed trajectory.
    """
    if trajectory.is_empty:
        return trajectory

    timestamps: np.ndarray = trajectory.timestamps
    positions: np.ndarray = trajectory.positions
    quaternions: np.ndarray = trajectory.quaternions

    if spec.time_shift != 0.0:
        timestamps = timestamps + spec.time_shift

    offset: SimilarityTransform = spec.rigid_offset.to_transform()
    if offset != SimilarityTransform.identity():
        positions, quaternions = apply_to_arrays(offset, positions, quaternions)

    elapsed: np.ndarray = timestamps - timestamps[0]
    if spec.drift_rate > 0.0:
        direction: np.ndarray = np.asarray(spec.drift_direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        positions = positions + spec.drift_rate * elapsed[:, None] * direction
    if spec.drift_yaw_rate != 0.0:
        yaw_drift: np.ndarray = _yaw_quaternions(np.radians(spec.drift_yaw_rate * elapsed))
        quaternions = quaternion_multiply(yaw_drift, quaternions)

    if spec.noise_sigma > 0.0 or spec.noise_sigma_rotation > 0.0:
        rng: np.random.Generator = np.random.default_rng(seed)
        if spec.noise_sigma > 0.0:
            body_noise: np.ndarray = rng.normal(0.0, spec.noise_sigma, size=positions.shape)
            positions = positions + rotate_vectors(quaternions, body_noise)
        if spec.noise_sigma_rotation > 0.0:
            rotvec: np.ndarray = rng.normal(0.0, math.radians(spec.noise_sigma_rotation), size=positions.shape)
            quaternions = quaternion_multiply(quaternions, ScipyRotation.from_rotvec(rotvec).as_quat())

    keep: np.ndarray = np.ones(len(timestamps), dtype=bool)
    for start, end in spec.dropout_windows:
        if end <= timestamps[0] or start > timestamps[-1]:
            logger.warning(
                "Dropout window [%s, %s) lies outside the trajectory span [%s, %s] and removes nothing",
                start, end, float(timestamps[0]), float(timestamps[-1])
            )
        keep &= ~((timestamps >= start) & (timestamps < end))

    if spec.jump_time is not None:
        jumped: np.ndarray = timestamps >= spec.jump_time
        positions = positions + jumped[:, None] * np.asarray(spec.jump_displacement, dtype=float)

    result: Trajectory = trajectory.replace(timestamps=timestamps, positions=positions, quaternions=quaternions)
    if not np.all(keep):
        logger.debug("Dropouts removed %d of %d poses", int(np.count_nonzero(~keep)), len(keep))
        result = result.select(keep)
    return result

def generate_scene(
        scene_name: str,
        shape: TrajectoryShape,
        sequence_count: int,
        duration: float,
        rate: float,
        spec: PerturbationSpec | None = None,
        seed: int = 0,
        gap: float = 10.0,
        scene_kind: SceneKind | None = None
) -> SyntheticScene:
    """
    Scene of `sequence_count` sequences with estimates in one persistent map frame.

    Sequence k (from 1) starts at (k - 1) * (duration + gap) seconds so that
    spans never overlap. Ground truth k uses seed + k; its estimate is the
    ground truth perturbed by `spec` with the same seed, so every estimate
    shares the spec's frame change.

    Raises:
        InvalidInputError: If sequence_count < 1 or gap < 0.
    """
    if sequence_count < 1:
        raise InvalidInputError(f"A scene needs at least one sequence, got {sequence_count}")
    if gap < 0:
        raise InvalidInputError(f"gap must not be negative, got {gap}")
    spec = spec or PerturbationSpec()

    ground_truths: list[Trajectory] = []
    estimates: list[Trajectory] = []
    entries: list[SequenceEntry] = []
    for index in range(1, sequence_count + 1):
        sequence_id: str = f"{scene_name}-{index}"
        start: float = (index - 1) * (duration + gap)
        ground_truth: Trajectory = generate_trajectory(shape, duration, rate, seed + index, start).replace(
            source_label=sequence_id
        )
        ground_truths.append(ground_truth)
        estimates.append(perturb(ground_truth, spec, seed + index))
        entries.append(SequenceEntry(
            sequence_id=sequence_id,
            ground_truth_path=f"gt/{sequence_id}.txt",
            t_min=ground_truth.start,
            t_max=ground_truth.end,
        ))

    kind: SceneKind = scene_kind or SceneKind.CUSTOM
    manifest: SceneManifest = SceneManifest(
        scene_name=scene_name,
        scene_kind=kind,
        sequences=entries,
        metric_config=MetricConfig.for_scene(kind),
        pairs=[(entries[i].sequence_id, entries[i + 1].sequence_id) for i in range(len(entries) - 1)],
        perturbation=None if spec.is_identity else spec,
    )
    logger.info("Generated scene %s: %d %s sequences", scene_name, sequence_count, shape.value)
    return SyntheticScene(manifest, ground_truths, estimates)

def write_scene(scene: SyntheticScene, directory: Path | str) -> Path:
    """
    Write gt/<id>.txt, est/<id>.txt and manifest.yaml under `directory`.

    Returns:
        Path: The manifest file.
    """
    directory = Path(directory)
    for entry, ground_truth, estimate in zip(scene.manifest.sequences, scene.ground_truths, scene.estimates):
        save_trajectory(ground_truth, directory / entry.ground_truth_path)
        save_trajectory(estimate, directory / "est" / f"{entry.sequence_id}.txt")

    manifest_path: Path = directory / MANIFEST_NAME
    manifest_path.write_text(manifest_to_yaml(scene.manifest), encoding="utf-8")
    return manifest_path
