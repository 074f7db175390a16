"""
Scene runs from files: manifest + estimate files in, report document out.
Shared by the command line and the evaluation-run store.
"""
import logging
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from lifelong_eval.custom_types import EvaluationMode
from lifelong_eval.exceptions import ConfigurationError, InvalidInputError
from lifelong_eval.models.config import MetricConfig, SceneManifest
from lifelong_eval.models.evaluation import PairEvaluation, SceneEvaluation
from lifelong_eval.models.report import ReportDocument
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.evaluation import lifelong_service
from lifelong_eval.services.files.manifest_service import load_manifest
from lifelong_eval.services.files.trajectory_file_service import load_trajectories
from lifelong_eval.services.report import report_service

logger = logging.getLogger(__name__)


def metric_config(
        base: MetricConfig,
        epsilon: float | None = None,
        phi: float | None = None,
        delta: float | None = None,
        tau: float | None = None
) -> MetricConfig:
    """
    Apply threshold overrides.

    Raises:
        ConfigurationError: If an override is out of range.
    """
    try:
        return base.with_overrides(epsilon=epsilon, phi=phi, delta=delta, tau=tau)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid metric override: {e}") from e

def resolve_estimate_paths(manifest: SceneManifest, paths: Sequence[Path | str]) -> list[Path]:
    """
    One estimate file per sequence, in manifest order.

    A single directory stands for <directory>/<sequence id>.txt per sequence.

    Raises:
        InvalidInputError: If the number of files does not match the sequences.
    """
    resolved: list[Path] = [Path(path) for path in paths]
    if len(resolved) == 1 and resolved[0].is_dir():
        directory: Path = resolved[0]
        return [directory / f"{entry.sequence_id}.txt" for entry in manifest.sequences]
    if len(resolved) != len(manifest.sequences):
        raise InvalidInputError(
            f"Scene {manifest.scene_name} has {len(manifest.sequences)} sequences "
            f"but {len(resolved)} estimate files were given"
        )
    return resolved

def load_scene(
        manifest: SceneManifest,
        estimate_paths: Sequence[Path | str],
        max_workers: int = 1
) -> tuple[list[Trajectory], list[Trajectory]]:
    """
    Read estimates and ground truths of a scene, both in manifest order.

    Raises:
        OSError: If a file cannot be read.
        TrajectoryParseError: On malformed files, naming file and line.
    """
    paths: list[Path] = resolve_estimate_paths(manifest, estimate_paths)
    estimates: list[Trajectory] = load_trajectories(paths, manifest.frame_id, max_workers)
    ground_truths: list[Trajectory] = load_trajectories(
        [Path(entry.ground_truth_path) for entry in manifest.sequences], manifest.frame_id, max_workers
    )
    return estimates, ground_truths

def run_scene(
        manifest_path: Path | str,
        estimate_paths: Sequence[Path | str],
        mode: EvaluationMode,
        overrides: dict[str, float | None] | None = None,
        scale_free: bool = False,
        pairs: list[tuple[str, str]] | None = None,
        max_workers: int = 1
) -> ReportDocument:
    """
    Evaluate a scene from files and assemble its report.

    Args:
        manifest_path (Path | str): Scene manifest.
        estimate_paths (Sequence[Path | str]): Estimate files in manifest order, or one directory.
        mode (EvaluationMode): per_sequence, lifelong or pair.
        overrides (dict[str, float | None] | None): epsilon/phi/delta/tau overrides.
        scale_free (bool): Similarity alignment (per-sequence and lifelong modes).
        pairs (list[tuple[str, str]] | None): Pairs to score in pair mode; defaults to the manifest's.
        max_workers (int): Files read and sequences evaluated concurrently.

    Returns:
        ReportDocument: The full report.

    Raises:
        LifelongEvalError: On invalid input or an unalignable first sequence.
        OSError: If a file cannot be read.
    """
    manifest: SceneManifest = load_manifest(manifest_path)
    estimates, ground_truths = load_scene(manifest, estimate_paths, max_workers)
    overrides = overrides or {}

    match mode:
        case EvaluationMode.PER_SEQUENCE:
            config: MetricConfig = metric_config(manifest.metric_config, **overrides)
            scene: SceneEvaluation = lifelong_service.evaluate_per_sequence(
                manifest, estimates, ground_truths, config, scale_free, max_workers
            )
            return report_service.build_report(scene, manifest)
        case EvaluationMode.LIFELONG:
            config = metric_config(manifest.metric_config, **overrides)
            scene = lifelong_service.evaluate_lifelong(
                manifest, estimates, ground_truths, config, scale_free, max_workers
            )
            return report_service.build_report(scene, manifest)
        case EvaluationMode.PAIR:
            config = metric_config(lifelong_service.pair_metric_config(manifest.metric_config), **overrides)
            selected: list[tuple[str, str]] = pairs or manifest.pairs
            if not selected:
                raise InvalidInputError(f"Scene {manifest.scene_name} lists no pairs to score")
            by_id_estimates: dict[str, Trajectory] = {
                entry.sequence_id: estimate for entry, estimate in zip(manifest.sequences, estimates)
            }
            by_id_truths: dict[str, Trajectory] = {
                entry.sequence_id: truth for entry, truth in zip(manifest.sequences, ground_truths)
            }
            results: list[PairEvaluation] = []
            for first_id, second_id in selected:
                if first_id not in by_id_estimates or second_id not in by_id_estimates:
                    raise InvalidInputError(f"Pair ({first_id}, {second_id}) names a sequence not in the manifest")
                results.append(lifelong_service.evaluate_pair(
                    manifest, first_id, second_id, by_id_estimates, by_id_truths, config
                ))
            return report_service.build_pair_report(manifest, results, config)
        case _:
            raise InvalidInputError(f"Invalid evaluation mode: {mode}")
