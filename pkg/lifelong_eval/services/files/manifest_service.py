"""
Scene manifests (YAML).

    scene: office
    scene_kind: office          # office|home|cafe|corridor|market|custom
    frame_id: map
    sensor_extrinsic: [tx, ty, tz, qx, qy, qz, qw]
    metrics: {epsilon: 1.0, phi: 30.0, delta: 1.0, tau: 60.0, rpe_interval: 1.0, rpe_unit: seconds}
    sequences:
      - {id: office-1, ground_truth: gt/office-1.txt, span: [t_min, t_max]}
    pairs: [[office-1, office-2]]
    perturbation: {...}

Only `scene` and `sequences` (with `id` and `ground_truth`) are required.
A sequence without `span` covers its ground truth from first to last sample.
"""
import logging
from pathlib import Path
from typing import Any, TextIO

import yaml
from pydantic import ValidationError

from lifelong_eval.custom_types import SceneKind
from lifelong_eval.exceptions import ManifestError
from lifelong_eval.models.config import MetricConfig, PerturbationSpec, SceneManifest, SequenceEntry, \
    TransformPublic
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.files.trajectory_file_service import load_trajectory

logger = logging.getLogger(__name__)


def parse_manifest(stream: TextIO | str, base_dir: Path | str = ".") -> SceneManifest:
    """
    Parse and validate a scene manifest.

    Metric thresholds that are omitted take the defaults of the scene kind
    (epsilon) and the global defaults (phi = 30 deg, delta = 1 s, tau = 60 s).
    Relative ground-truth paths resolve against `base_dir`.

    Args:
        stream (TextIO | str): YAML text or stream.
        base_dir (Path | str): Directory of the manifest file.

    Returns:
        SceneManifest: The validated manifest, sequences in file order.

    Raises:
        ManifestError: On malformed YAML, missing fields, unreadable ground truth
            needed for a span, or invalid/overlapping spans.
    """
    try:
        document: Any = yaml.safe_load(stream)
    except yaml.YAMLError as e:
        raise ManifestError(f"Manifest is not valid YAML: {e}") from e
    if not isinstance(document, dict):
        raise ManifestError("Manifest must be a mapping")

    base_dir = Path(base_dir)
    scene_name: Any = document.get("scene")
    if not scene_name:
        raise ManifestError("Manifest has no 'scene' name")

    raw_sequences: Any = document.get("sequences") or []
    if not isinstance(raw_sequences, list) or not raw_sequences:
        raise ManifestError(f"Manifest for scene {scene_name} lists no sequences")

    try:
        scene_kind: SceneKind = _scene_kind(document.get("scene_kind"), str(scene_name))
        metric_config: MetricConfig = MetricConfig.for_scene(scene_kind, **(document.get("metrics") or {}))
        sequences: list[SequenceEntry] = [
            _sequence_entry(raw, index, base_dir) for index, raw in enumerate(raw_sequences, start=1)
        ]

        extrinsic: TransformPublic | None = None
        if document.get("sensor_extrinsic") is not None:
            extrinsic = _transform_from_list(document["sensor_extrinsic"])

        perturbation: PerturbationSpec | None = None
        if document.get("perturbation") is not None:
            perturbation = PerturbationSpec.model_validate(_perturbation_fields(document["perturbation"]))

        return SceneManifest(
            scene_name=str(scene_name),
            scene_kind=scene_kind,
            frame_id=str(document.get("frame_id", "map")),
            sequences=sequences,
            metric_config=metric_config,
            sensor_extrinsic=extrinsic,
            pairs=[tuple(pair) for pair in document.get("pairs") or []],
            perturbation=perturbation,
        )
    except ManifestError:
        raise
    except (ValidationError, TypeError, ValueError) as e:
        raise ManifestError(f"Invalid manifest for scene {scene_name}: {e}") from e

def load_manifest(path: Path | str) -> SceneManifest:
    """
    Read a manifest file; relative paths resolve against its directory.

    Raises:
        OSError: If the file cannot be read.
        ManifestError: See `parse_manifest`.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as stream:
        return parse_manifest(stream, path.parent)

def load_perturbation(path: Path | str) -> PerturbationSpec:
    """
    Read a perturbation from a YAML file: the `perturbation` block of a
    manifest, or a document holding the block's fields directly.

    Raises:
        OSError: If the file cannot be read.
        ManifestError: On malformed YAML or invalid fields.
    """
    path = Path(path)
    try:
        document: Any = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ManifestError(f"{path} is not valid YAML: {e}") from e
    if isinstance(document, dict) and "perturbation" in document:
        document = document["perturbation"]
    try:
        return PerturbationSpec.model_validate(_perturbation_fields(document or {}))
    except ValidationError as e:
        raise ManifestError(f"Invalid perturbation in {path}: {e}") from e

def manifest_to_yaml(manifest: SceneManifest, relative_to: Path | str | None = None) -> str:
    """
    Render a manifest back to YAML.

    Ground-truth paths are written relative to `relative_to` when given.
    """
    sequences: list[dict[str, Any]] = []
    for entry in manifest.sequences:
        ground_truth: str = entry.ground_truth_path
        if relative_to is not None:
            try:
                ground_truth = Path(ground_truth).relative_to(Path(relative_to)).as_posix()
            except ValueError:
                pass
        sequences.append({"id": entry.sequence_id, "ground_truth": ground_truth, "span": [entry.t_min, entry.t_max]})

    document: dict[str, Any] = {
        "scene": manifest.scene_name,
        "scene_kind": manifest.scene_kind.value,
        "frame_id": manifest.frame_id,
        "metrics": manifest.metric_config.model_dump(mode="json"),
        "sequences": sequences,
    }
    if manifest.sensor_extrinsic is not None:
        transform = manifest.sensor_extrinsic
        document["sensor_extrinsic"] = [*transform.translation, *transform.rotation[1:], transform.rotation[0]]
    if manifest.pairs:
        document["pairs"] = [list(pair) for pair in manifest.pairs]
    if manifest.perturbation is not None:
        document["perturbation"] = manifest.perturbation.model_dump(mode="json")
    return yaml.safe_dump(document, sort_keys=False)

def _scene_kind(value: Any, scene_name: str) -> SceneKind:
    if value is not None:
        return SceneKind(str(value).lower())
    # "office" or "office-3" style names pick their kind
    prefix: str = scene_name.lower().split("-")[0]
    try:
        return SceneKind(prefix)
    except ValueError:
        return SceneKind.CUSTOM

def _sequence_entry(raw: Any, index: int, base_dir: Path) -> SequenceEntry:
    if not isinstance(raw, dict):
        raise ManifestError(f"Sequence #{index} must be a mapping")
    sequence_id: Any = raw.get("id")
    if not sequence_id:
        raise ManifestError(f"Sequence #{index} has no 'id'")
    ground_truth: Any = raw.get("ground_truth")
    if not ground_truth:
        raise ManifestError(f"Sequence {sequence_id} has no 'ground_truth' path")

    path: Path = Path(ground_truth)
    if not path.is_absolute():
        path = base_dir / path

    span: Any = raw.get("span")
    if span is None:
        try:
            trajectory: Trajectory = load_trajectory(path)
        except OSError as e:
            raise ManifestError(f"Sequence {sequence_id}: cannot read ground truth {path} to derive its span: {e}") from e
        if len(trajectory) < 2:
            raise ManifestError(f"Sequence {sequence_id}: ground truth {path} too short to derive a span")
        span = [trajectory.start, trajectory.end]
        logger.debug("Sequence %s span derived from ground truth: %s", sequence_id, span)

    if not isinstance(span, (list, tuple)) or len(span) != 2:
        raise ManifestError(f"Sequence {sequence_id}: span must be [t_min, t_max]")

    return SequenceEntry(sequence_id=str(sequence_id), ground_truth_path=str(path),
                         t_min=float(span[0]), t_max=float(span[1]))

def _transform_from_list(values: Any) -> TransformPublic:
    if not isinstance(values, (list, tuple)) or len(values) != 7:
        raise ManifestError("sensor_extrinsic must be [tx, ty, tz, qx, qy, qz, qw]")
    tx, ty, tz, qx, qy, qz, qw = (float(v) for v in values)
    return TransformPublic(rotation=[qw, qx, qy, qz], translation=[tx, ty, tz])

def _perturbation_fields(raw: Any) -> dict[str, Any]:
    if not isinstance(raw, dict):
        raise ManifestError("perturbation must be a mapping")
    fields: dict[str, Any] = dict(raw)
    if isinstance(fields.get("rigid_offset"), (list, tuple)):
        fields["rigid_offset"] = _transform_from_list(fields["rigid_offset"])
    return fields
