"""
Command line: evaluate, lifelong, pair, sync and synth.

Exit status is 0 whenever the evaluation ran, whatever the metric values;
1 on unreadable or invalid input; 2 on usage errors.
"""
import logging
import sys
from pathlib import Path
from typing import Annotated, Optional

import typer

from lifelong_eval.constants import SYNC_COARSE_STEP, SYNC_RESOLUTION, SYNC_WINDOW, TOOL_NAME
from lifelong_eval.custom_types import EvaluationMode, SceneKind, TrajectoryShape
from lifelong_eval.exceptions import ConfigurationError, LifelongEvalError
from lifelong_eval.models.config import PerturbationSpec
from lifelong_eval.models.evaluation import OffsetEstimate
from lifelong_eval.models.report import ReportDocument
from lifelong_eval.services.evaluation import scene_service
from lifelong_eval.services.files.manifest_service import load_perturbation
from lifelong_eval.services.files.trajectory_file_service import load_trajectory
from lifelong_eval.services.report import report_service, timeline_svg_service
from lifelong_eval.services.tools import sync_service, synthgen_service
from lifelong_eval.views.report_views import ReportView

logger = logging.getLogger(__name__)

app: typer.Typer = typer.Typer(name=TOOL_NAME, help="Lifelong SLAM benchmark evaluation.", no_args_is_help=True)

# Shared option types
ManifestArg = Annotated[Path, typer.Argument(help="Scene manifest (YAML).")]
EstimatesArg = Annotated[
    list[Path], typer.Argument(help="Estimate files in manifest order, or one directory of <sequence id>.txt.")
]
AteOption = Annotated[Optional[float], typer.Option("--ate-threshold", help="epsilon, meters.")]
AoeOption = Annotated[Optional[float], typer.Option("--aoe-threshold", help="phi, degrees.")]
DeltaOption = Annotated[Optional[float], typer.Option("--delta", help="Validity window of an estimate, seconds.")]
TauOption = Annotated[Optional[float], typer.Option("--tau", help="Re-localization decay, seconds.")]
ReportOption = Annotated[Optional[Path], typer.Option("--report", "-o", help="Report file; stdout when omitted.")]
ViewOption = Annotated[ReportView, typer.Option("--view", help="Report detail level.")]


@app.callback()
def main(verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")] = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )

def _fail(error: Exception) -> typer.Exit:
    typer.echo(f"error: {error}", err=True)
    return typer.Exit(code=1)

def _emit(
        document: ReportDocument,
        report: Path | None,
        view: ReportView,
        csv: Path | None = None,
        svg: Path | None = None
) -> None:
    if report is None:
        typer.echo(report_service.render_report(document, view), nl=False)
    else:
        report_service.save_report(document, report, view)
    if csv is not None:
        report_service.save_pose_errors(document, csv)
    if svg is not None:
        timeline_svg_service.save_timeline(document, svg)

def _scene_command(
        mode: EvaluationMode,
        manifest: Path,
        estimates: list[Path],
        overrides: dict[str, float | None],
        scale_free: bool,
        report: Path | None,
        view: ReportView,
        csv: Path | None,
        svg: Path | None,
        workers: int
) -> None:
    try:
        document: ReportDocument = scene_service.run_scene(
            manifest, estimates, mode, overrides, scale_free, max_workers=workers
        )
        _emit(document, report, view, csv, svg)
    except (LifelongEvalError, OSError) as e:
        raise _fail(e) from e

@app.command()
def evaluate(
        manifest: ManifestArg,
        estimates: EstimatesArg,
        ate_threshold: AteOption = None,
        aoe_threshold: AoeOption = None,
        delta: DeltaOption = None,
        tau: TauOption = None,
        scale_free: Annotated[bool, typer.Option("--scale-free", help="Similarity (Umeyama) alignment.")] = False,
        report: ReportOption = None,
        view: ViewOption = ReportView.WITH_TIMELINE,
        csv: Annotated[Optional[Path], typer.Option("--csv", help="Per-pose errors (CSV).")] = None,
        svg: Annotated[Optional[Path], typer.Option("--svg", help="Correctness timeline (SVG).")] = None,
        workers: Annotated[int, typer.Option("--workers", min=1, help="Concurrent sequences.")] = 1
) -> None:
    """Evaluate every sequence separately, each with its own alignment."""
    overrides: dict[str, float | None] = {"epsilon": ate_threshold, "phi": aoe_threshold, "delta": delta, "tau": tau}
    _scene_command(EvaluationMode.PER_SEQUENCE, manifest, estimates, overrides, scale_free,
                   report, view, csv, svg, workers)

@app.command()
def lifelong(
        manifest: ManifestArg,
        estimates: EstimatesArg,
        ate_threshold: AteOption = None,
        aoe_threshold: AoeOption = None,
        delta: DeltaOption = None,
        tau: TauOption = None,
        scale_free: Annotated[bool, typer.Option("--scale-free", help="Fit a scale on sequence 1 too.")] = False,
        report: ReportOption = None,
        view: ViewOption = ReportView.WITH_TIMELINE,
        csv: Annotated[Optional[Path], typer.Option("--csv", help="Per-pose errors (CSV).")] = None,
        svg: Annotated[Optional[Path], typer.Option("--svg", help="Correctness timeline (SVG).")] = None,
        workers: Annotated[int, typer.Option("--workers", min=1, help="Concurrent sequences.")] = 1
) -> None:
    """Evaluate a scene in one persistent map frame, aligned on its first sequence."""
    overrides: dict[str, float | None] = {"epsilon": ate_threshold, "phi": aoe_threshold, "delta": delta, "tau": tau}
    _scene_command(EvaluationMode.LIFELONG, manifest, estimates, overrides, scale_free,
                   report, view, csv, svg, workers)

@app.command()
def pair(
        manifest: ManifestArg,
        estimates: EstimatesArg,
        first: Annotated[Optional[str], typer.Option("--first", help="Sequence mapped first.")] = None,
        second: Annotated[Optional[str], typer.Option("--second", help="Sequence that must re-localize.")] = None,
        ate_threshold: AteOption = None,
        aoe_threshold: AoeOption = None,
        tau: TauOption = None,
        report: ReportOption = None
) -> None:
    """Re-localization score of controlled-factor pairs (defaults: 0.3 m, any orientation, 60 s)."""
    try:
        if (first is None) != (second is None):
            raise ConfigurationError("--first and --second go together")
        pairs: list[tuple[str, str]] | None = [(first, second)] if first is not None else None
        document: ReportDocument = scene_service.run_scene(
            manifest, estimates, EvaluationMode.PAIR,
            {"epsilon": ate_threshold, "phi": aoe_threshold, "tau": tau}, pairs=pairs,
        )
        _emit(document, report, ReportView.SUMMARY)
    except (LifelongEvalError, OSError) as e:
        raise _fail(e) from e

@app.command()
def sync(
        reference: Annotated[Path, typer.Argument(help="Reference trajectory.")],
        target: Annotated[Path, typer.Argument(help="Trajectory whose clock offset is sought.")],
        window: Annotated[float, typer.Option("--window", help="Searched offsets: +/- seconds.")] = SYNC_WINDOW,
        step: Annotated[float, typer.Option("--step", help="Coarse grid step, seconds.")] = SYNC_COARSE_STEP,
        resolution: Annotated[float, typer.Option("--resolution", help="Refinement tolerance, seconds.")] = SYNC_RESOLUTION,
        output: Annotated[Optional[Path], typer.Option("--output", "-o", help="Result file; stdout when omitted.")] = None
) -> None:
    """Estimate the time offset of TARGET relative to REFERENCE (subtract it from TARGET's timestamps)."""
    try:
        estimate: OffsetEstimate = sync_service.estimate_offset(
            load_trajectory(reference), load_trajectory(target), window, step, resolution
        )
        text: str = estimate.model_dump_json(indent=2) + "\n"
        if output is None:
            typer.echo(text, nl=False)
        else:
            output.write_text(text, encoding="utf-8")
    except (LifelongEvalError, OSError) as e:
        raise _fail(e) from e

@app.command()
def synth(
        output_dir: Annotated[Path, typer.Argument(help="Directory receiving gt/, est/ and manifest.yaml.")],
        shape: Annotated[TrajectoryShape, typer.Option("--shape")] = TrajectoryShape.LOOP,
        scene: Annotated[str, typer.Option("--scene", help="Scene name.")] = "synthetic",
        scene_kind: Annotated[SceneKind, typer.Option("--scene-kind")] = SceneKind.CUSTOM,
        sequences: Annotated[int, typer.Option("--sequences", min=1)] = 1,
        duration: Annotated[float, typer.Option("--duration", help="Seconds per sequence.")] = 30.0,
        rate: Annotated[float, typer.Option("--rate", help="Hz.")] = 30.0,
        gap: Annotated[float, typer.Option("--gap", help="Seconds between sequences.")] = 10.0,
        seed: Annotated[int, typer.Option("--seed")] = 0,
        perturbation: Annotated[
            Optional[Path], typer.Option("--perturbation", help="YAML file (a manifest or a bare block) with the perturbation to apply.")
        ] = None
) -> None:
    """Write a synthetic scene: ground truth, perturbed estimates and its manifest."""
    try:
        spec: PerturbationSpec | None = None
        if perturbation is not None:
            spec = load_perturbation(perturbation)
        generated: synthgen_service.SyntheticScene = synthgen_service.generate_scene(
            scene, shape, sequences, duration, rate, spec, seed, gap, scene_kind
        )
        manifest_path: Path = synthgen_service.write_scene(generated, output_dir)
        typer.echo(str(manifest_path))
    except (LifelongEvalError, OSError) as e:
        raise _fail(e) from e


if __name__ == "__main__":
    app()
