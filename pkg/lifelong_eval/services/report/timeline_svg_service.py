"""
Correctness timelines as SVG: one horizontal track per sequence, correct
stretches in blue, incorrect in red, dots for correct initialization or
re-localization and crosses for incorrect ones.
"""
from html import escape
from pathlib import Path

import numpy as np

from lifelong_eval.constants import COLOR_AXIS, COLOR_CORRECT, COLOR_INCORRECT, SVG_LABEL_WIDTH, SVG_MARGIN, \
    SVG_TRACK_HEIGHT, SVG_WIDTH
from lifelong_eval.custom_types import CorrectnessStatus
from lifelong_eval.models.report import ReportDocument, SequenceTimeline

TICK_COUNT: int = 6
MARKER_SIZE: float = 4.0


class SvgDocument:
    """
    Minimal SVG writer. Coordinates are printed at fixed precision so equal
    input gives byte-identical text.
    """

    def __init__(self, width: int, height: int) -> None:
        self.width: int = width
        self.height: int = height
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n',
            f'<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
            f'xmlns="http://www.w3.org/2000/svg">\n',
        ]

    def group_start(self, css_class: str, title: str | None = None) -> None:
        self.parts.append(f'<g class="{css_class}">\n')
        if title:
            self.parts.append(f'<title>{escape(title)}</title>\n')

    def group_end(self) -> None:
        self.parts.append('</g>\n')

    def rectangle(self, x1: float, y1: float, x2: float, y2: float, fill: str, css_class: str) -> None:
        self.parts.append(
            f'<rect class="{css_class}" x="{x1:.2f}" y="{y1:.2f}" width="{x2 - x1:.2f}" '
            f'height="{y2 - y1:.2f}" fill="{fill}"/>\n'
        )

    def line(self, x1: float, y1: float, x2: float, y2: float, stroke: str, css_class: str = "line") -> None:
        self.parts.append(
            f'<line class="{css_class}" x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{stroke}" stroke-width="1"/>\n'
        )

    def circle(self, x: float, y: float, radius: float, fill: str, css_class: str) -> None:
        self.parts.append(f'<circle class="{css_class}" cx="{x:.2f}" cy="{y:.2f}" r="{radius:.2f}" fill="{fill}"/>\n')

    def cross(self, x: float, y: float, size: float, stroke: str, css_class: str) -> None:
        self.parts.append(
            f'<path class="{css_class}" d="M{x - size:.2f},{y - size:.2f} L{x + size:.2f},{y + size:.2f} '
            f'M{x - size:.2f},{y + size:.2f} L{x + size:.2f},{y - size:.2f}" stroke="{stroke}" stroke-width="2"/>\n'
        )

    def text(self, x: float, y: float, content: str, anchor: str = "start", size: int = 12) -> None:
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}">{escape(content)}</text>\n'
        )

    def get_svg(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def render_timeline(document: ReportDocument) -> str:
    """
    Render the report's timelines.

    Tracks follow the report's sequence order and share one time axis spanning
    every sequence. A report without timelines renders the axes only.

    Args:
        document (ReportDocument): Report carrying `timelines`.

    Returns:
        str: The SVG document.
    """
    timelines: list[SequenceTimeline] = document.timelines
    plot_left: float = SVG_MARGIN + SVG_LABEL_WIDTH
    plot_right: float = SVG_WIDTH - SVG_MARGIN
    plot_top: float = SVG_MARGIN
    plot_bottom: float = plot_top + max(len(timelines), 1) * SVG_TRACK_HEIGHT
    height: int = int(plot_bottom + 2 * SVG_MARGIN)

    if timelines:
        t_low: float = min(timeline.t_min for timeline in timelines)
        t_high: float = max(timeline.t_max for timeline in timelines)
    else:
        t_low, t_high = 0.0, 1.0
    if t_high <= t_low:
        t_high = t_low + 1.0

    def to_x(t: float) -> float:
        return plot_left + (t - t_low) / (t_high - t_low) * (plot_right - plot_left)

    svg: SvgDocument = SvgDocument(SVG_WIDTH, height)
    svg.text(SVG_WIDTH / 2, SVG_MARGIN / 2, f"{document.scene_name} ({document.mode.value})", anchor="middle", size=14)

    # Axes
    svg.group_start("axes")
    svg.line(plot_left, plot_bottom, plot_right, plot_bottom, COLOR_AXIS, "axis")
    svg.line(plot_left, plot_top, plot_left, plot_bottom, COLOR_AXIS, "axis")
    for tick in np.linspace(t_low, t_high, TICK_COUNT):
        x: float = to_x(float(tick))
        svg.line(x, plot_bottom, x, plot_bottom + 5, COLOR_AXIS, "tick")
        svg.text(x, plot_bottom + 18, f"{tick:.1f}", anchor="middle", size=10)
    svg.text((plot_left + plot_right) / 2, plot_bottom + 34, "time [s]", anchor="middle", size=11)
    svg.group_end()

    for index, timeline in enumerate(timelines):
        top: float = plot_top + index * SVG_TRACK_HEIGHT
        middle: float = top + SVG_TRACK_HEIGHT / 2
        bar_top: float = middle - SVG_TRACK_HEIGHT / 6
        bar_bottom: float = middle + SVG_TRACK_HEIGHT / 6

        svg.group_start("track", timeline.sequence_id)
        svg.text(plot_left - 8, middle + 4, timeline.sequence_id, anchor="end")
        svg.line(to_x(timeline.t_min), middle, to_x(timeline.t_max), middle, "#bbbbbb", "span")

        for segment in timeline.segments:
            if segment.status == CorrectnessStatus.ABSENT:
                continue
            correct: bool = segment.status == CorrectnessStatus.CORRECT
            svg.rectangle(
                to_x(segment.start), bar_top, to_x(segment.end), bar_bottom,
                COLOR_CORRECT if correct else COLOR_INCORRECT,
                f"segment {segment.status.value}",
            )

        for event in timeline.events:
            if event.correct:
                svg.circle(to_x(event.time), middle, MARKER_SIZE, COLOR_CORRECT, f"event {event.kind.value} correct")
            else:
                svg.cross(to_x(event.time), middle, MARKER_SIZE, COLOR_INCORRECT,
                          f"event {event.kind.value} incorrect")
        svg.group_end()

    return svg.get_svg()

def save_timeline(document: ReportDocument, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_timeline(document), encoding="utf-8")
