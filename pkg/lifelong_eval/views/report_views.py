from enum import Enum

class ReportView(str, Enum):
    """
    Detail level of a structured report.

    Attributes:
        SUMMARY: Scene and per-sequence metrics only.
        WITH_TIMELINE: Adds correctness segments and events per sequence.
        FULL: Adds the per-pose errors of every sequence.
    """
    SUMMARY = 'summary'
    WITH_TIMELINE = 'with_timeline'
    FULL = 'full'
