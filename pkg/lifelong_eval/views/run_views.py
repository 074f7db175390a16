from enum import Enum

class EvaluationRunView(str, Enum):
    """
    Enum representing different views for evaluation run retrieval.

    Attributes:
        BASIC: Run summary with scene aggregates.
        WITH_SEQUENCES: Includes the stored per-sequence results.
        FULL: Includes the per-sequence results and the stored report document.
    """
    BASIC = 'basic'
    WITH_SEQUENCES = 'with_sequences'
    FULL = 'full'
