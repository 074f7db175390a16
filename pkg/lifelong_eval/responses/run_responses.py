from typing import TypeAlias, Union

from lifelong_eval.models.runs import EvaluationRunFull, EvaluationRunPublic, EvaluationRunPublicWithSequences

# One alias per endpoint shape; the requested view picks the variant

EvaluationRunResponse: TypeAlias = Union[
    list[EvaluationRunPublic],
    list[EvaluationRunPublicWithSequences],
    list[EvaluationRunFull],
]

EvaluationRunResponseItem: TypeAlias = Union[
    EvaluationRunPublic,
    EvaluationRunPublicWithSequences,
    EvaluationRunFull,
]
