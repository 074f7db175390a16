import logging
from typing import Any

from pydantic import ValidationError
from sqlalchemy.exc import OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError
from sqlalchemy.orm import selectinload
from sqlalchemy.sql import Select
from sqlmodel import Session, select

from lifelong_eval.custom_types import OrderByType
from lifelong_eval.exceptions import InvalidInputError, LifelongEvalError, ResourceNotFoundError
from lifelong_eval.models.evaluation import SequenceEvaluation
from lifelong_eval.models.report import ReportDocument
from lifelong_eval.models.runs import EvaluationRun, EvaluationRunCreate, EvaluationRunFull, EvaluationRunPublic, \
    EvaluationRunPublicWithSequences, EvaluationRunUpdate, SequenceResult
from lifelong_eval.responses.run_responses import EvaluationRunResponse, EvaluationRunResponseItem
from lifelong_eval.services.evaluation import scene_service
from lifelong_eval.services.report import report_service
from lifelong_eval.views.report_views import ReportView
from lifelong_eval.views.run_views import EvaluationRunView

logger = logging.getLogger(__name__)


def get_all(
        session: Session,
        offset: int = 0,
        limit: int = 0,
        order_by: OrderByType = OrderByType.DESC,
        scene_name: str | None = None,
        view: EvaluationRunView = EvaluationRunView.BASIC
) -> EvaluationRunResponse:
    """
    Retrieve stored evaluation runs, newest first by default.

    Args:
        session (Session): SQLAlchemy session for database operations.
        offset (int): Number of items to skip for pagination.
        limit (int): Maximum number of items to return. If 0, no limit is applied.
        order_by (OrderByType): Order by creation (ASC or DESC).
        scene_name (str | None): Only runs of this scene.
        view (EvaluationRunView): Level of detail of each run.

    Returns:
        EvaluationRunResponse: The runs serialized according to the view.

    Raises:
        RuntimeError: If a database or unexpected error occurs.
        ValueError: If a data validation error occurs.
    """

    try:
        # Initialize the base query
        query: Select = select(EvaluationRun)

        # Filter by scene
        if scene_name is not None:
            query = query.where(EvaluationRun.scene_name == scene_name) # type: ignore[arg-type]

        # Order by creation, id breaks ties
        if order_by == OrderByType.ASC:
            query = query.order_by(EvaluationRun.created_at.asc(), EvaluationRun.id.asc()) # type: ignore[union-attr]
        else:
            query = query.order_by(EvaluationRun.created_at.desc(), EvaluationRun.id.desc()) # type: ignore[union-attr]

        # Set the level of detail requested
        query = set_run_detail_level(query, view)

        run_list: list[EvaluationRun] = session.exec(query.offset(offset).limit(limit if limit > 0 else None)).all() # type: ignore[arg-type]

        return [set_run_response_model(run, view) for run in run_list]

    except (OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError) as e:
        raise RuntimeError(f"Database error: {e}") from e
    except (ValidationError, TypeError) as e:
        raise ValueError(f"Data validation error: {e}") from e
    except Exception as e:
        raise RuntimeError(f"Unexpected error: {e}") from e

def get_by_id(session: Session, run_id: int, view: EvaluationRunView = EvaluationRunView.BASIC) -> EvaluationRunResponseItem:
    """
    Retrieve a single evaluation run by its ID.

    Args:
        session (Session): SQLAlchemy session for database operations.
        run_id (int): The ID of the run.
        view (EvaluationRunView): Level of detail of the run.

    Returns:
        EvaluationRunResponseItem: The run serialized according to the view.

    Raises:
        ResourceNotFoundError: If the run is not found.
        RuntimeError: If a database/unexpected error occurs.
        ValueError: If a data validation error occurs.
    """

    try:
        query: Select = set_run_detail_level(select(EvaluationRun).where(EvaluationRun.id == run_id), view) # type: ignore[arg-type]

        run_db: EvaluationRun | None = session.exec(query).first()
        if not run_db:
            raise ResourceNotFoundError(f"EvaluationRun with ID {run_id} not found")

        return set_run_response_model(run_db, view)
    except ResourceNotFoundError:
        raise
    except (OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError) as e:
        raise RuntimeError(f"Database error: {e}") from e
    except (ValidationError, TypeError) as e:
        raise ValueError(f"Data validation error: {e}") from e
    except Exception as e:
        raise RuntimeError(f"Unexpected error: {e}") from e

def create(session: Session, new_run: EvaluationRunCreate) -> EvaluationRunPublicWithSequences:
    """
    Evaluate a scene from files readable by the server and store the run.

    Args:
        session (Session): SQLAlchemy session for database operations.
        new_run (EvaluationRunCreate): Inputs, mode and overrides.

    Returns:
        EvaluationRunPublicWithSequences: The stored run with its sequence results.

    Raises:
        LifelongEvalError: If the inputs are invalid or unreadable, or the scene cannot be evaluated.
        RuntimeError: If a database or unexpected error occurs.
        ValueError: If a data validation error occurs.
    """

    try:
        document: ReportDocument = scene_service.run_scene(
            new_run.manifest_path,
            new_run.estimate_paths,
            new_run.mode,
            {"epsilon": new_run.epsilon, "phi": new_run.phi, "delta": new_run.delta, "tau": new_run.tau},
            new_run.scale_free,
            new_run.pairs,
        )
    except OSError as e:
        raise InvalidInputError(f"Cannot read evaluation input: {e}") from e

    try:
        # Create the run record with its sequence results
        run: EvaluationRun = EvaluationRun(
            scene_name=document.scene_name,
            mode=document.mode,
            manifest_path=new_run.manifest_path,
            scale_free=new_run.scale_free,
            label=new_run.label,
            scene_cr=document.scene_cr if document.sequences else None,
            scene_ate_rmse=document.scene_ate_rmse,
            report=report_service.report_payload(document, ReportView.FULL),
        )
        run.sequences = [_sequence_result(position, evaluation) for position, evaluation in enumerate(document.sequences)]

        session.add(run)
        session.commit()
        session.refresh(run)
        logger.info("Stored %s run %s of scene %s", run.mode.value, run.id, run.scene_name)
        return EvaluationRunPublicWithSequences.model_validate(run)
    except (OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError) as e:
        session.rollback()
        raise RuntimeError(f"Database error: {e}") from e
    except (ValidationError, TypeError) as e:
        session.rollback()
        raise ValueError(f"Data validation error: {e}") from e
    except LifelongEvalError:
        session.rollback()
        raise
    except Exception as e:
        session.rollback()
        raise RuntimeError(f"Unexpected error: {e}") from e

def update(session: Session, run_id: int, run_in: EvaluationRunUpdate) -> EvaluationRunPublic:
    """
    Update the editable fields of a stored run.

    Raises:
        ResourceNotFoundError: If the run is not found.
        RuntimeError: If a database/unexpected error occurs.
        ValueError: If a data validation error occurs.
    """

    try:
        run_db: EvaluationRun | None = session.get(EvaluationRun, run_id)
        if not run_db:
            raise ResourceNotFoundError(f"EvaluationRun with ID {run_id} not found")

        run_data: dict[str, Any] = run_in.model_dump(exclude_unset=True)
        run_db.sqlmodel_update(run_data)

        session.commit()
        session.refresh(run_db)

        return EvaluationRunPublic.model_validate(run_db)
    except ResourceNotFoundError:
        raise
    except (OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError) as e:
        session.rollback()
        raise RuntimeError(f"Database error: {e}") from e
    except (ValidationError, TypeError) as e:
        session.rollback()
        raise ValueError(f"Data validation error: {e}") from e
    except Exception as e:
        session.rollback()
        raise RuntimeError(f"Unexpected error: {e}") from e

def delete(session: Session, run_id: int) -> None:
    """
    Delete a run and its sequence results.

    Raises:
        ResourceNotFoundError: If the run is not found.
        RuntimeError: If a database/unexpected error occurs.
    """

    try:
        run: EvaluationRun | None = session.get(EvaluationRun, run_id)
        if not run:
            raise ResourceNotFoundError(f"EvaluationRun with ID {run_id} not found")

        session.delete(run)
        session.commit()
    except ResourceNotFoundError:
        raise
    except (OperationalError, StatementError, SQLAlchemyError, TimeoutError, DBAPIError) as e:
        session.rollback()
        raise RuntimeError(f"Database error: {e}") from e
    except Exception as e:
        session.rollback()
        raise RuntimeError(f"Unexpected error: {e}") from e

def _sequence_result(position: int, evaluation: SequenceEvaluation) -> SequenceResult:
    return SequenceResult(
        position=position,
        sequence_id=evaluation.sequence_id,
        t_min=evaluation.t_min,
        t_max=evaluation.t_max,
        estimate_count=evaluation.estimate_count,
        cr=evaluation.robustness.cr,
        cr_t=evaluation.robustness.cr_t,
        cs_r=evaluation.robustness.cs_r,
        cr_unbounded=evaluation.cr_unbounded,
        ate_rmse=evaluation.ate_rmse,
        gated_ate_rmse=evaluation.accuracy.gated_ate_rmse if evaluation.accuracy else None,
        gated_rpe_rmse=evaluation.accuracy.gated_rpe_rmse if evaluation.accuracy else None,
        failure=evaluation.failure,
    )

def set_run_detail_level(query: Select, view: EvaluationRunView) -> Select:
    """
    Add relationship loading options to a query based on the requested detail level.

    Args:
        query (Select): The query to modify.
        view (EvaluationRunView): Desired detail level.

    Returns:
        Select: The query with the loading options applied.
    """
    if view in (EvaluationRunView.WITH_SEQUENCES, EvaluationRunView.FULL):
        return query.options(selectinload(EvaluationRun.sequences)) # type: ignore[arg-type]
    return query

def set_run_response_model(run: EvaluationRun, view: EvaluationRunView) -> EvaluationRunResponseItem:
    """
    Serialize a run into the response model of the requested view.

    Raises:
        ValueError: If an invalid view type is provided.
    """
    match view:
        case EvaluationRunView.BASIC:
            return EvaluationRunPublic.model_validate(run)
        case EvaluationRunView.WITH_SEQUENCES:
            return EvaluationRunPublicWithSequences.model_validate(run)
        case EvaluationRunView.FULL:
            return EvaluationRunFull.model_validate(run)
        case _:
            raise ValueError(f"Invalid view type: {view}")
