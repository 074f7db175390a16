from typing import Generator, Any, Callable

from fastapi import APIRouter, HTTPException, Depends, Query
from sqlmodel import Session

from lifelong_eval.custom_types import OrderByType
from lifelong_eval.exceptions import LifelongEvalError, ResourceNotFoundError
from lifelong_eval.models.runs import EvaluationRunCreate, EvaluationRunPublic, EvaluationRunPublicWithSequences, \
    EvaluationRunUpdate
from lifelong_eval.responses.run_responses import EvaluationRunResponse, EvaluationRunResponseItem
from lifelong_eval.services.runs import evaluation_run_service
from lifelong_eval.views.run_views import EvaluationRunView


def get_router(get_session: Callable[[], Generator[Session, Any, None]]) -> APIRouter:

    router: APIRouter = APIRouter(
        prefix="/runs",
        tags=["Evaluation Runs"]
    )

    @router.get("/", response_model=EvaluationRunResponse, status_code=200)
    def get_all_runs(
            session: Session = Depends(get_session),
            offset: int = Query(0, ge=0),
            limit: int = Query(100, ge=1),
            order_by: OrderByType = OrderByType.DESC,
            scene_name: str | None = None,
            view: EvaluationRunView = EvaluationRunView.BASIC
    ) -> EvaluationRunResponse:
        """
        Retrieve stored evaluation runs with optional filtering and pagination.

        Args:
            session (Session): Database session dependency.
            offset (int): Number of items to skip for pagination (default 0).
            limit (int): Maximum number of items to return (default 100).
            order_by (OrderByType): Creation order, newest first by default.
            scene_name (str | None): Only runs of this scene.
            view (EvaluationRunView): Which related data to include (basic, with sequences, full).

        Returns:
            EvaluationRunResponse: Runs formatted according to the requested view.

        Raises:
            HTTPException: 500 if an unexpected error occurs during retrieval.
        """
        try:
            return evaluation_run_service.get_all(session, offset, limit, order_by, scene_name, view)
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error fetching evaluation runs: {e}"))

    @router.get("/{run_id}", response_model=EvaluationRunResponseItem, status_code=200)
    def get_run_by_id(
            run_id: int,
            session: Session = Depends(get_session),
            view: EvaluationRunView = EvaluationRunView.BASIC
    ) -> EvaluationRunResponseItem:
        """
        Retrieve a single evaluation run by its ID.

        Raises:
            HTTPException: 404 if the run is not found.
            HTTPException: 500 for unexpected errors during retrieval.
        """
        try:
            return evaluation_run_service.get_by_id(session, run_id, view)
        except ResourceNotFoundError as e:
            raise HTTPException(status_code=404, detail=(f"Resource not found: {e}"))
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error fetching evaluation run with ID {run_id}: {e}"))

    @router.post("/", response_model=EvaluationRunPublicWithSequences, status_code=201)
    def create_run(new_run: EvaluationRunCreate, session: Session = Depends(get_session)) -> EvaluationRunPublicWithSequences:
        """
        Evaluate a scene from server-side files and store the run.

        Args:
            new_run (EvaluationRunCreate): Manifest, estimates, mode and overrides.
            session (Session): Database session dependency.

        Returns:
            EvaluationRunPublicWithSequences: The stored run and its sequence results.

        Raises:
            HTTPException: 422 if the inputs are invalid, unreadable or cannot be evaluated.
            HTTPException: 500 if there is an error storing the run.
        """
        try:
            return evaluation_run_service.create(session, new_run)
        except LifelongEvalError as e:
            raise HTTPException(status_code=422, detail=(f"Evaluation failed: {e}"))
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error creating evaluation run: {e}"))

    @router.put("/{run_id}", response_model=EvaluationRunPublic, status_code=200)
    def update_run(run_id: int, run_in: EvaluationRunUpdate, session: Session = Depends(get_session)) -> EvaluationRunPublic:
        """
        Update the label of a stored run.

        Raises:
            HTTPException: 404 if the run is not found.
            HTTPException: 500 if there is an error updating the run.
        """
        try:
            return evaluation_run_service.update(session, run_id, run_in)
        except ResourceNotFoundError as e:
            raise HTTPException(status_code=404, detail=(f"Resource not found: {e}"))
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error updating evaluation run with ID {run_id}: {e}"))

    @router.delete("/{run_id}", status_code=204)
    def delete_run(run_id: int, session: Session = Depends(get_session)) -> None:
        """
        Delete a run and its sequence results.

        Raises:
            HTTPException: 404 if the run is not found.
            HTTPException: 500 if there is an error deleting the run.
        """
        try:
            evaluation_run_service.delete(session, run_id)
        except ResourceNotFoundError as e:
            raise HTTPException(status_code=404, detail=(f"Resource not found: {e}"))
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error deleting evaluation run with ID {run_id}: {e}"))

    return router
