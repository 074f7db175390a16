from fastapi import APIRouter, HTTPException

from lifelong_eval.constants import SYNC_COARSE_STEP, SYNC_RESOLUTION, SYNC_WINDOW
from lifelong_eval.exceptions import LifelongEvalError
from lifelong_eval.models.evaluation import OffsetEstimate
from lifelong_eval.models.runs import SyncRequest
from lifelong_eval.services.files.trajectory_file_service import load_trajectory
from lifelong_eval.services.tools import sync_service


def get_router() -> APIRouter:

    router: APIRouter = APIRouter(
        prefix="/sync",
        tags=["Time Synchronization"]
    )

    @router.post("/", response_model=OffsetEstimate, status_code=200)
    def estimate_offset(request: SyncRequest) -> OffsetEstimate:
        """
        Estimate the clock offset of the target trajectory relative to the reference.

        Nothing is stored.

        Args:
            request (SyncRequest): Trajectory paths and search parameters.

        Returns:
            OffsetEstimate: Offset to subtract from the target's timestamps.

        Raises:
            HTTPException: 422 if a file is unreadable or malformed, or no offset overlaps.
            HTTPException: 500 for unexpected errors.
        """
        try:
            return sync_service.estimate_offset(
                load_trajectory(request.reference_path),
                load_trajectory(request.target_path),
                request.window or SYNC_WINDOW,
                request.coarse_step or SYNC_COARSE_STEP,
                request.resolution or SYNC_RESOLUTION,
            )
        except (LifelongEvalError, OSError) as e:
            raise HTTPException(status_code=422, detail=(f"Offset estimation failed: {e}"))
        except Exception as e:
            raise HTTPException(status_code=500, detail=(f"Error estimating offset: {e}"))

    return router
