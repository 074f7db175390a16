from typing import Callable, Generator, Any

from fastapi import APIRouter
from sqlmodel import Session

from .evaluation_run_controller import get_router as evaluation_run_router
from .sync_controller import get_router as sync_router


def get_router(get_session: Callable[[], Generator[Session, Any, None]]) -> APIRouter:
    router: APIRouter = APIRouter(
        prefix="/evaluation",
    )

    router.include_router(evaluation_run_router(get_session))
    router.include_router(sync_router())

    return router
