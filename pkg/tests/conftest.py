import os
from pathlib import Path

import numpy as np
import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient
from sqlalchemy import Engine
from sqlalchemy.pool import StaticPool
from sqlmodel import SQLModel, create_engine
from typer.testing import CliRunner

import lifelong_eval.models.runs  # noqa: F401  (registers the tables)
from lifelong_eval.custom_types import TrajectoryShape
from lifelong_eval.models.config import PerturbationSpec, TransformPublic
from lifelong_eval.models.geometry import Rotation
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.module import Module
from lifelong_eval.services.tools import synthgen_service
from lifelong_eval.services.tools.synthgen_service import SyntheticScene

GOLDEN_DIR: Path = Path(__file__).parent / "golden"
REGENERATE_GOLDEN_VARIABLE: str = "LIFELONG_EVAL_REGENERATE_GOLDEN"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20190923)

@pytest.fixture
def map_offset() -> TransformPublic:
    """Frame change between ground truth and an algorithm's persistent map."""
    rotation: Rotation = Rotation.from_axis_angle((0.2, -0.1, 1.0), 35.0)
    return TransformPublic(rotation=[rotation.w, rotation.x, rotation.y, rotation.z], translation=[4.0, -2.5, 0.7])

@pytest.fixture
def loop_ground_truth() -> Trajectory:
    return synthgen_service.generate_trajectory(TrajectoryShape.LOOP, 20.0, 10.0, seed=1)

@pytest.fixture
def synthetic_scene(map_offset: TransformPublic) -> SyntheticScene:
    """Three 10 s loop sequences at 10 Hz, estimates in one rotated and offset map frame."""
    return synthgen_service.generate_scene(
        "lab", TrajectoryShape.LOOP, 3, 10.0, 10.0, PerturbationSpec(rigid_offset=map_offset), seed=7, gap=5.0
    )

@pytest.fixture
def scene_dir(tmp_path: Path, synthetic_scene: SyntheticScene) -> Path:
    """The synthetic scene written to disk; holds manifest.yaml, gt/ and est/."""
    synthgen_service.write_scene(synthetic_scene, tmp_path / "scene")
    return tmp_path / "scene"

@pytest.fixture
def engine() -> Engine:
    engine: Engine = create_engine(
        "sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool
    )
    SQLModel.metadata.create_all(engine)
    return engine

@pytest.fixture
def client(engine: Engine) -> TestClient:
    app: FastAPI = FastAPI()
    Module(app, engine).register()
    return TestClient(app)

@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()

@pytest.fixture
def golden():
    """
    Compare text with tests/golden/<name>.

    A missing golden file fails the test. With LIFELONG_EVAL_REGENERATE_GOLDEN=1
    in the environment the file is (re)written instead and the test skipped.
    """
    def _check(name: str, text: str) -> None:
        path: Path = GOLDEN_DIR / name
        if os.environ.get(REGENERATE_GOLDEN_VARIABLE) == "1":
            GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            pytest.skip(f"golden file {name} written")
        if not path.exists():
            pytest.fail(f"golden file {name} is missing; run with {REGENERATE_GOLDEN_VARIABLE}=1 to create it")
        assert text == path.read_text(encoding="utf-8")

    return _check
