from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from lifelong_eval.custom_types import TrajectoryShape
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.files.trajectory_file_service import save_trajectory
from lifelong_eval.services.tools import synthgen_service

RUNS: str = "/lifelong_eval/api/v1/evaluation/runs/"
SYNC: str = "/lifelong_eval/api/v1/evaluation/sync/"


@pytest.fixture
def created_run(client: TestClient, scene_dir: Path) -> dict:
    response = client.post(RUNS, json={
        "manifest_path": str(scene_dir / "manifest.yaml"),
        "estimate_paths": [str(scene_dir / "est")],
        "mode": "lifelong",
        "label": "baseline",
    })
    assert response.status_code == 201, response.text
    return response.json()


class TestEvaluationRuns:

    def test_create(self, created_run: dict):
        assert created_run["id"] is not None
        assert created_run["mode"] == "lifelong"
        assert created_run["scene_name"] == "lab"
        assert [s["sequence_id"] for s in created_run["sequences"]] == ["lab-1", "lab-2", "lab-3"]
        assert created_run["scene_cr"] == pytest.approx(1.0)

    def test_list_and_filter(self, client: TestClient, created_run: dict):
        listed = client.get(RUNS)
        other_scene = client.get(RUNS, params={"scene_name": "office"})

        assert listed.status_code == 200
        assert [run["id"] for run in listed.json()] == [created_run["id"]]
        assert "sequences" not in listed.json()[0]
        assert other_scene.json() == []

    def test_full_view_carries_the_report(self, client: TestClient, created_run: dict):
        response = client.get(f"{RUNS}{created_run['id']}", params={"view": "full"})

        assert response.status_code == 200
        body: dict = response.json()
        assert len(body["sequences"]) == 3
        assert [s["sequence_id"] for s in body["report"]["sequences"]] == ["lab-1", "lab-2", "lab-3"]
        assert body["report"]["mode"] == "lifelong"

    def test_update_label(self, client: TestClient, created_run: dict):
        response = client.put(f"{RUNS}{created_run['id']}", json={"label": "rerun"})

        assert response.status_code == 200
        assert response.json()["label"] == "rerun"
        assert response.json()["scene_name"] == "lab"

    def test_delete(self, client: TestClient, created_run: dict):
        assert client.delete(f"{RUNS}{created_run['id']}").status_code == 204
        assert client.get(f"{RUNS}{created_run['id']}").status_code == 404
        assert client.delete(f"{RUNS}{created_run['id']}").status_code == 404

    def test_unknown_run(self, client: TestClient):
        assert client.get(f"{RUNS}999").status_code == 404
        assert client.put(f"{RUNS}999", json={"label": "x"}).status_code == 404

    def test_missing_manifest_is_unprocessable(self, client: TestClient, tmp_path: Path):
        response = client.post(RUNS, json={
            "manifest_path": str(tmp_path / "missing.yaml"),
            "estimate_paths": [str(tmp_path)],
        })

        assert response.status_code == 422
        assert "missing.yaml" in response.json()["detail"]

    def test_invalid_override_is_unprocessable(self, client: TestClient, scene_dir: Path):
        response = client.post(RUNS, json={
            "manifest_path": str(scene_dir / "manifest.yaml"),
            "estimate_paths": [str(scene_dir / "est")],
            "epsilon": -1.0,
        })

        assert response.status_code == 422

    def test_empty_estimate_list_is_rejected(self, client: TestClient, scene_dir: Path):
        response = client.post(RUNS, json={"manifest_path": str(scene_dir / "manifest.yaml"), "estimate_paths": []})
        assert response.status_code == 422


class TestSync:

    def test_estimate_offset(self, client: TestClient, tmp_path: Path):
        reference: Trajectory = synthgen_service.generate_trajectory(TrajectoryShape.BACK_AND_FORTH, 10.0, 100.0, seed=3)
        save_trajectory(reference, tmp_path / "reference.txt")
        save_trajectory(reference.shifted(-0.04), tmp_path / "target.txt")

        response = client.post(SYNC, json={
            "reference_path": str(tmp_path / "reference.txt"),
            "target_path": str(tmp_path / "target.txt"),
        })

        assert response.status_code == 200, response.text
        assert response.json()["offset"] == pytest.approx(-0.04, abs=5e-4)
        assert response.json()["degenerate"] is False

    def test_unreadable_file(self, client: TestClient, tmp_path: Path):
        response = client.post(SYNC, json={
            "reference_path": str(tmp_path / "a.txt"),
            "target_path": str(tmp_path / "b.txt"),
        })
        assert response.status_code == 422

    def test_rejects_non_positive_window(self, client: TestClient, tmp_path: Path):
        response = client.post(SYNC, json={"reference_path": "a.txt", "target_path": "b.txt", "window": 0.0})
        assert response.status_code == 422
