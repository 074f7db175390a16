import io
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from lifelong_eval.exceptions import InvalidRecordError, TrajectoryOrderError, TrajectoryParseError
from lifelong_eval.models.trajectory import Trajectory
from lifelong_eval.services.files.trajectory_file_service import load_trajectory, parse_trajectory, \
    save_trajectory, serialize_trajectory

SAMPLE: str = """# timestamp tx ty tz qx qy qz qw
1.0 0.0 0.0 0.0 0.0 0.0 0.0 1.0

1.5 1.0 2.0 3.0 0.0 0.0 0.0 2.0
2.0 -1.0 0.5 0.25 0.0 0.0 0.7071067811865476 0.7071067811865476
"""


def test_parse_skips_comments_and_blank_lines():
    trajectory: Trajectory = parse_trajectory(io.StringIO(SAMPLE), "sample.txt")

    assert len(trajectory) == 3
    np.testing.assert_array_equal(trajectory.timestamps, [1.0, 1.5, 2.0])
    np.testing.assert_array_equal(trajectory.positions[1], [1.0, 2.0, 3.0])
    assert trajectory.source_label == "sample.txt"

def test_parse_renormalizes_quaternions():
    trajectory: Trajectory = parse_trajectory(io.StringIO(SAMPLE))
    np.testing.assert_allclose(trajectory.quaternions[1], [0.0, 0.0, 0.0, 1.0])

def test_wrong_field_count_reports_line():
    text: str = "# header\n0.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 1\n"

    with pytest.raises(TrajectoryParseError) as error:
        parse_trajectory(io.StringIO(text), "bad.txt")

    assert error.value.line_number == 3
    assert "bad.txt:3" in str(error.value)

def test_non_numeric_field():
    with pytest.raises(TrajectoryParseError):
        parse_trajectory(io.StringIO("0.0 a 0 0 0 0 0 1\n"))

def test_non_finite_field():
    with pytest.raises(TrajectoryParseError):
        parse_trajectory(io.StringIO("0.0 nan 0 0 0 0 0 1\n"))

def test_repeated_timestamp_is_an_order_error():
    text: str = "0.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 0 1\n"

    with pytest.raises(TrajectoryOrderError) as error:
        parse_trajectory(io.StringIO(text))

    assert error.value.line_number == 3

def test_zero_norm_quaternion():
    with pytest.raises(InvalidRecordError):
        parse_trajectory(io.StringIO("0.0 0 0 0 0 0 0 0\n"))

def test_empty_file_gives_empty_trajectory(caplog):
    trajectory: Trajectory = parse_trajectory(io.StringIO("# only a header\n"), "empty.txt")

    assert trajectory.is_empty
    assert "no records" in caplog.text

def test_serialized_round_trip_is_lossless(rng):
    for _ in range(1000):
        count: int = int(rng.integers(1, 20))
        timestamps: np.ndarray = np.round(1e4 * rng.random() + np.cumsum(rng.uniform(1e-3, 0.2, count)), 6)
        trajectory: Trajectory = Trajectory(
            timestamps,
            rng.normal(scale=100.0, size=(count, 3)),
            ScipyRotation.random(count, random_state=rng).as_quat().reshape(-1, 4),
        )

        parsed: Trajectory = parse_trajectory(io.StringIO(serialize_trajectory(trajectory)))

        np.testing.assert_allclose(parsed.timestamps, trajectory.timestamps, rtol=0.0, atol=1e-9)
        np.testing.assert_allclose(parsed.positions, trajectory.positions, rtol=0.0, atol=1e-9)
        np.testing.assert_allclose(parsed.quaternions, trajectory.quaternions, rtol=0.0, atol=1e-9)

def test_save_and_load(tmp_path: Path, loop_ground_truth: Trajectory):
    path: Path = tmp_path / "nested" / "loop.txt"

    save_trajectory(loop_ground_truth, path)
    loaded: Trajectory = load_trajectory(path)

    assert loaded.source_label == str(path)
    np.testing.assert_allclose(loaded.positions, loop_ground_truth.positions, atol=1e-12)

def test_load_missing_file(tmp_path: Path):
    with pytest.raises(OSError):
        load_trajectory(tmp_path / "missing.txt")
