import os

import pytest

from src.core import build_cell_model, simulate
from src.errors import FileFormatError
from src.models import CurvePoint, CurveStudyResult, ReplicateRow, ReplicateTable
from src.services import ResultFiles, parse_config
from src.services.files import MANIFEST_NAME, REPLICATE_COLUMNS, format_value, tag
from src.reference.quadrature import QuadratureSpec


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "1"
    assert format_value(False) == "0"
    assert format_value(3) == "3"
    assert format_value(0.1) == "0.1"
    assert format_value(1 / 3) == repr(1 / 3)
    assert float(format_value(1 / 3)) == 1 / 3
    assert tag(1.0) == "1"
    assert tag(0.25) == "0.25"


def test_trajectory_round_trip(tmp_path):
    traj = simulate(build_cell_model(), (1.0,), 25, seed=3, stream=2)
    path = ResultFiles.write_trajectory(tmp_path / "trajectory.csv", traj)
    text = path.read_text(encoding="utf-8")
    assert text.startswith("# seed=3\n# stream=2\n# x0=1.0\nn,T,S,Z_minus,Z,forced\n")
    assert "\r" not in text
    assert ResultFiles.read_trajectory(path) == traj


def test_read_trajectory_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("n,T,S,Z_minus,Z,forced\n1,0.5,0.5,1.2,0.6,0\n", encoding="utf-8")
    with pytest.raises(FileFormatError):
        ResultFiles.read_trajectory(path)

    path.write_text("# seed=1\n# x0=1.0\nn,T,S,Z_minus,Z,forced\n1,0.5,abc,1.2,0.6,0\n", encoding="utf-8")
    with pytest.raises(FileFormatError):
        ResultFiles.read_trajectory(path)

    path.write_text("# seed=1\n# x0=1.0\nn,T,S,Z\n", encoding="utf-8")
    with pytest.raises(FileFormatError):
        ResultFiles.read_trajectory(path)

    header = "# seed=1\n# x0=1.0\nn,T,S,Z_minus,Z,forced\n"
    path.write_text(header + "1,0.5,0.5,1.2,0.6,0\n2,0.9,0.5,1.1,0.55,0\n", encoding="utf-8")
    with pytest.raises(FileFormatError, match="interjump"):
        ResultFiles.read_trajectory(path)
    path.write_text(header + "1,0.5,0.5,1.2,0.6,0\n2,1.0,0.5,1.1,0.55,0\n", encoding="utf-8")
    assert ResultFiles.read_trajectory(path).records[1].time == 1.0


def test_atomic_write_leaves_nothing_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.csv"

    def fail(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        ResultFiles.atomic_write(target, "a,b\n")
    assert list(tmp_path.iterdir()) == []


def test_atomic_write_replaces_existing(tmp_path):
    target = tmp_path / "nested" / "out.csv"
    ResultFiles.atomic_write(target, "old\n")
    ResultFiles.atomic_write(target, "new\n")
    assert target.read_text(encoding="utf-8") == "new\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.csv"]


def test_replicates_csv(tmp_path):
    rows = [
        ReplicateRow(replicate=0, stream=0, n=10, x=1.0, y=0.5, alpha=0.125, beta=0.1,
                     q_hat=5.5, p_hat=0.4, h_hat=2.2, q_true=5.8, rel_error=0.05),
        ReplicateRow(replicate=1, stream=1, n=10, x=1.0, y=0.5, alpha=0.125, beta=0.1,
                     q_true=5.8, status="failed", error="denominator sum is 0"),
    ]
    path = ResultFiles.write_replicates(tmp_path / "replicates.csv", ReplicateTable(rows=rows))
    comments, header, body = ResultFiles.read_csv(path)
    assert comments == []
    assert header == REPLICATE_COLUMNS
    assert body[0][7] == "5.5"
    assert body[1][7] == ""
    assert body[1][-2:] == ["failed", "denominator sum is 0"]


def test_curve_files(tmp_path):
    points = [
        CurvePoint(n=n, y=y, q_hat=q, q_true=1.0)
        for n in (10, 20) for y, q in ((0.4, 0.9), (0.5, None))
    ]
    result = CurveStudyResult(x=1.0, grid=[0.4, 0.5], points=points)
    paths = ResultFiles.write_curves(tmp_path, result)
    assert [p.name for p in paths] == ["curve_1.csv", "curves_1.csv"]
    comments, header, body = ResultFiles.read_csv(paths[0])
    assert comments == ["x=1.0 n=20"]
    assert header == ["y", "q_hat"]
    assert body == [["0.4", "0.9"], ["0.5", ""]]
    _, _, long_rows = ResultFiles.read_csv(paths[1])
    assert len(long_rows) == 4


def test_r_dump_header(tmp_path):
    path = ResultFiles.write_r_dump(tmp_path / "r_1.csv", build_cell_model(), 1.0, [0.5, 1.0, 2.0], QuadratureSpec())
    comments, header, body = ResultFiles.read_csv(path)
    assert comments[0].startswith("y=1.0 H=40.0 tail_bound=")
    assert header == ["z", "r"]
    assert len(body) == 3
    assert all(float(r) >= 0.0 for _, r in body)


def test_manifest_parses_back(tmp_path):
    run = parse_config("", ["seed=99", "alpha=0.25"], command="replicate")
    path = ResultFiles.write_manifest(tmp_path, run)
    assert path.name == MANIFEST_NAME
    text = path.read_text(encoding="utf-8")
    assert "# command: replicate" in text
    assert "# overrides: seed=99 alpha=0.25" in text
    assert parse_config(text).config == run.config
