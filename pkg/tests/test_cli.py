import pytest

import pdmp_cli
from pdmp_cli import build_parser, collect_overrides, main
from src.services import ResultFiles, load_config_file

FAST = ["replicates=2", "jump_counts=[100, 200]"]


def _rows(path):
    return ResultFiles.read_csv(path)[2]


def test_simulate_writes_trajectory_and_manifest(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--n", "10", "--seed", "5", "-o", str(out)]) == 0
    traj = ResultFiles.read_trajectory(out / "trajectory.csv")
    assert len(traj) == 10
    assert traj.seed == 5
    run = load_config_file(str(out / "manifest.yaml"))
    assert run.config.experiment.seed == 5


def test_simulate_path_output(tmp_path):
    assert main(["simulate", "--n", "5", "--path", "--seed", "1", "-o", str(tmp_path)]) == 0
    comments, header, rows = ResultFiles.read_csv(tmp_path / "path.csv")
    assert header == ["t", "value"]
    assert len(rows) > 5


def test_missing_seed_is_drawn_and_recorded(tmp_path):
    assert main(["simulate", "--n", "3", "-o", str(tmp_path)]) == 0
    text = (tmp_path / "manifest.yaml").read_text(encoding="utf-8")
    run = load_config_file(str(tmp_path / "manifest.yaml"))
    seed = run.config.experiment.seed
    assert seed is not None
    assert f"experiment.seed={seed}" in text
    assert ResultFiles.read_trajectory(tmp_path / "trajectory.csv").seed == seed


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["simulate", "nosuch=1", "--seed", "1"],
        ["simulate", "--set", "kernel=gaussian", "--seed", "1"],
        ["simulate", "--seed", "not-a-number"],
        ["replicate", "--config", "does/not/exist.yaml"],
    ],
)
def test_config_errors_exit_1(argv):
    assert main(argv) == 1


def test_runtime_failure_exits_2(tmp_path):
    assert main(["estimate", "--x", "5", "--seed", "1", "-o", str(tmp_path)]) == 2


def test_estimate(tmp_path):
    assert main(["estimate", "--n", "300", "--seed", "3", "-o", str(tmp_path)]) == 0
    _, header, rows = ResultFiles.read_csv(tmp_path / "estimate.csv")
    assert header == ["x", "y", "q_hat", "p_hat", "h_hat", "n"]
    assert len(rows) == 1
    assert rows[0][:2] == ["1.0", "0.5"]
    assert rows[0][5] == "300"


def test_override_forms_are_applied_in_order():
    args = build_parser().parse_args(
        ["replicate", "beta=0.07", "--set", "bandwidths.alpha=0.2", "--bandwidths.alpha", "0.3", "--seed", "9"]
    )
    assert collect_overrides(args) == [
        "bandwidths.alpha=0.2", "beta=0.07", "bandwidths.alpha=0.3", "experiment.seed=9",
    ]


def test_replicate_is_reproducible(tmp_path):
    first, second, again = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    base = ["replicate", *FAST, "--seed", "4", "--workers", "1"]
    assert main(base + ["-o", str(first)]) == 0
    assert main(base + ["-o", str(second)]) == 0
    for name in ("replicates.csv", "summary.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert len(_rows(first / "replicates.csv")) == 2 * 2 * 2

    assert main(["replicate", "--config", str(first / "manifest.yaml"), "-o", str(again)]) == 0
    assert (again / "replicates.csv").read_bytes() == (first / "replicates.csv").read_bytes()


def test_sweep(tmp_path):
    argv = ["sweep", "replicates=2", "sweep_jumps=150", "sweep_alphas=[0.125, 0.25]", "--seed", "2",
            "--workers", "1", "-o", str(tmp_path)]
    assert main(argv) == 0
    rows = _rows(tmp_path / "replicates.csv")
    assert len(rows) == 2 * 2 * 2
    assert {r[2] for r in rows} == {"150"}


def test_rdump(tmp_path):
    assert main(["rdump", "--y", "1.5", "pi_points=4", "--seed", "1", "-o", str(tmp_path)]) == 0
    comments, header, rows = ResultFiles.read_csv(tmp_path / "r_1.5.csv")
    assert header == ["z", "r"]
    assert len(rows) == 4


def test_handlers_cover_every_command():
    assert set(pdmp_cli.HANDLERS) == set(pdmp_cli.COMMANDS)


def test_simulate_rejects_nonpositive_n(tmp_path):
    assert main(["simulate", "--n", "0", "--seed", "1", "-o", str(tmp_path)]) == 1
    assert not (tmp_path / "trajectory.csv").exists()


@pytest.mark.parametrize(
    "argv, outputs",
    [
        (["simulate", "--n", "12", "--path"], ["trajectory.csv", "path.csv"]),
        (["estimate", "--n", "300"], ["estimate.csv"]),
        (["pi", "jump_counts=[300]", "pi_points=5", "pi_bins=4"], ["pi.csv", "pi_hist.csv"]),
    ],
)
def test_manifest_refeed_reproduces_outputs(tmp_path, argv, outputs):
    first, again = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--seed", "6", "--workers", "1", "-o", str(first)]) == 0
    command_args = [a for a in argv[1:] if "=" not in a]
    assert main([argv[0], *command_args, "--config", str(first / "manifest.yaml"), "-o", str(again)]) == 0
    for name in outputs:
        assert (again / name).read_bytes() == (first / name).read_bytes()
