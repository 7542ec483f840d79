"""CSV and manifest emission.

Every file is written to a temporary sibling and renamed into place, so an
error never leaves a partially written output. Floats use the shortest
decimal that round-trips (`repr`), rows end with LF.
"""

import os
import io
import csv
import logging
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src import __version__
from src.core.components import PdmpModel
from src.errors import FileFormatError
from src.estimators.recursive import EstimateRow
from src.models.config import RunConfig
from src.models.records import JumpRecord, Trajectory
from src.models.results import CltResult, CurveStudyResult, PiStudyResult, ReplicateTable, SummaryRow
from src.reference.densities import r_curve
from src.reference.quadrature import QuadratureSpec
from src.services.config_loader import dump_config

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"

REPLICATE_COLUMNS = [
    "replicate", "stream", "n", "x", "y", "alpha", "beta",
    "q_hat", "p_hat", "h_hat", "q_true", "rel_error", "status", "error",
]
SUMMARY_COLUMNS = [
    "x", "y", "n", "alpha", "beta", "successes", "failures",
    "median", "q1", "q3", "iqr", "whisker_low", "whisker_high", "median_rel_error",
]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def tag(value: float) -> str:
    """Short file-name tag for a coordinate: 1.0 -> '1', 0.25 -> '0.25'."""
    return f"{float(value):g}"


class ResultFiles:
    """Writers and readers for every on-disk format of the toolkit."""

    # ========================================================================
    # Plumbing
    # ========================================================================

    @staticmethod
    def atomic_write(path: Path, text: str) -> Path:
        """Write text to path through a temporary file and an atomic rename."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def csv_text(columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
        buffer = io.StringIO()
        for line in comments:
            buffer.write(f"# {line}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()

    @staticmethod
    def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> Path:
        return ResultFiles.atomic_write(path, ResultFiles.csv_text(columns, rows, comments))

    @staticmethod
    def read_csv(path: Path):
        """(comment lines without '# ', header, rows) of a CSV written by this module."""
        comments: List[str] = []
        body: List[str] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.startswith("#") and not body:
                comments.append(line[1:].strip())
            else:
                body.append(line)
        if not body:
            raise FileFormatError(f"{path}: missing header row")
        reader = csv.reader(body)
        header = next(reader)
        return comments, header, [row for row in reader if row]

    # ========================================================================
    # Trajectories
    # ========================================================================

    @staticmethod
    def trajectory_columns(d: int) -> List[str]:
        if d == 1:
            return ["n", "T", "S", "Z_minus", "Z", "forced"]
        return (
            ["n", "T", "S"]
            + [f"Z_minus_{i}" for i in range(1, d + 1)]
            + [f"Z_{i}" for i in range(1, d + 1)]
            + ["forced"]
        )

    @staticmethod
    def write_trajectory(path: Path, traj: Trajectory) -> Path:
        """`n,T,S,Z_minus,Z,forced` with `# seed=`, `# stream=` and `# x0=` lines."""
        rows = (
            [r.index, r.time, r.interjump, *r.pre_jump, *r.post_jump, r.forced]
            for r in traj.records
        )
        comments = [
            f"seed={traj.seed}",
            f"stream={traj.stream}",
            "x0=" + " ".join(format_value(v) for v in traj.x0),
        ]
        return ResultFiles.write_csv(path, ResultFiles.trajectory_columns(traj.dimension), rows, comments)

    @staticmethod
    def read_trajectory(path: Path) -> Trajectory:
        """Inverse of write_trajectory.

        Raises:
            FileFormatError: if the header, metadata or any row is malformed.
        """
        comments, header, rows = ResultFiles.read_csv(path)
        meta: Dict[str, str] = {}
        for line in comments:
            key, sep, value = line.partition("=")
            if sep:
                meta[key.strip()] = value.strip()
        if "seed" not in meta or "x0" not in meta:
            raise FileFormatError(f"{path}: missing '# seed=' or '# x0=' line")

        try:
            x0 = tuple(float(v) for v in meta["x0"].split())
            d = len(x0)
            if header != ResultFiles.trajectory_columns(d):
                raise FileFormatError(f"{path}: unexpected header {header}")
            records = [
                JumpRecord(
                    index=int(row[0]),
                    time=float(row[1]),
                    interjump=float(row[2]),
                    pre_jump=tuple(float(v) for v in row[3:3 + d]),
                    post_jump=tuple(float(v) for v in row[3 + d:3 + 2 * d]),
                    forced=row[3 + 2 * d] == "1",
                )
                for row in rows
            ]
            return Trajectory(x0=x0, seed=int(meta["seed"]), stream=int(meta.get("stream", 0)), records=records)
        except FileFormatError:
            raise
        except (ValueError, IndexError) as exc:
            raise FileFormatError(f"{path}: {exc}") from exc

    @staticmethod
    def write_path(path: Path, times: np.ndarray, values: np.ndarray) -> Path:
        """Plot-ready continuous-time path: `t,value` (or `t,value_1..d`)."""
        d = values.shape[1]
        columns = ["t", "value"] if d == 1 else ["t"] + [f"value_{i}" for i in range(1, d + 1)]
        return ResultFiles.write_csv(path, columns, ([t, *v] for t, v in zip(times.tolist(), values.tolist())))

    # ========================================================================
    # Estimates and experiment tables
    # ========================================================================

    @staticmethod
    def write_estimates(path: Path, rows: Sequence[EstimateRow]) -> Path:
        """`x,y,q_hat,p_hat,h_hat,n`, one line per registered pair (1-d coordinates)."""
        return ResultFiles.write_csv(
            path,
            ["x", "y", "q_hat", "p_hat", "h_hat", "n"],
            ([" ".join(format_value(v) for v in r.x), " ".join(format_value(v) for v in r.y),
              r.q_hat, r.p_hat, r.h_hat, r.n] for r in rows),
        )

    @staticmethod
    def write_replicates(path: Path, table: ReplicateTable) -> Path:
        return ResultFiles.write_csv(
            path,
            REPLICATE_COLUMNS,
            ([getattr(r, c) for c in REPLICATE_COLUMNS] for r in table.rows),
        )

    @staticmethod
    def write_summary(path: Path, rows: Sequence[SummaryRow]) -> Path:
        return ResultFiles.write_csv(path, SUMMARY_COLUMNS, ([getattr(r, c) for c in SUMMARY_COLUMNS] for r in rows))

    @staticmethod
    def write_clt(path: Path, result: CltResult) -> Path:
        comments = [
            f"x={format_value(result.x)} y={format_value(result.y)} n={result.n}",
            f"alpha={format_value(result.alpha)} beta={format_value(result.beta)}",
            f"q_true={format_value(result.q_true)} p_estimate={format_value(result.p_estimate)} "
            f"variance={format_value(result.variance)}",
            f"ks_statistic={format_value(result.ks_statistic)} ks_pvalue={format_value(result.ks_pvalue)} "
            f"sample_variance={format_value(result.sample_variance)} failures={result.failures}",
        ]
        return ResultFiles.write_csv(
            path,
            ["replicate", "q_hat", "standardized", "status", "error"],
            ([r.replicate, r.q_hat, r.standardized, r.status, r.error] for r in result.rows),
            comments,
        )

    @staticmethod
    def write_pi(directory: Path, result: PiStudyResult) -> List[Path]:
        """`pi.csv` (x,p_hat over the grid) and `pi_hist.csv` (bins with p_hat at their centers)."""
        directory = Path(directory)
        comments = [
            f"n={result.n} atom_frequency={format_value(result.atom_frequency)} "
            f"sup_distance={format_value(result.sup_distance)}",
        ]
        pi_path = ResultFiles.write_csv(
            directory / "pi.csv", ["x", "p_hat"], zip(result.grid, result.p_hat), comments
        )
        edges = result.bin_edges
        hist_path = ResultFiles.write_csv(
            directory / "pi_hist.csv",
            ["bin_lower", "bin_upper", "hist_density", "p_hat"],
            zip(edges[:-1], edges[1:], result.hist_density, result.p_hat_centers),
            comments,
        )
        return [pi_path, hist_path]

    @staticmethod
    def write_curves(directory: Path, result: CurveStudyResult) -> List[Path]:
        """`curve_<x>.csv` at the largest n and the long-form `curves_<x>.csv` over every n."""
        directory = Path(directory)
        n_last = max(p.n for p in result.points)
        curve_path = ResultFiles.write_csv(
            directory / f"curve_{tag(result.x)}.csv",
            ["y", "q_hat"],
            ([p.y, p.q_hat] for p in result.at(n_last)),
            [f"x={format_value(result.x)} n={n_last}"],
        )
        long_path = ResultFiles.write_csv(
            directory / f"curves_{tag(result.x)}.csv",
            ["n", "y", "q_hat", "q_true"],
            ([p.n, p.y, p.q_hat, p.q_true] for p in result.points),
            [f"x={format_value(result.x)}"],
        )
        return [curve_path, long_path]

    @staticmethod
    def write_r_dump(
        path: Path,
        model: PdmpModel,
        y: float,
        grid: Sequence[float],
        quad: Optional[QuadratureSpec] = None,
    ) -> Path:
        """Oracle dump `z,r` of r(y, .) with `# y= H= tail_bound=` (largest tail over the grid)."""
        quad = quad or QuadratureSpec()
        results = r_curve(model, (y,), [(z,) for z in grid], quad)
        tail = max((r.tail_bound for r in results), default=0.0)
        return ResultFiles.write_csv(
            path,
            ["z", "r"],
            ([z, r.value] for z, r in zip(grid, results)),
            [f"y={format_value(float(y))} H={format_value(quad.horizon)} tail_bound={format_value(tail)}"],
        )

    # ========================================================================
    # Manifest
    # ========================================================================

    @staticmethod
    def write_manifest(directory: Path, run: RunConfig) -> Path:
        """Full config (seed included) as a YAML document that can be fed back with --config."""
        header = [
            f"# pdmp-toolkit {__version__}",
            f"# command: {run.command}",
        ]
        if run.source:
            header.append(f"# source: {run.source}")
        if run.overrides:
            header.append(f"# overrides: {' '.join(run.overrides)}")
        text = "\n".join(header) + "\n" + dump_config(run.config)
        return ResultFiles.atomic_write(Path(directory) / MANIFEST_NAME, text)
