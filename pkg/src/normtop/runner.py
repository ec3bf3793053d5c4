"""Optimization driver, run configuration and output files."""
from __future__ import annotations

import csv
import dataclasses
import enum
import logging
import math
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .fem import (GridMesh, assemble_global, build_element_stiffness,
                  solve_displacements)
from .filter_update import OcParams, change_metric, filter_sensitivities, oc_update
from .objectives import ObjectiveKind, evaluate
from .problems import ProblemDefinition, make_problem
from .spectral import decompose_and_truncate, stiffness_root

log = logging.getLogger(__name__)

LOG_HEADER = ("iter", "objective", "volume", "change", "ms")


class RunStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    ERROR = "error"


@dataclass
class RunConfig:
    problem: str | ProblemDefinition = "mbb-half"
    objective: ObjectiveKind = ObjectiveKind.QUADRATIC
    nelx: int | None = None
    nely: int | None = None
    volfrac: float | None = None
    penal: float = 3.0
    rmin: float | None = None
    move: float = 0.2
    eta: float = 0.5
    epsilon: float | None = None
    threshold: float = 0.01
    max_iterations: int = 300
    out: Path | None = None
    snapshot_every: int = 0
    timing: bool = True
    seed: int = 0

    def __post_init__(self):
        self.objective = ObjectiveKind(self.objective)
        if self.out is not None:
            self.out = Path(self.out)
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    def build_problem(self) -> ProblemDefinition:
        if isinstance(self.problem, ProblemDefinition):
            problem = self.problem
            changes = {}
            if self.volfrac is not None:
                changes["volfrac"] = self.volfrac
            problem = dataclasses.replace(problem, **changes)
        else:
            problem = make_problem(self.problem, self.nelx, self.nely, volfrac=self.volfrac,
                                   rmin=self.rmin)
        if problem.material.penal != self.penal:
            problem = dataclasses.replace(
                problem, material=dataclasses.replace(problem.material, penal=self.penal))
        return problem


@dataclass(frozen=True)
class IterationRecord:
    loop: int
    objective: float
    volume: float
    change: float
    ms: float


@dataclass
class RunResult:
    design: np.ndarray
    history: list[IterationRecord]
    status: RunStatus
    problem: ProblemDefinition
    error: str | None = None


def run(config: RunConfig,
        callback: Callable[[IterationRecord, np.ndarray, np.ndarray], None] | None = None,
        ) -> RunResult:
    """Run the density loop until ``change <= threshold`` or the iteration cap.

    ``callback(record, x_new, x_old)`` is invoked after every design update.
    Solver or bisection failures end the run with ``RunStatus.ERROR`` and the
    history gathered so far.
    """
    problem = config.build_problem()
    mesh, material = problem.mesh, problem.material
    ke = build_element_stiffness(material)
    dec = decompose_and_truncate(ke, config.epsilon)
    root = stiffness_root(dec)
    oc = OcParams(move=config.move, eta=config.eta)
    forces = np.column_stack([lc.vector(mesh) for lc in problem.load_cases])

    x = np.full(mesh.n_elements, problem.volfrac)
    history: list[IterationRecord] = []
    status = RunStatus.MAX_ITERATIONS
    error = None
    if config.out is not None:
        config.out.mkdir(parents=True, exist_ok=True)

    for loop in range(1, config.max_iterations + 1):
        start = time.perf_counter()
        x_old = x
        try:
            k = assemble_global(x_old, material, ke, mesh)
            u = solve_displacements(k, forces, problem.supports, mesh)
            obj = evaluate(config.objective, x_old, u, ke, root, material, mesh)
            dc = filter_sensitivities(x_old, obj.dc, problem.filter, mesh)
            x = oc_update(x_old, dc, problem.volfrac, oc, material.x_min)
        except (RuntimeError, ArithmeticError, ValueError) as exc:
            log.error("iteration %d failed: %s", loop, exc)
            status, error = RunStatus.ERROR, str(exc)
            x = x_old
            break
        change = change_metric(x, x_old)
        elapsed = (time.perf_counter() - start) * 1e3 if config.timing else 0.0
        record = IterationRecord(loop, obj.total, float(x.mean()), change, elapsed)
        history.append(record)
        log.info("it %3d  obj %.6e  vol %.4f  change %.4f", loop, obj.total, record.volume,
                 change)
        if callback is not None:
            callback(record, x, x_old)
        if config.out is not None and config.snapshot_every and loop % config.snapshot_every == 0:
            export_density(x, mesh, config.out / f"density_{loop:04d}")
        if change <= config.threshold:
            status = RunStatus.CONVERGED
            break

    result = RunResult(x, history, status, problem, error)
    if config.out is not None:
        write_outputs(result, config)
    return result


def design_image(design: np.ndarray, mesh: GridMesh) -> np.ndarray:
    """``(nely, nelx)`` picture of the design, row 0 at the top."""
    return np.asarray(design, dtype=float).reshape((mesh.nely, mesh.nelx), order="F")


def export_density(design: np.ndarray, mesh: GridMesh, path) -> tuple[Path, Path]:
    """Write ``<path>.txt`` (fixed-point matrix) and ``<path>.pgm`` (8-bit, black = solid).

    A ``.txt`` or ``.pgm`` suffix on ``path`` is replaced.
    """
    base = Path(path)
    if base.suffix in (".txt", ".pgm"):
        base = base.with_suffix("")
    img = design_image(design, mesh)
    txt = base.with_suffix(".txt")
    pgm = base.with_suffix(".pgm")
    np.savetxt(txt, img, fmt="%.6f", delimiter=" ")
    gray = np.rint(255.0 * (1.0 - np.clip(img, 0.0, 1.0))).astype(np.uint8)
    with open(pgm, "wb") as fh:
        fh.write(f"P5\n{mesh.nelx} {mesh.nely}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())
    return txt, pgm


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit PGM as written by :func:`export_density`."""
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError("not a binary PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    pixels = data[m.end():m.end() + width * height]
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)


def export_log(history: list[IterationRecord], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for r in history:
            writer.writerow([int(r.loop), *(repr(float(v)) for v in
                                            (r.objective, r.volume, r.change, r.ms))])
    return path


def read_log(path) -> list[IterationRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LOG_HEADER:
            raise ValueError(f"unexpected log header {header}")
        return [IterationRecord(int(row[0]), *(float(v) for v in row[1:])) for row in reader]


def sparsity_metrics(design: np.ndarray) -> dict[str, float]:
    """Gray share (0.1 < x < 0.9), solid share (x >= 0.9) and discreteness 4/N sum x(1-x)."""
    x = np.asarray(design, dtype=float).ravel()
    return {
        "gray_fraction": float(np.mean((x > 0.1) & (x < 0.9))),
        "solid_fraction": float(np.mean(x >= 0.9)),
        "discreteness": float(4.0 * np.mean(x * (1.0 - x))),
    }


# ---------------------------------------------------------------------------
# Flat key = value configuration files

_CONFIG_KEYS = {
    "problem": str, "objective": str, "nelx": int, "nely": int, "volfrac": float,
    "penal": float, "rmin": float, "move": float, "eta": float, "epsilon": float,
    "threshold": float, "max_iterations": int, "out": Path, "snapshot_every": int,
    "timing": lambda s: s.strip().lower() in ("1", "true", "yes", "on"), "seed": int,
}
_ALIASES = {"max-iters": "max_iterations", "max_iters": "max_iterations",
            "snapshot-every": "snapshot_every"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``none`` clears a value."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = None if value.lower() == "none" else _CONFIG_KEYS[key](value)
    return values


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def format_config(config: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, ProblemDefinition):
            value = value.name
        elif isinstance(value, enum.Enum):
            value = value.value
        elif isinstance(value, float) and math.isinf(value):
            value = "inf"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def write_outputs(result: RunResult, config: RunConfig) -> None:
    out = config.out
    export_density(result.design, result.problem.mesh, out / "density")
    export_log(result.history, out / "log.csv")
    (out / "config.echo").write_text(format_config(config))


def exit_code(status: RunStatus) -> int:
    return {RunStatus.CONVERGED: 0, RunStatus.MAX_ITERATIONS: 2, RunStatus.ERROR: 1}[status]


def compare(config: RunConfig) -> list[dict]:
    """Run every objective kind on one problem and tabulate the outcome.

    Each row carries the run's own objective, the classical compliance of the
    final design (a common yardstick), iteration count and sparsity metrics.
    When ``config.out`` is set each run writes into ``out/<objective>/`` and
    the table goes to ``out/metrics.csv``.
    """
    rows = []
    for kind in ObjectiveKind:
        sub = dataclasses.replace(config, objective=kind,
                                  out=None if config.out is None else config.out / kind.value)
        result = run(sub)
        problem = result.problem
        ke = build_element_stiffness(problem.material)
        forces = np.column_stack([lc.vector(problem.mesh) for lc in problem.load_cases])
        k = assemble_global(result.design, problem.material, ke, problem.mesh)
        u = solve_displacements(k, forces, problem.supports, problem.mesh)
        compliance = float(np.einsum("ic,ic->", u, k @ u))
        rows.append({
            "objective": kind.value,
            "status": result.status.value,
            "iterations": len(result.history),
            "final_objective": result.history[-1].objective if result.history else float("nan"),
            "compliance": compliance,
            "volume": float(result.design.mean()),
            **sparsity_metrics(result.design),
        })
    if config.out is not None:
        export_table(rows, config.out / "metrics.csv")
    return rows


def export_table(rows: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path
