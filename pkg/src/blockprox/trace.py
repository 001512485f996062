"""Per-iteration trace records and the normalized-error metric."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields
from typing import Callable

from .core import BlockVector, KTPoint, kt_residual, objective_value
from .exceptions import UndefinedMetric
from .schedule import EpochCounter

ERROR_FLOOR_DB = -320.0

CSV_HEADER = "iteration,epochs,error_db,objective,kt_residual,activated_primal,activated_dual,wall_ms,macs"


def normalized_error_db(x_n, x_0, x_inf) -> float:
    """20 log10(||x_n - x_inf|| / ||x_0 - x_inf||), floored at -320 dB."""
    x_n, x_0, x_inf = (v if isinstance(v, BlockVector) else BlockVector([v]) for v in (x_n, x_0, x_inf))
    den = (x_0 - x_inf).norm()
    if den == 0.0:
        raise UndefinedMetric("x_0 coincides with the reference point; normalized error undefined")
    num = (x_n - x_inf).norm()
    if num == 0.0:
        return ERROR_FLOOR_DB
    return max(ERROR_FLOOR_DB, 20.0 * math.log10(num / den))


@dataclass
class TraceRecord:
    iteration: int
    epochs: float
    error_db: float
    objective: float
    kt_residual: float
    activated_primal: int
    activated_dual: int
    wall_ms: float
    macs: int

    def csv_row(self) -> str:
        return (
            f"{self.iteration},{self.epochs:.6f},{self.error_db:.6f},{self.objective:.10e},"
            f"{self.kt_residual:.6e},{self.activated_primal},{self.activated_dual},"
            f"{self.wall_ms:.3f},{self.macs}"
        )


TRACE_FIELDS = [f.name for f in fields(TraceRecord)]


def write_trace_csv(records, path_or_file) -> None:
    """Write records under the fixed header; ``path_or_file`` may be an open text file."""
    lines = [CSV_HEADER, *(r.csv_row() for r in records)]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="") as fh:
            fh.write(text)


def read_trace_csv(path) -> list[TraceRecord]:
    import csv

    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(TraceRecord(
                iteration=int(row["iteration"]),
                epochs=float(row["epochs"]),
                error_db=float(row["error_db"]),
                objective=float(row["objective"]),
                kt_residual=float(row["kt_residual"]),
                activated_primal=int(row["activated_primal"]),
                activated_dual=int(row["activated_dual"]),
                wall_ms=float(row["wall_ms"]),
                macs=int(row["macs"]),
            ))
    return out


class Tracer:
    """Collects TraceRecords during a solver run.

    Parameters
    ----------
    problem : ProblemSpec
    x0 : BlockVector
        Starting primal point (denominator of the normalized error).
    reference : BlockVector, optional
        Limit point x_inf; without it ``error_db`` is NaN.
    epoch_side : {"primal", "dual"}
        Count epochs over primal blocks (m) or dual blocks (p).
    every_epochs : float, optional
        Record only when another ``every_epochs`` epochs have elapsed
        (the final iteration is always recorded). Default: every iteration.
    full_metrics : bool
        Evaluate objective and KT residual at each record (one extra pass
        over all proximity operators).
    timing : bool
        Fill ``wall_ms``; otherwise it is written as 0 so traces stay
        byte-reproducible.
    sink : callable, optional
        Called with each record as it is produced.
    """

    def __init__(self, problem, x0: BlockVector, reference: BlockVector | None = None, *,
                 epoch_side: str = "primal", every_epochs: float | None = None,
                 full_metrics: bool = True, timing: bool = False,
                 sink: Callable[[TraceRecord], None] | None = None):
        if epoch_side not in ("primal", "dual"):
            raise ValueError("epoch_side must be 'primal' or 'dual'")
        self.problem = problem
        self.x0 = x0.copy()
        self.reference = reference
        self.epoch_side = epoch_side
        self.counter = EpochCounter(problem.m if epoch_side == "primal" else problem.p)
        self.every = every_epochs
        self.full_metrics = full_metrics
        self.timing = timing
        self.sink = sink
        self.records: list[TraceRecord] = []
        self._next_mark = every_epochs if every_epochs else 0.0
        self._t0 = time.perf_counter()
        self._last_iteration = -1

    def _error(self, x: BlockVector) -> float:
        if self.reference is None:
            return math.nan
        return normalized_error_db(x, self.x0, self.reference)

    def _emit(self, iteration, x, kt_point: Callable[[], KTPoint], counts, macs):
        if self.full_metrics:
            obj = objective_value(self.problem, x)
            res = kt_residual(self.problem, kt_point())
        else:
            obj = res = math.nan
        wall = (time.perf_counter() - self._t0) * 1e3 if self.timing else 0.0
        rec = TraceRecord(iteration, self.counter.epochs, self._error(x), obj, res,
                          int(counts[0]), int(counts[1]), wall, int(macs))
        self.records.append(rec)
        self._last_iteration = iteration
        if self.sink is not None:
            self.sink(rec)
        return rec

    def start(self, x, kt_point, macs=0):
        return self._emit(0, x, kt_point, (0, 0), macs)

    @property
    def epochs(self) -> float:
        return self.counter.epochs

    def step(self, iteration, x, kt_point, counts, macs, force=False):
        self.counter.record(counts[0] if self.epoch_side == "primal" else counts[1])
        if self.every:
            if self.counter.epochs + 1e-12 < self._next_mark and not force:
                return None
            while self._next_mark <= self.counter.epochs + 1e-12:
                self._next_mark += self.every
        return self._emit(iteration, x, kt_point, counts, macs)

    def finish(self, iteration, x, kt_point, counts, macs):
        if iteration != self._last_iteration:
            return self._emit(iteration, x, kt_point, counts, macs)
        return None
