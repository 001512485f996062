"""Grid runs (algorithm x activation fraction x seed) with mean error traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..core import BlockVector, ProblemSpec
from ..schedule import CyclicSweep, RandomSubset
from ..solver_dr import DRConfig, dr_run
from ..solver_ps import PSConfig, ps_run
from ..trace import TraceRecord

ALGORITHMS = ("dr", "ps")


def side_fractions(alpha: float, epoch_side: str) -> tuple[float, float]:
    """Activation fractions (primal, dual): alpha on the epoch side, full on the other."""
    if epoch_side == "primal":
        return alpha, 1.0
    if epoch_side == "dual":
        return 1.0, alpha
    raise ValueError("epoch_side must be 'primal' or 'dual'")


def run_single(problem: ProblemSpec, algorithm: str, alpha: float, seed: int, epoch_budget: float, *,
               reference: BlockVector | None = None, epoch_side: str = "primal",
               dr_params: dict | None = None, ps_params: dict | None = None,
               trace_every: float | None = 1.0, full_metrics: bool = True,
               timing: bool = False) -> list[TraceRecord]:
    """One trace: random activation for "dr", cyclic sweeping for "ps"."""
    a_primal, a_dual = side_fractions(alpha, epoch_side)
    if algorithm == "dr":
        plan = RandomSubset(problem.m, problem.p, a_primal, a_dual, seed=seed)
        cfg = DRConfig(plan=plan, max_iterations=10**9, **(dr_params or {}))
        _, records = dr_run(problem, cfg, reference=reference, epoch_side=epoch_side,
                            max_epochs=epoch_budget, trace_every=trace_every,
                            full_metrics=full_metrics, timing=timing)
    elif algorithm == "ps":
        plan = CyclicSweep.from_fractions(problem.m, problem.p, a_primal, a_dual)
        cfg = PSConfig(plan=plan, max_iterations=10**9, **(ps_params or {}))
        _, records = ps_run(problem, cfg, reference=reference, epoch_side=epoch_side,
                            max_epochs=epoch_budget, trace_every=trace_every,
                            full_metrics=full_metrics, timing=timing)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    return records


@dataclass
class ComparisonResult:
    """Traces keyed by (algorithm, alpha, seed) and their per-configuration means."""

    traces: dict = field(default_factory=dict)
    means: dict = field(default_factory=dict)

    def configurations(self) -> list[tuple[str, float]]:
        return list(self.means)


def mean_trace(traces: Sequence[Sequence[TraceRecord]]) -> np.ndarray:
    """Rows (epochs, mean error_db) over traces sampled at the same epochs.

    Runs with the same activation fraction activate the same number of blocks
    per iteration, so their records line up; shorter traces are rejected.
    """
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"traces have different lengths {sorted(lengths)}")
    epochs = np.array([[r.epochs for r in t] for t in traces])
    if not np.allclose(epochs, epochs[0]):
        raise ValueError("traces are sampled at different epochs")
    err = np.array([[r.error_db for r in t] for t in traces])
    return np.column_stack([epochs[0], err.mean(axis=0)])


def run_comparison(problem: ProblemSpec, algorithms: Iterable[str] = ALGORITHMS,
                   alphas: Iterable[float] = (0.1, 0.4, 0.7, 1.0), seeds: Iterable[int] = range(20),
                   epoch_budget: float = 300.0, reference: BlockVector | None = None, *,
                   epoch_side: str = "primal", dr_params: dict | None = None,
                   ps_params: dict | None = None, trace_every: float | None = 1.0,
                   full_metrics: bool = True, timing: bool = False,
                   progress: Callable[[str, float, int], None] | None = None) -> ComparisonResult:
    """Run every (algorithm, alpha, seed) cell to ``epoch_budget`` epochs.

    Projective splitting uses a deterministic plan, so it is run once per
    alpha and its trace is shared by all seeds.
    """
    seeds = list(seeds)
    result = ComparisonResult()
    for alg in algorithms:
        for alpha in alphas:
            runs = []
            for idx, seed in enumerate(seeds):
                if alg == "ps" and idx > 0:
                    records = runs[0]
                else:
                    if progress is not None:
                        progress(alg, alpha, seed)
                    records = run_single(problem, alg, alpha, seed, epoch_budget, reference=reference,
                                         epoch_side=epoch_side, dr_params=dr_params, ps_params=ps_params,
                                         trace_every=trace_every, full_metrics=full_metrics, timing=timing)
                result.traces[(alg, alpha, seed)] = records
                runs.append(records)
            result.means[(alg, alpha)] = mean_trace(runs)
    return result
