"""Randomly block-activated primal-dual Douglas-Rachford splitting.

Each iteration projects (z_n, y_n) onto the graph of the stacked operator and
updates only the selected blocks::

    x_i <- Q_i(z, y),        z_i <- z_i + lam (prox_{gamma f_i}(2 x_i - z_i) - x_i),   i in I_n
    w_k <- Q_{m+k}(z, y),    y_k <- y_k + lam (prox_{gamma g_k}(2 w_k - y_k) - w_k),   k in K_n

All other blocks are carried over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import BlockVector, KTPoint, ProblemSpec, as_block_vector, kt_residual
from .exceptions import NumericalError
from .schedule import ActivationPlan, FullActivation, next_blocks
from .trace import Tracer, TraceRecord

Relaxation = Union[float, Callable[[int], float]]


def relaxation_at(relaxation: Relaxation, n: int) -> float:
    lam = float(relaxation(n)) if callable(relaxation) else float(relaxation)
    if not 0.0 < lam < 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2), got {lam} at iteration {n}")
    return lam


@dataclass
class DRConfig:
    """Parameters of the Douglas-Rachford iteration.

    ``plan=None`` means full activation. ``tolerance`` stops the run once the
    KT residual (checked every ``check_every`` iterations) falls below it.
    """

    gamma: float = 1.0
    relaxation: Relaxation = 1.5
    plan: ActivationPlan | None = None
    max_iterations: int = 1000
    tolerance: float | None = None
    check_every: int = 1

    def validate(self) -> None:
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not callable(self.relaxation):
            relaxation_at(self.relaxation, 0)
        if self.max_iterations < 0 or self.check_every < 1:
            raise ValueError("max_iterations must be >= 0 and check_every >= 1")

    def plan_for(self, problem: ProblemSpec) -> ActivationPlan:
        plan = self.plan if self.plan is not None else FullActivation(problem.m, problem.p)
        if (plan.m, plan.p) != (problem.m, problem.p):
            raise ValueError(f"plan is for ({plan.m}, {plan.p}) blocks, problem has ({problem.m}, {problem.p})")
        return plan


@dataclass
class DRState:
    x: BlockVector
    z: BlockVector
    w: BlockVector
    y: BlockVector
    n: int = 0


@dataclass
class DRStepInfo:
    primal: np.ndarray
    dual: np.ndarray
    relaxation: float
    macs: int = 0


def dr_init(problem: ProblemSpec, config: DRConfig, *, x0=None, z0=None, w0=None, y0=None) -> DRState:
    """Zero state unless warm-start blocks are given; builds the projector once."""
    config.validate()
    config.plan_for(problem)
    problem.projector()
    H, G = problem.primal_dims, problem.dual_dims
    z = as_block_vector(z0, H, "z0").copy() if z0 is not None else BlockVector.zeros(H)
    x = as_block_vector(x0, H, "x0").copy() if x0 is not None else z.copy() if z0 is not None else BlockVector.zeros(H)
    y = as_block_vector(y0, G, "y0").copy() if y0 is not None else BlockVector.zeros(G)
    w = as_block_vector(w0, G, "w0").copy() if w0 is not None else y.copy() if y0 is not None else BlockVector.zeros(G)
    return DRState(x=x, z=z, w=w, y=y, n=0)


def dr_step(problem: ProblemSpec, config: DRConfig, state: DRState,
            plan: ActivationPlan | None = None) -> tuple[DRState, DRStepInfo]:
    """One iteration. Block arrays of unselected indices are reused as-is."""
    plan = plan if plan is not None else config.plan_for(problem)
    proj = problem.projector()
    n = state.n
    lam = relaxation_at(config.relaxation, n)
    gamma = config.gamma
    I, K = next_blocks(plan, n)

    t, u = proj.project_flat(state.z.flat(), state.y.flat())
    off_h = proj.grid.in_offsets
    off_g = proj.grid.out_offsets

    x = list(state.x.blocks)
    z = list(state.z.blocks)
    for i in I:
        xi = t[off_h[i]:off_h[i + 1]].copy()
        zi = state.z.blocks[i]
        z[i] = zi + lam * (problem.f[i].prox(2.0 * xi - zi, gamma) - xi)
        x[i] = xi
    w = list(state.w.blocks)
    y = list(state.y.blocks)
    for k in K:
        wk = u[off_g[k]:off_g[k + 1]].copy()
        yk = state.y.blocks[k]
        y[k] = yk + lam * (problem.g[k].prox(2.0 * wk - yk, gamma) - wk)
        w[k] = wk
    # untouched blocks stay the very same array objects
    new = DRState(BlockVector.wrap(x), BlockVector.wrap(z), BlockVector.wrap(w), BlockVector.wrap(y), n + 1)
    if not np.isfinite(sum(float(z[i].sum()) for i in I) + sum(float(y[k].sum()) for k in K)):
        # locate the culprit only on the slow path
        bad = [f"z block {i}" for i in I if not np.all(np.isfinite(z[i]))]
        bad += [f"y block {k}" for k in K if not np.all(np.isfinite(y[k]))]
        if bad:
            raise NumericalError(f"non-finite {', '.join(bad)} at iteration {n}")
    return new, DRStepInfo(I, K, lam, proj.apply_macs)


def dr_kt_point(problem: ProblemSpec, state: DRState, gamma: float) -> KTPoint:
    """Primal-dual estimate (t, (L t - y) / gamma) from the projection of (z, y).

    At a fixed point of the iteration this pair satisfies the KT inclusions.
    """
    proj = problem.projector()
    t, u = proj.project_flat(state.z.flat(), state.y.flat())
    v = (u - state.y.flat()) / gamma
    return KTPoint(BlockVector.from_flat(t, problem.primal_dims), BlockVector.from_flat(v, problem.dual_dims))


def dr_run(problem: ProblemSpec, config: DRConfig, seed: int | None = None, *,
           state: DRState | None = None, reference: BlockVector | None = None,
           epoch_side: str = "primal", max_epochs: float | None = None,
           trace_every: float | None = None, full_metrics: bool = True,
           timing: bool = False, trace_sink: Callable[[TraceRecord], None] | None = None,
           ) -> tuple[DRState, list[TraceRecord]]:
    """Iterate until ``max_iterations``, ``max_epochs`` or the KT tolerance.

    ``seed`` reseeds a random activation plan. One TraceRecord is produced
    per iteration, or per ``trace_every`` epochs. The projector setup cost is
    included in the ``macs`` column of the initial record.
    """
    config.validate()
    plan = config.plan_for(problem)
    if seed is not None:
        plan = plan.reseed(seed)
    state = state if state is not None else dr_init(problem, config)
    proj = problem.projector()
    macs = proj.setup_macs
    tracer = Tracer(problem, state.x, reference, epoch_side=epoch_side, every_epochs=trace_every,
                    full_metrics=full_metrics, timing=timing, sink=trace_sink)
    kt = lambda: dr_kt_point(problem, state, config.gamma)  # noqa: E731
    tracer.start(state.x, kt, macs)
    counts = (0, 0)
    for _ in range(config.max_iterations):
        if max_epochs is not None and tracer.epochs >= max_epochs - 1e-12:
            break
        state, info = dr_step(problem, config, state, plan)
        macs += info.macs
        counts = (len(info.primal), len(info.dual))
        tracer.step(state.n, state.x, kt, counts, macs)
        if config.tolerance is not None and state.n % config.check_every == 0:
            if kt_residual(problem, kt()) <= config.tolerance:
                break
    tracer.finish(state.n, state.x, kt, counts, macs)
    return state, tracer.records
