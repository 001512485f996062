"""Deterministic block-activated primal-dual projective splitting.

Each iteration refreshes the proximal points of the selected blocks,

    a_i  = prox_{gamma_i f_i}(x_i - gamma_i (L* v*)_i),  a*_i = (x_i - gamma_i (L* v*)_i - a_i) / gamma_i
    b_k  = prox_{mu_k g_k}(mu_k v*_k + (L x)_k),        b*_k = (mu_k v*_k + (L x)_k - b_k) / mu_k

keeps the cached ones for the others, builds the separating half-space with
normal (t*, t),

    t_k  = b_k - (L a)_k          (every k)
    t*_i = a*_i + (L* b*)_i       (every i)

and moves (x, v*) by a relaxed projection onto it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import BlockVector, KTPoint, ProblemSpec, as_block_vector, kt_residual
from .exceptions import NumericalError
from .schedule import ActivationPlan, FullActivation, next_blocks
from .solver_dr import Relaxation, relaxation_at
from .trace import Tracer, TraceRecord


def _per_block(value, count: int, what: str) -> np.ndarray:
    arr = np.full(count, float(value)) if np.isscalar(value) else np.asarray(value, dtype=float).reshape(-1)
    if arr.size != count:
        raise ValueError(f"{what} needs {count} entries, got {arr.size}")
    if not np.all(arr > 0):
        raise ValueError(f"all {what} scale parameters must be positive")
    return arr


@dataclass
class PSConfig:
    """Parameters of projective splitting.

    ``gamma`` and ``mu`` are either one positive number shared by every block
    or one value per primal (dual) block.
    """

    gamma: float | Sequence[float] = 1.0
    mu: float | Sequence[float] = 1.0
    relaxation: Relaxation = 1.9
    plan: ActivationPlan | None = None
    max_iterations: int = 1000
    tolerance: float | None = None
    check_every: int = 1

    def validate(self, problem: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
        gammas = _per_block(self.gamma, problem.m, "gamma")
        mus = _per_block(self.mu, problem.p, "mu")
        if not callable(self.relaxation):
            relaxation_at(self.relaxation, 0)
        if self.max_iterations < 0 or self.check_every < 1:
            raise ValueError("max_iterations must be >= 0 and check_every >= 1")
        return gammas, mus

    def plan_for(self, problem: ProblemSpec) -> ActivationPlan:
        plan = self.plan if self.plan is not None else FullActivation(problem.m, problem.p)
        if (plan.m, plan.p) != (problem.m, problem.p):
            raise ValueError(f"plan is for ({plan.m}, {plan.p}) blocks, problem has ({problem.m}, {problem.p})")
        return plan


@dataclass
class PSState:
    """Iterate (x, v*) plus the cached proximal pairs of every block."""

    x: BlockVector
    v_star: BlockVector
    a: list | None = None
    a_star: list | None = None
    b: list | None = None
    b_star: list | None = None
    t: BlockVector | None = None
    t_star: BlockVector | None = None
    n: int = 0


@dataclass
class PSStepReport:
    tau: float
    pi: float
    theta: float
    updated: bool
    primal: np.ndarray
    dual: np.ndarray
    relaxation: float
    macs: int = 0


class _Operators:
    """Sparse forms of L and L* with row/column index maps per block."""

    def __init__(self, problem: ProblemSpec):
        grid = problem.grid
        self.L = grid.matrix()
        self.LT = grid.matrix_adjoint()
        self.in_off = grid.in_offsets
        self.out_off = grid.out_offsets
        self.cols = [np.arange(self.in_off[i], self.in_off[i + 1]) for i in range(grid.m)]
        self.rows = [np.arange(self.out_off[k], self.out_off[k + 1]) for k in range(grid.p)]
        self.row_nnz = grid.row_nnz()
        self.col_nnz = grid.col_nnz()
        self.nnz = int(self.L.nnz)

    def adjoint_rows(self, v: np.ndarray, I: np.ndarray) -> np.ndarray:
        """(L* v) restricted to the coordinates of primal blocks I, concatenated."""
        if len(I) == len(self.cols):
            return self.LT @ v
        idx = np.concatenate([self.cols[i] for i in I])
        return self.LT[idx] @ v

    def forward_rows(self, x: np.ndarray, K: np.ndarray) -> np.ndarray:
        if len(K) == len(self.rows):
            return self.L @ x
        idx = np.concatenate([self.rows[k] for k in K])
        return self.L[idx] @ x


def _operators(problem: ProblemSpec) -> _Operators:
    if "ps_operators" not in problem._cache:
        problem._cache["ps_operators"] = _Operators(problem)
    return problem._cache["ps_operators"]


def ps_init(problem: ProblemSpec, config: PSConfig, *, x0=None, v0=None) -> PSState:
    """Zero (or warm-start) iterate with empty caches; the first step activates everything."""
    config.validate(problem)
    config.plan_for(problem)
    x = as_block_vector(x0, problem.primal_dims, "x0").copy() if x0 is not None else problem.zeros_primal()
    v = as_block_vector(v0, problem.dual_dims, "v0").copy() if v0 is not None else problem.zeros_dual()
    return PSState(x=x, v_star=v, n=0)


def separator_value(state: PSState, x: BlockVector | None = None, v_star: BlockVector | None = None) -> float:
    """Affine functional of the last half-space, evaluated at (x, v*) (default: the state's).

    sum_i <x_i, t*_i> - <a_i, a*_i> + sum_k <t_k, v*_k> - <b_k, b*_k>
    """
    x = state.x if x is None else x
    v = state.v_star if v_star is None else v_star
    return _separator(x.flat(), v.flat(), np.concatenate(state.a), np.concatenate(state.b_star),
                      state.t.flat(), state.t_star.flat())


def _separator(x, v, a, b_star, t, t_star) -> float:
    # <x - a, t*> + <t, v* - b*>: equal to the expanded form since
    # <a, L* b*> = <L a, b*>, but free of cancellation near a KT point
    return float((x - a) @ t_star + t @ (v - b_star))


def ps_step(problem: ProblemSpec, config: PSConfig, state: PSState,
            plan: ActivationPlan | None = None) -> tuple[PSState, PSStepReport]:
    """One iteration; iteration 0 always activates every block."""
    gammas, mus = config.validate(problem)
    ops = _operators(problem)
    n = state.n
    lam = relaxation_at(config.relaxation, n)
    if n == 0 or state.a is None:
        I, K = np.arange(problem.m), np.arange(problem.p)
    else:
        plan = plan if plan is not None else config.plan_for(problem)
        I, K = next_blocks(plan, n)

    x_flat = state.x.flat()
    v_flat = state.v_star.flat()
    a = list(state.a) if state.a is not None else [None] * problem.m
    a_star = list(state.a_star) if state.a_star is not None else [None] * problem.m
    b = list(state.b) if state.b is not None else [None] * problem.p
    b_star = list(state.b_star) if state.b_star is not None else [None] * problem.p

    Ltv = ops.adjoint_rows(v_flat, I)
    pos = 0
    for i in I:
        d = problem.primal_dims[i]
        g = gammas[i]
        xs = state.x.blocks[i] - g * Ltv[pos:pos + d]
        pos += d
        ai = problem.f[i].prox(xs, g)
        a[i] = ai
        a_star[i] = (xs - ai) / g
    Lx = ops.forward_rows(x_flat, K)
    pos = 0
    for k in K:
        d = problem.dual_dims[k]
        mu = mus[k]
        ys = mu * state.v_star.blocks[k] + Lx[pos:pos + d]
        pos += d
        bk = problem.g[k].prox(ys, mu)
        b[k] = bk
        b_star[k] = (ys - bk) / mu

    a_flat = np.concatenate(a)
    as_flat = np.concatenate(a_star)
    b_flat = np.concatenate(b)
    bs_flat = np.concatenate(b_star)
    t_flat = b_flat - ops.L @ a_flat
    ts_flat = as_flat + ops.LT @ bs_flat
    macs = int(ops.col_nnz[I].sum() + ops.row_nnz[K].sum()) + 2 * ops.nnz

    tau = float(ts_flat @ ts_flat + t_flat @ t_flat)
    if not np.isfinite(tau):
        raise NumericalError(f"non-finite tau at iteration {n}")
    pi = float("nan")
    theta = 0.0
    updated = False
    if tau > 0.0:
        pi = _separator(x_flat, v_flat, a_flat, bs_flat, t_flat, ts_flat)
        if not np.isfinite(pi):
            raise NumericalError(f"non-finite pi at iteration {n}")
        if pi > 0.0:
            theta = lam * pi / tau
            updated = True
    if updated:
        x_new = BlockVector.from_flat(x_flat - theta * ts_flat, problem.primal_dims)
        v_new = BlockVector.from_flat(v_flat - theta * t_flat, problem.dual_dims)
    else:
        x_new, v_new = state.x, state.v_star
    new = PSState(
        x=x_new, v_star=v_new, a=a, a_star=a_star, b=b, b_star=b_star,
        t=BlockVector.from_flat(t_flat, problem.dual_dims),
        t_star=BlockVector.from_flat(ts_flat, problem.primal_dims),
        n=n + 1,
    )
    return new, PSStepReport(tau, pi, theta, updated, I, K, lam, macs)


def ps_run(problem: ProblemSpec, config: PSConfig, *, state: PSState | None = None,
           reference: BlockVector | None = None, epoch_side: str = "primal",
           max_epochs: float | None = None, trace_every: float | None = None,
           full_metrics: bool = True, timing: bool = False,
           trace_sink: Callable[[TraceRecord], None] | None = None,
           step_hook: Callable[[PSState, PSState, PSStepReport], None] | None = None,
           ) -> tuple[PSState, list[TraceRecord]]:
    """Iterate until ``max_iterations``, ``max_epochs`` or the KT tolerance.

    ``step_hook(old, new, report)`` is called after every step, e.g. to
    audit the half-space identities.
    """
    config.validate(problem)
    plan = config.plan_for(problem)
    state = state if state is not None else ps_init(problem, config)
    tracer = Tracer(problem, state.x, reference, epoch_side=epoch_side, every_epochs=trace_every,
                    full_metrics=full_metrics, timing=timing, sink=trace_sink)
    kt = lambda: KTPoint(state.x, state.v_star)  # noqa: E731
    tracer.start(state.x, kt, 0)
    macs = 0
    counts = (0, 0)
    for _ in range(config.max_iterations):
        if max_epochs is not None and tracer.epochs >= max_epochs - 1e-12:
            break
        old = state
        state, report = ps_step(problem, config, state, plan)
        if step_hook is not None:
            step_hook(old, state, report)
        macs += report.macs
        counts = (len(report.primal), len(report.dual))
        tracer.step(state.n, state.x, kt, counts, macs)
        if config.tolerance is not None and state.n % config.check_every == 0:
            if kt_residual(problem, kt()) <= config.tolerance:
                break
    tracer.finish(state.n, state.x, kt, counts, macs)
    return state, tracer.records
