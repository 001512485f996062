"""Quick self-check of the solver invariants, used by ``blockprox validate``."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import KTPoint, kt_residual
from .experiments.instances import random_problem
from .linops import build_projector
from .prox import (brute_force_prox_oracle, prox_box_indicator, prox_hinge, prox_l12_pairs,
                   prox_scaled_l2_distance, prox_scaled_l2_norm, prox_scaled_sq_l2)
from .schedule import CyclicSweep, verify_sweeping
from .solver_dr import DRConfig, dr_run
from .solver_ps import PSConfig, ps_init, ps_run, ps_step, separator_value


def check_prox(samples: int = 5, seed: int = 0) -> str:
    rng = np.random.default_rng(seed)
    funcs = [prox_scaled_l2_norm(0.7, 3), prox_hinge(-1.0), prox_box_indicator(-0.5, 1.0, 2),
             prox_scaled_l2_distance(0.4, rng.standard_normal(3)), prox_scaled_sq_l2(1.3, rng.standard_normal(2)),
             prox_l12_pairs(2)]
    worst = 0.0
    for f in funcs:
        for _ in range(samples):
            x = 2.0 * rng.standard_normal(f.dim)
            gamma = float(rng.uniform(0.1, 3.0))
            worst = max(worst, float(np.linalg.norm(f.prox(x, gamma) - brute_force_prox_oracle(f, x, gamma, 1e-6))))
    assert worst < 1e-4, f"prox deviates from the oracle by {worst:.2e}"
    return f"max deviation {worst:.1e}"


def check_projector(seed: int = 0) -> str:
    problem = random_problem(seed)
    L = problem.grid.matrix().toarray()
    M, N = L.shape
    rng = np.random.default_rng(seed)
    z, y = rng.standard_normal(N), rng.standard_normal(M)
    dual = build_projector(problem.grid, "dual")
    primal = build_projector(problem.grid, "primal")
    t, u = dual.project_flat(z, y)
    t2, u2 = primal.project_flat(z, y)
    assert np.allclose(u, L @ t, atol=1e-9), "range condition violated"
    assert np.allclose(t, t2, atol=1e-9) and np.allclose(u, u2, atol=1e-9), "closed forms disagree"
    t3, u3 = dual.project_flat(t, u)
    assert np.allclose(t3, t, atol=1e-9) and np.allclose(u3, u, atol=1e-9), "projection not idempotent"
    return f"M={M}, N={N}"


def check_solvers(seed: int = 1) -> str:
    problem = random_problem(seed)
    dr, _ = dr_run(problem, DRConfig(gamma=1.0, relaxation=1.5, max_iterations=20000, tolerance=1e-9,
                                     check_every=20), full_metrics=False)
    ps, _ = ps_run(problem, PSConfig(relaxation=1.0, max_iterations=100000, tolerance=1e-9, check_every=20),
                   full_metrics=False)
    gap = (dr.x - ps.x).norm()
    assert gap < 1e-4, f"limits differ by {gap:.2e}"
    res = kt_residual(problem, KTPoint(ps.x, ps.v_star))
    assert res < 1e-6, f"KT residual {res:.2e}"
    return f"limit gap {gap:.1e}"


def check_separator(seed: int = 2) -> str:
    problem = random_problem(seed)
    cfg = PSConfig(relaxation=1.0)
    state = ps_init(problem, cfg)
    worst = 0.0
    for _ in range(50):
        state, report = ps_step(problem, cfg, state)
        if report.updated:
            worst = max(worst, abs(separator_value(state)))
    assert worst <= 1e-10, f"separator value {worst:.2e} after a unit-relaxation step"
    return f"max |value| {worst:.1e}"


def check_sweeping() -> str:
    for m, p, alpha in [(71, 100, 0.25), (10, 7, 0.1), (5, 31, 0.4), (9, 3, 0.7)]:
        plan = CyclicSweep.from_fractions(m, p, alpha, alpha)
        T = plan.window
        assert verify_sweeping(plan, 5 * (T + 1), T), f"sweeping fails for m={m}, p={p}, alpha={alpha}"
    return "cyclic plans sweep with T = slices - 1"


CHECKS: dict[str, Callable[[], str]] = {
    "prox-oracle": check_prox,
    "projector": check_projector,
    "cross-solver": check_solvers,
    "separator": check_separator,
    "sweeping": check_sweeping,
}


def run_checks(report: Callable[[str], None] = print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        try:
            detail = check()
            report(f"PASS {name}: {detail}")
        except AssertionError as exc:
            ok = False
            report(f"FAIL {name}: {exc}")
    return ok

