"""High-precision limit points used as x_inf in the normalized error."""

from __future__ import annotations

from ..core import KTPoint, ProblemSpec, kt_residual
from ..exceptions import ReferenceFailure
from ..solver_ps import PSConfig, ps_init, ps_run

REFERENCE_TOLERANCE = 1e-10
REFERENCE_MAX_ITERATIONS = 10**6


def compute_reference(problem: ProblemSpec, *, gamma=1.0, mu=1.0,
                      tolerance: float = REFERENCE_TOLERANCE,
                      max_iterations: int = REFERENCE_MAX_ITERATIONS,
                      warm_start: KTPoint | None = None, check_every: int = 100) -> KTPoint:
    """Run projective splitting with full activation and relaxation 1 to a KT point.

    Parameters
    ----------
    problem : ProblemSpec
    gamma, mu : float or sequence
        Scale parameters of the projective splitting run.
    tolerance : float
        Required KT residual.
    max_iterations : int
        Iteration cap.
    warm_start : KTPoint, optional
        Initial (x, v*); zero by default.
    check_every : int
        Residual check period.

    Returns
    -------
    KTPoint
        Final iterate, whose KT residual is at most ``tolerance``.

    Raises
    ------
    ReferenceFailure
        If the tolerance is not met within ``max_iterations``.
    """
    cfg = PSConfig(gamma=gamma, mu=mu, relaxation=1.0, max_iterations=max_iterations,
                   tolerance=tolerance, check_every=check_every)
    x0 = warm_start.x if warm_start is not None else None
    v0 = warm_start.v_star if warm_start is not None else None
    state = ps_init(problem, cfg, x0=x0, v0=v0)
    state, _ = ps_run(problem, cfg, state=state, full_metrics=False)
    point = KTPoint(state.x, state.v_star)
    res = kt_residual(problem, point)
    if res > tolerance:
        raise ReferenceFailure(
            f"reference not reached: KT residual {res:.3e} > {tolerance:.1e} after {state.n} iterations"
        )
    return point
