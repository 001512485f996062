"""Block-activated proximal splitting for multicomponent convex problems.

Two solvers share one problem description:

* :mod:`blockprox.solver_dr`: randomly block-activated primal-dual
  Douglas-Rachford splitting,
* :mod:`blockprox.solver_ps`: deterministic block-activated projective
  splitting.
"""

from .core import BlockVector, KTPoint, ProblemSpec, kt_residual, objective_value
from .exceptions import (DimensionError, NumericalError, OracleFailure, PlanViolation, ReferenceFailure,
                         UndefinedMetric)
from .linops import BlockOperatorGrid
from .schedule import CyclicSweep, EpochCounter, FullActivation, RandomSubset, next_blocks, verify_sweeping
from .solver_dr import DRConfig, dr_init, dr_run, dr_step
from .solver_ps import PSConfig, ps_init, ps_run, ps_step
from .trace import TraceRecord, normalized_error_db

__version__ = "0.1.0"

__all__ = [
    "BlockOperatorGrid", "BlockVector", "CyclicSweep", "DRConfig", "DimensionError", "EpochCounter",
    "FullActivation", "KTPoint", "NumericalError", "OracleFailure", "PSConfig", "PlanViolation", "ProblemSpec",
    "RandomSubset", "ReferenceFailure", "TraceRecord", "UndefinedMetric", "dr_init", "dr_run", "dr_step",
    "kt_residual", "next_blocks", "normalized_error_db", "objective_value", "ps_init", "ps_run", "ps_step",
    "verify_sweeping",
]
