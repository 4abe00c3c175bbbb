"""Grid-convergence studies for 2D steady heat conduction.

Solve on a ladder of grids with an approximately-factored implicit
iteration, then fit ``y = a0 + a1/n + ... + ad/n**d`` to recover the
grid-independent value ``a0``.
"""

from .afi_solver import SolverConfig, SolveReport, solve
from .extrapolation import (
    ConvergenceReport,
    FitModel,
    analyse,
    detect_stage_boundary,
    evaluate_fit,
    fit_inverse_polynomial,
    grid_independent_value,
    truncation_errors,
)
from .grid import EdgeCondition, GridSpec, ProblemSpec, ScalarField, dirichlet, make_field, neumann
from .study import ProbeSpec, StudyResult, default_ladder, probe_value, run_study

__version__ = "0.1.0"
