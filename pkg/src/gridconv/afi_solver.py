"""Approximately-factored implicit (AFI) iteration for steady conduction.

Each outer cycle solves

    (alpha - dxx / dx**2) (alpha - dyy / dy**2) corr = 2 * alpha * L(phi)

as two families of tridiagonal line solves (x lines first, then y lines)
and updates ``phi += corr``. ``L`` is the five-point Laplacian minus the
source; Neumann edges use a mirrored ghost node one spacing outside the
domain, ``ghost = interior_neighbour + 2 * spacing * outward_derivative``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergenceError, SingularSystemError
from .grid import GridSpec, ProblemSpec, ScalarField, make_field

__all__ = [
    "SolverConfig",
    "SolveReport",
    "forward_difference_x",
    "backward_difference_x",
    "forward_difference_y",
    "backward_difference_y",
    "apply_L",
    "residual_field",
    "residual_norm",
    "roundoff_floor",
    "tridiagonal_solve",
    "alpha_sequence",
    "afi_sweep",
    "solve",
]

log = logging.getLogger(__name__)

# Safety multiple on the machine-precision noise level of L(phi); see
# roundoff_floor.
ROUNDOFF_SAFETY = 2.0


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and acceleration-parameter cycle.

    ``alpha_min``/``alpha_max`` left as ``None`` are filled per grid by
    :meth:`for_grid`: ``0.5 * pi**2 / max(Lx, Ly)**2`` and
    ``4 / min(dx, dy)**2``.
    """

    residual_tolerance: float = 1e-10
    max_iterations: int = 10_000
    alpha_min: float | None = None
    alpha_max: float | None = None
    alpha_cycle_length: int = 8

    def __post_init__(self):
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be > 0")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if int(self.alpha_cycle_length) != self.alpha_cycle_length or self.alpha_cycle_length < 1:
            raise ValueError("alpha_cycle_length must be a positive integer")
        for name in ("alpha_min", "alpha_max"):
            a = getattr(self, name)
            if a is not None and not (math.isfinite(a) and a > 0):
                raise ValueError(f"{name} must be positive, got {a!r}")
        if self.alpha_min is not None and self.alpha_max is not None:
            if self.alpha_min > self.alpha_max:
                raise ValueError("alpha_min must not exceed alpha_max")

    def for_grid(self, grid: GridSpec) -> "SolverConfig":
        a_min = self.alpha_min
        a_max = self.alpha_max
        if a_min is None:
            a_min = 0.5 * math.pi**2 / max(grid.domain_length_x, grid.domain_length_y) ** 2
        if a_max is None:
            a_max = 4.0 / min(grid.dx, grid.dy) ** 2
        # An explicit bound may sit on the wrong side of an automatic one.
        if a_min > a_max:
            if self.alpha_min is None:
                a_min = a_max
            else:
                a_max = a_min
        return replace(self, alpha_min=a_min, alpha_max=a_max)


@dataclass(frozen=True)
class SolveReport:
    field: ScalarField
    iterations: int
    final_residual: float
    residual_history: tuple[float, ...]
    converged: bool
    # Stopping threshold actually applied: residual_tolerance, raised to the
    # round-off floor of L(phi) when that is larger.
    tolerance_used: float
    config: SolverConfig


def _check_index(grid: GridSpec, i: int, j: int, i_range, j_range):
    if not (i_range[0] <= i <= i_range[1] and j_range[0] <= j <= j_range[1]):
        raise IndexError(f"index ({i}, {j}) outside valid range for n={grid.n}")


def forward_difference_x(field: ScalarField, i: int, j: int) -> float:
    n = field.grid.n
    _check_index(field.grid, i, j, (0, n - 1), (0, n))
    return float(field.values[i + 1, j] - field.values[i, j])


def backward_difference_x(field: ScalarField, i: int, j: int) -> float:
    n = field.grid.n
    _check_index(field.grid, i, j, (1, n), (0, n))
    return float(field.values[i, j] - field.values[i - 1, j])


def forward_difference_y(field: ScalarField, i: int, j: int) -> float:
    n = field.grid.n
    _check_index(field.grid, i, j, (0, n), (0, n - 1))
    return float(field.values[i, j + 1] - field.values[i, j])


def backward_difference_y(field: ScalarField, i: int, j: int) -> float:
    n = field.grid.n
    _check_index(field.grid, i, j, (0, n), (1, n))
    return float(field.values[i, j] - field.values[i, j - 1])


def _neighbour(values: np.ndarray, problem: ProblemSpec, i: int, j: int, di: int, dj: int) -> float:
    """Value at (i+di, j+dj), mirrored across a Neumann edge when off-grid."""
    n = problem.grid.n
    ii, jj = i + di, j + dj
    if ii < 0:
        return values[1, j] + 2.0 * problem.grid.dx * problem.left.value
    if ii > n:
        return values[n - 1, j] + 2.0 * problem.grid.dx * problem.right.value
    if jj < 0:
        return values[i, 1] + 2.0 * problem.grid.dy * problem.front.value
    if jj > n:
        return values[i, n - 1] + 2.0 * problem.grid.dy * problem.back.value
    return values[ii, jj]


def apply_L(field: ScalarField, problem: ProblemSpec, i: int, j: int) -> float:
    """Five-point residual ``t_xx + t_yy - S`` at one unknown node."""
    n = problem.grid.n
    if not (0 <= i <= n and 0 <= j <= n):
        raise IndexError(f"node ({i}, {j}) outside 0..{n}")
    if problem.dirichlet_mask()[i, j]:
        raise ValueError(f"node ({i}, {j}) lies on a Dirichlet edge and is not an unknown")
    v = field.values
    c = v[i, j]
    d2x = _neighbour(v, problem, i, j, 1, 0) - 2.0 * c + _neighbour(v, problem, i, j, -1, 0)
    d2y = _neighbour(v, problem, i, j, 0, 1) - 2.0 * c + _neighbour(v, problem, i, j, 0, -1)
    return float(d2x / problem.grid.dx**2 + d2y / problem.grid.dy**2 - problem.source)


def _padded(values: np.ndarray, problem: ProblemSpec) -> np.ndarray:
    g = problem.grid
    p = np.zeros((g.n + 3, g.n + 3))
    p[1:-1, 1:-1] = values
    if not problem.left.is_dirichlet:
        p[0, 1:-1] = values[1, :] + 2.0 * g.dx * problem.left.value
    if not problem.right.is_dirichlet:
        p[-1, 1:-1] = values[-2, :] + 2.0 * g.dx * problem.right.value
    if not problem.front.is_dirichlet:
        p[1:-1, 0] = values[:, 1] + 2.0 * g.dy * problem.front.value
    if not problem.back.is_dirichlet:
        p[1:-1, -1] = values[:, -2] + 2.0 * g.dy * problem.back.value
    return p


def residual_field(field: ScalarField | np.ndarray, problem: ProblemSpec) -> np.ndarray:
    """``L(phi)`` on every node; zero on Dirichlet nodes."""
    values = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    g = problem.grid
    p = _padded(values, problem)
    d2x = (p[2:, 1:-1] - 2.0 * values + p[:-2, 1:-1]) / g.dx**2
    d2y = (p[1:-1, 2:] - 2.0 * values + p[1:-1, :-2]) / g.dy**2
    out = np.zeros_like(values)
    xs, ys = problem.unknown_ranges()
    out[xs, ys] = (d2x + d2y)[xs, ys] - problem.source
    return out


def residual_norm(field: ScalarField | np.ndarray, problem: ProblemSpec) -> float:
    return float(np.max(np.abs(residual_field(field, problem))))


def roundoff_floor(values: np.ndarray, problem: ProblemSpec) -> float:
    """Smallest residual max-norm distinguishable from rounding noise.

    Storing ``phi`` and evaluating the stencil in double precision leaves an
    error in ``L(phi)`` of order ``eps * max|phi| / h**2`` which no iteration
    can remove; an absolute tolerance below it can never be met.
    """
    g = problem.grid
    scale = float(np.max(np.abs(values)))
    for name in ("left", "right", "front", "back"):
        cond = problem.edge(name)
        if not cond.is_dirichlet:
            h = g.dx if name in ("left", "right") else g.dy
            scale += 2.0 * h * abs(cond.value)
    stencil = scale * (4.0 / g.dx**2 + 4.0 / g.dy**2) + abs(problem.source)
    return ROUNDOFF_SAFETY * np.finfo(float).eps * stencil


def tridiagonal_solve(sub, diag, sup, rhs) -> np.ndarray:
    """Solve a tridiagonal system with the Thomas algorithm.

    Parameters
    ----------
    sub : array_like, length m - 1
        Sub-diagonal, ``sub[k]`` multiplies ``x[k]`` in row ``k + 1``.
    diag : array_like, length m
    sup : array_like, length m - 1
        Super-diagonal, ``sup[k]`` multiplies ``x[k + 1]`` in row ``k``.
    rhs : array_like, shape (m,) or (m, k)
        Right-hand side; a 2-D array solves ``k`` systems sharing the matrix.

    Returns
    -------
    x : ndarray with the shape of ``rhs``.
    """
    a = np.asarray(sub, dtype=float)
    b = np.asarray(diag, dtype=float)
    c = np.asarray(sup, dtype=float)
    d = np.array(rhs, dtype=float)
    m = b.shape[0]
    if m < 1:
        raise ValueError("empty system")
    if a.shape != (m - 1,) or c.shape != (m - 1,) or d.shape[0] != m:
        raise ValueError("inconsistent tridiagonal system dimensions")

    cp = np.empty(max(m - 1, 0))
    if b[0] == 0.0:
        raise SingularSystemError("zero pivot in row 0")
    if m > 1:
        cp[0] = c[0] / b[0]
    d[0] = d[0] / b[0]
    for k in range(1, m):
        denom = b[k] - a[k - 1] * cp[k - 1]
        if denom == 0.0:
            raise SingularSystemError(f"zero pivot in row {k}")
        if k < m - 1:
            cp[k] = c[k] / denom
        d[k] = (d[k] - a[k - 1] * d[k - 1]) / denom
    for k in range(m - 2, -1, -1):
        d[k] = d[k] - cp[k] * d[k + 1]
    return d


def alpha_sequence(config: SolverConfig) -> list[float]:
    """Geometric cycle from ``alpha_max`` down to ``alpha_min``."""
    if config.alpha_min is None or config.alpha_max is None:
        raise ValueError("alpha bounds unresolved; call config.for_grid(grid) first")
    m = config.alpha_cycle_length
    if m == 1:
        return [float(config.alpha_max)]
    ratio = config.alpha_min / config.alpha_max
    seq = [config.alpha_max * ratio ** (k / (m - 1)) for k in range(m)]
    seq[-1] = float(config.alpha_min)
    return seq


def _line_operator(m: int, h: float, alpha: float, lo_neumann: bool, hi_neumann: bool):
    """Coefficients of ``alpha - d2/h**2`` on ``m`` unknowns along one line."""
    off = -1.0 / h**2
    diag = np.full(m, alpha + 2.0 / h**2)
    sub = np.full(m - 1, off)
    sup = np.full(m - 1, off)
    if m > 1:
        # mirrored ghost: the correction's ghost equals its inner neighbour
        if lo_neumann:
            sup[0] = 2.0 * off
        if hi_neumann:
            sub[-1] = 2.0 * off
    return sub, diag, sup


def afi_sweep(
    field: ScalarField | np.ndarray,
    problem: ProblemSpec,
    alpha: float,
    residual: np.ndarray | None = None,
) -> np.ndarray:
    """Correction for one AFI cycle, shaped like the lattice.

    ``residual`` may pass a precomputed ``residual_field`` to avoid
    recomputing it. Dirichlet nodes get a zero correction.
    """
    assert alpha > 0, "alpha must be positive"
    g = problem.grid
    if residual is None:
        residual = residual_field(field, problem)
    xs, ys = problem.unknown_ranges()
    rhs = 2.0 * alpha * residual[xs, ys]
    mx, my = rhs.shape

    sub, diag, sup = _line_operator(
        mx, g.dx, alpha, not problem.left.is_dirichlet, not problem.right.is_dirichlet
    )
    w = tridiagonal_solve(sub, diag, sup, rhs)
    sub, diag, sup = _line_operator(
        my, g.dy, alpha, not problem.front.is_dirichlet, not problem.back.is_dirichlet
    )
    corr_block = tridiagonal_solve(sub, diag, sup, w.T).T

    corr = np.zeros(g.shape)
    corr[xs, ys] = corr_block
    return corr


def solve(
    problem: ProblemSpec,
    config: SolverConfig | None = None,
    initial: ScalarField | None = None,
) -> SolveReport:
    """Iterate AFI cycles to steady state.

    ``initial`` defaults to a zero interior; its Dirichlet nodes are reset
    to the boundary values. Iteration stops once the residual max-norm is
    at most ``residual_tolerance`` (or the round-off floor, if higher) or
    after ``max_iterations`` cycles.
    """
    config = (config or SolverConfig()).for_grid(problem.grid)
    if initial is None:
        phi = make_field(problem, 0.0).values
    else:
        if initial.grid.shape != problem.grid.shape:
            raise ValueError(
                f"initial field shape {initial.grid.shape} does not match {problem.grid.shape}"
            )
        phi = initial.values.copy()
        fixed = problem.dirichlet_mask()
        phi[fixed] = make_field(problem, 0.0).values[fixed]

    alphas = alpha_sequence(config)
    res = residual_field(phi, problem)
    rnorm = float(np.max(np.abs(res)))
    tol = max(config.residual_tolerance, roundoff_floor(phi, problem))
    history: list[float] = []
    iterations = 0
    while rnorm > tol and iterations < config.max_iterations:
        alpha = alphas[iterations % len(alphas)]
        with np.errstate(over="ignore", invalid="ignore"):
            phi = phi + afi_sweep(phi, problem, alpha, residual=res)
        iterations += 1
        if not np.all(np.isfinite(phi)):
            raise DivergenceError(iterations)
        res = residual_field(phi, problem)
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        tol = max(config.residual_tolerance, roundoff_floor(phi, problem))

    converged = bool(rnorm <= tol)
    if not converged:
        log.warning(
            "AFI stopped at max_iterations=%d with residual %.3e (n=%d)",
            config.max_iterations, rnorm, problem.grid.n,
        )
    return SolveReport(
        field=ScalarField(problem.grid, phi),
        iterations=iterations,
        final_residual=rnorm,
        residual_history=tuple(history),
        converged=converged,
        tolerance_used=tol,
        config=config,
    )
