"""Independent reference solutions.

Series solutions for the three built-in scenarios and a plain Gauss-Seidel
relaxation solver on the five-point stencil. Nothing here calls into
:mod:`gridconv.afi_solver`; only the grid types are shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import NonConvergenceError
from .grid import EDGES, ProblemSpec, ScalarField, make_field

__all__ = [
    "SeriesConfig",
    "poisson_square_series",
    "laplace_saddle_series",
    "linear_profile",
    "relaxation_solve",
    "relaxation_sweeps",
]


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 400
    truncation_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.truncation_tolerance < 0:
            raise ValueError("truncation_tolerance must be >= 0")


def _cosh_ratio(k: float, a: float) -> float:
    """cosh(k*pi*(a - 1/2)) / cosh(k*pi/2) for a in [0, 1], overflow-safe."""
    d = abs(a - 0.5)
    # (e^{-k pi (1/2 - d)} + e^{-k pi (1/2 + d)}) / (1 + e^{-k pi})
    return (math.exp(-k * math.pi * (0.5 - d)) + math.exp(-k * math.pi * (0.5 + d))) / (
        1.0 + math.exp(-k * math.pi)
    )


def _odd_mode_sum(coeff, along: float, across: float, scale: float, cfg: SeriesConfig) -> float:
    """``scale`` times the sum over odd k of coeff(k) sin(k pi along) cosh_ratio(k, across).

    ``coeff`` must be positive and non-increasing in k. Consecutive odd modes
    then shrink by at least ``rho = exp(-2 pi (1/2 - |across - 1/2|))``, so the
    neglected tail after a term t is at most ``|t| rho / (1 - rho)``; summation
    stops once that bound is below the truncation tolerance.
    """
    # sin(k pi (1 - a)) == sin(k pi a) for odd k; reflecting makes both edges exact zeros
    along = min(along, 1.0 - along)
    if along == 0.0 or scale == 0.0:
        return 0.0
    rho = math.exp(-2.0 * math.pi * (0.5 - abs(across - 0.5)))
    gain = rho / (1.0 - rho) if rho < 1.0 else math.inf
    total = 0.0
    for idx in range(cfg.max_terms):
        k = 2 * idx + 1
        term = scale * coeff(k) * _cosh_ratio(k, across)
        total += term * math.sin(k * math.pi * along)
        if abs(term) * gain < cfg.truncation_tolerance:
            break
    return total


def poisson_square_series(
    x: float, y: float, q: float, L: float = 1.0, cfg: SeriesConfig | None = None
) -> float:
    """Solution of ``-(t_xx + t_yy) = q`` on ``[0, L]**2`` with ``t = 0`` on the edges.

    Equal to the double sine series

        16 q L**2 / pi**4 * sum_{odd m, n} sin(m pi x/L) sin(n pi y/L) / (m n (m**2 + n**2))

    with the inner sum done in closed form, which leaves

        q s (L - s) / 2 - 4 q L**2 / pi**3 * sum_{odd m} sin(m pi s/L) cosh(m pi (r/L - 1/2)) / (m**3 cosh(m pi/2))

    where ``r`` is whichever coordinate lies nearer the centre line, so the
    remaining sum decays exponentially away from the edges.
    """
    cfg = cfg or SeriesConfig()
    if not (0.0 <= x <= L and 0.0 <= y <= L):
        raise ValueError(f"point ({x}, {y}) outside [0, {L}]^2")
    u, v = x / L, y / L
    s, r = (u, v) if abs(v - 0.5) <= abs(u - 0.5) else (v, u)
    scale = q * L**2
    tail = _odd_mode_sum(lambda k: 4.0 / (math.pi**3 * k**3), s, r, scale, cfg)
    return scale * 0.5 * s * (1.0 - s) - tail


def laplace_saddle_series(
    x: float, y: float, T_side: float, L: float = 1.0, cfg: SeriesConfig | None = None
) -> float:
    """Harmonic function on ``[0, L]**2``: ``T_side`` on x = 0 and x = L, 0 on y = 0 and y = L.

    Superposes the two single-hot-edge series,

        sum_{odd n} 4 T/(n pi) sin(n pi y/L) cosh(n pi (x/L - 1/2)) / cosh(n pi/2),

    and near the hot edges evaluates ``T_side`` minus the rotated problem
    instead, which converges faster there.
    """
    cfg = cfg or SeriesConfig()
    if not (0.0 <= x <= L and 0.0 <= y <= L):
        raise ValueError(f"point ({x}, {y}) outside [0, {L}]^2")
    u, v = x / L, y / L
    coeff = lambda k: 4.0 / (k * math.pi)  # noqa: E731
    if abs(u - 0.5) <= abs(v - 0.5):
        return _odd_mode_sum(coeff, v, u, T_side, cfg)
    return T_side - _odd_mode_sum(coeff, u, v, T_side, cfg)


def linear_profile(y: float, T_front: float, T_back: float, L: float = 1.0) -> float:
    if not 0.0 <= y <= L:
        raise ValueError(f"y={y} outside [0, {L}]")
    return T_front + (T_back - T_front) * y / L


@numba.njit(cache=True)
def _gs_sweep(v, fixed, bvals, dx, dy, source):
    n = v.shape[0] - 1
    cx = 1.0 / (dx * dx)
    cy = 1.0 / (dy * dy)
    diag = 2.0 * cx + 2.0 * cy
    for i in range(n + 1):
        for j in range(n + 1):
            if fixed[i, j]:
                continue
            west = v[i - 1, j] if i > 0 else v[1, j] + 2.0 * dx * bvals[0]
            east = v[i + 1, j] if i < n else v[n - 1, j] + 2.0 * dx * bvals[1]
            south = v[i, j - 1] if j > 0 else v[i, 1] + 2.0 * dy * bvals[2]
            north = v[i, j + 1] if j < n else v[i, n - 1] + 2.0 * dy * bvals[3]
            v[i, j] = (cx * (west + east) + cy * (south + north) - source) / diag


@numba.njit(cache=True)
def _max_residual(v, fixed, bvals, dx, dy, source):
    n = v.shape[0] - 1
    cx = 1.0 / (dx * dx)
    cy = 1.0 / (dy * dy)
    worst = 0.0
    for i in range(n + 1):
        for j in range(n + 1):
            if fixed[i, j]:
                continue
            west = v[i - 1, j] if i > 0 else v[1, j] + 2.0 * dx * bvals[0]
            east = v[i + 1, j] if i < n else v[n - 1, j] + 2.0 * dx * bvals[1]
            south = v[i, j - 1] if j > 0 else v[i, 1] + 2.0 * dy * bvals[2]
            north = v[i, j + 1] if j < n else v[i, n - 1] + 2.0 * dy * bvals[3]
            r = cx * (west - 2.0 * v[i, j] + east) + cy * (south - 2.0 * v[i, j] + north) - source
            worst = max(worst, abs(r))
    return worst


def _noise_level(v: np.ndarray, problem: ProblemSpec) -> float:
    g = problem.grid
    conds = [problem.edge(e) for e in EDGES]
    flux = max((abs(c.value) for c in conds if not c.is_dirichlet), default=0.0)
    scale = float(np.abs(v).max()) + 2.0 * max(g.dx, g.dy) * flux
    return 8.0 * np.finfo(float).eps * (scale * 4.0 * (1 / g.dx**2 + 1 / g.dy**2) + abs(problem.source))


def relaxation_sweeps(
    problem: ProblemSpec, tolerance: float = 1e-10, max_iterations: int = 500_000
) -> tuple[ScalarField, int]:
    """Gauss-Seidel to a residual max-norm of ``tolerance``.

    Returns the field and the number of sweeps. The tolerance is raised to
    the round-off noise level of the residual when that is larger.
    """
    g = problem.grid
    v = make_field(problem, 0.0).values.copy()
    fixed = problem.dirichlet_mask()
    bvals = np.array([problem.edge(e).value if not problem.edge(e).is_dirichlet else 0.0 for e in EDGES])
    src = float(problem.source)
    res = _max_residual(v, fixed, bvals, g.dx, g.dy, src)
    sweeps = 0
    while res > max(tolerance, _noise_level(v, problem)):
        if sweeps >= max_iterations:
            raise NonConvergenceError(sweeps, res)
        _gs_sweep(v, fixed, bvals, g.dx, g.dy, src)
        sweeps += 1
        res = _max_residual(v, fixed, bvals, g.dx, g.dy, src)
    return ScalarField(g, v), sweeps


def relaxation_solve(
    problem: ProblemSpec, tolerance: float = 1e-10, max_iterations: int = 500_000
) -> ScalarField:
    return relaxation_sweeps(problem, tolerance, max_iterations)[0]
