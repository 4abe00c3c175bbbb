"""Grid-refinement studies: solve one scenario on a ladder of grids and probe it."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .afi_solver import SolverConfig, SolveReport, solve
from .errors import DivergenceError, StudyError
from .grid import ProblemSpec, ScalarField

__all__ = [
    "ProbeSpec",
    "RungDiagnostics",
    "StudyResult",
    "CENTER",
    "probe_value",
    "run_study",
    "default_ladder",
]

log = logging.getLogger(__name__)

_ON_NODE_TOL = 1e-9


@dataclass(frozen=True)
class ProbeSpec:
    name: str
    x_fraction: float
    y_fraction: float

    def __post_init__(self):
        for f in (self.x_fraction, self.y_fraction):
            if not (0.0 <= f <= 1.0):
                raise ValueError(f"probe {self.name!r}: fractions must lie in [0, 1], got {f!r}")


CENTER = ProbeSpec("center", 0.5, 0.5)


@dataclass(frozen=True)
class RungDiagnostics:
    grid_size: int
    iterations: int
    final_residual: float
    converged: bool


@dataclass(frozen=True)
class StudyResult:
    scenario: ProblemSpec
    grid_sizes: tuple[int, ...]
    probes: tuple[ProbeSpec, ...]
    # (grid_size, probe name) -> probe value
    samples: dict[tuple[int, str], float]
    solve_reports: tuple[RungDiagnostics, ...]
    # rungs dropped under keep_going, grid_size -> error message
    failures: dict[int, str] = field(default_factory=dict)

    def diagnostics(self, n: int) -> RungDiagnostics:
        for d in self.solve_reports:
            if d.grid_size == n:
                return d
        raise KeyError(n)

    def series(self, probe: str, converged_only: bool = True) -> list[tuple[int, float]]:
        """``(grid_size, value)`` pairs for one probe, ascending in grid size."""
        out = []
        for n in self.grid_sizes:
            if converged_only and not self.diagnostics(n).converged:
                continue
            out.append((n, self.samples[(n, probe)]))
        return out

    @property
    def unconverged(self) -> list[int]:
        return [d.grid_size for d in self.solve_reports if not d.converged]


def _locate(fraction: float, n: int) -> tuple[int, float] | int:
    pos = fraction * n
    nearest = round(pos)
    if abs(pos - nearest) <= _ON_NODE_TOL:
        return int(nearest)
    i0 = min(int(math.floor(pos)), n - 1)
    return i0, pos - i0


def probe_value(field: ScalarField, probe: ProbeSpec) -> float:
    """Node value when the probe sits on a node, else bilinear interpolation."""
    n = field.grid.n
    v = field.values
    lx = _locate(probe.x_fraction, n)
    ly = _locate(probe.y_fraction, n)
    if isinstance(lx, int) and isinstance(ly, int):
        return float(v[lx, ly])
    i0, tx = (lx, 0.0) if isinstance(lx, int) else lx
    j0, ty = (ly, 0.0) if isinstance(ly, int) else ly
    i1 = min(i0 + 1, n)
    j1 = min(j0 + 1, n)
    return float(
        (1 - tx) * (1 - ty) * v[i0, j0]
        + tx * (1 - ty) * v[i1, j0]
        + (1 - tx) * ty * v[i0, j1]
        + tx * ty * v[i1, j1]
    )


def default_ladder(n_min: int, n_max: int) -> list[int]:
    """Even grid sizes doubling from ``n_min``, capped by ``n_max``.

    >>> default_ladder(8, 100)
    [8, 16, 32, 64, 100]
    """
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got ({n_min}, {n_max})")
    start = n_min + (n_min % 2)
    cap = n_max - (n_max % 2)
    if start > cap:
        raise ValueError(f"no even grid size in [{n_min}, {n_max}]")
    sizes = []
    n = start
    while n <= cap:
        sizes.append(n)
        n *= 2
    if sizes[-1] != cap:
        sizes.append(cap)
    return sizes


def _solve_rung(scenario: ProblemSpec, n: int, config: SolverConfig) -> SolveReport:
    return solve(scenario.with_cells(n), config)


def run_study(
    scenario: ProblemSpec,
    grid_sizes: Sequence[int],
    probes: Sequence[ProbeSpec] = (CENTER,),
    config: SolverConfig | None = None,
    keep_going: bool = False,
    max_workers: int = 1,
) -> StudyResult:
    """Solve ``scenario`` at each grid size and record probe values.

    Rungs that hit ``max_iterations`` are kept but marked unconverged. A
    diverging rung raises :class:`StudyError` unless ``keep_going`` is set,
    in which case it is listed in ``failures`` and left out.
    """
    sizes = [int(n) for n in grid_sizes]
    if not sizes:
        raise ValueError("grid_sizes is empty")
    if any(n < 2 for n in sizes):
        raise ValueError("every grid size must be >= 2")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("grid_sizes must be strictly ascending")
    probes = tuple(probes)
    if len({p.name for p in probes}) != len(probes):
        raise ValueError("probe names must be unique")
    config = config or SolverConfig()

    def run(n):
        try:
            return _solve_rung(scenario, n, config)
        except DivergenceError as exc:
            return exc

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(run, sizes))
    else:
        outcomes = [run(n) for n in sizes]

    kept, samples, diags, failures = [], {}, [], {}
    for n, outcome in zip(sizes, outcomes):
        if isinstance(outcome, Exception):
            if not keep_going:
                raise StudyError(n, outcome) from outcome
            log.warning("dropping rung n=%d: %s", n, outcome)
            failures[n] = str(outcome)
            continue
        if not outcome.converged:
            log.warning("rung n=%d did not converge (residual %.3e)", n, outcome.final_residual)
        kept.append(n)
        diags.append(RungDiagnostics(n, outcome.iterations, outcome.final_residual, outcome.converged))
        for p in probes:
            samples[(n, p.name)] = probe_value(outcome.field, p)

    return StudyResult(
        scenario=scenario,
        grid_sizes=tuple(kept),
        probes=probes,
        samples=samples,
        solve_reports=tuple(diags),
        failures=failures,
    )
