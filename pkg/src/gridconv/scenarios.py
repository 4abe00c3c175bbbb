"""Built-in conduction scenarios on a square plate.

``source``
    All edges held at 0, uniform heating (``S = -2`` on the unit square).
``saddle``
    Left/right edges at 100, front/back at 0, no source.
``linear_adiabatic``
    Front at 100, back at 0, left/right adiabatic, no source.
``adiabatic_front``
    Left/right/front adiabatic, back at 0, no source. With the default zero
    flux the answer is uniformly 0; a non-zero ``front_flux`` makes it linear.
"""

from __future__ import annotations

from .grid import GridSpec, ProblemSpec, dirichlet, neumann
from .study import CENTER, ProbeSpec

__all__ = [
    "SCENARIOS",
    "STREAMWISE_PROBES",
    "source_problem",
    "saddle_problem",
    "linear_problem",
    "adiabatic_front_problem",
    "default_probes",
]

STREAMWISE_PROBES = (
    ProbeSpec("y0.25", 0.5, 0.25),
    ProbeSpec("y0.50", 0.5, 0.5),
    ProbeSpec("y0.75", 0.5, 0.75),
)


def source_problem(n: int = 16, length: float = 1.0, source: float = -2.0) -> ProblemSpec:
    return ProblemSpec(
        GridSpec(n, length, length),
        dirichlet(0.0), dirichlet(0.0), dirichlet(0.0), dirichlet(0.0),
        source=source,
    )


def saddle_problem(n: int = 16, length: float = 1.0, side_temperature: float = 100.0) -> ProblemSpec:
    return ProblemSpec(
        GridSpec(n, length, length),
        left=dirichlet(side_temperature),
        right=dirichlet(side_temperature),
        front=dirichlet(0.0),
        back=dirichlet(0.0),
    )


def linear_problem(
    n: int = 16, length: float = 1.0, front_temperature: float = 100.0, back_temperature: float = 0.0
) -> ProblemSpec:
    return ProblemSpec(
        GridSpec(n, length, length),
        left=neumann(0.0),
        right=neumann(0.0),
        front=dirichlet(front_temperature),
        back=dirichlet(back_temperature),
    )


def adiabatic_front_problem(
    n: int = 16, length: float = 1.0, back_temperature: float = 0.0, front_flux: float = 0.0
) -> ProblemSpec:
    return ProblemSpec(
        GridSpec(n, length, length),
        left=neumann(0.0),
        right=neumann(0.0),
        front=neumann(front_flux),
        back=dirichlet(back_temperature),
    )


SCENARIOS = {
    "source": source_problem,
    "saddle": saddle_problem,
    "linear_adiabatic": linear_problem,
    "adiabatic_front": adiabatic_front_problem,
}


def default_probes(kind: str) -> tuple[ProbeSpec, ...]:
    if kind in ("linear_adiabatic", "adiabatic_front"):
        return STREAMWISE_PROBES
    return (CENTER,)
