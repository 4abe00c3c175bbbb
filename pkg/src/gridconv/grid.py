"""Cartesian node lattice, boundary conditions and field storage.

The lattice is node-centred: ``n`` intervals per axis give ``(n + 1)**2``
nodes, boundary nodes included. Index ``(i, j)`` is ``(x-node, y-node)``.
Edges are named ``left`` (x = 0), ``right`` (x = Lx), ``front`` (y = 0)
and ``back`` (y = Ly).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EDGES",
    "BoundaryKind",
    "EdgeCondition",
    "GridSpec",
    "ProblemSpec",
    "ScalarField",
    "dirichlet",
    "neumann",
    "make_field",
    "node_coordinates",
]

EDGES = ("left", "right", "front", "back")


class BoundaryKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class EdgeCondition:
    """Boundary condition on one edge.

    For Dirichlet edges ``value`` is the temperature; for Neumann edges it
    is the outward normal derivative of temperature (0 is adiabatic).
    """

    kind: BoundaryKind
    value: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundaryKind(self.kind))
        if not math.isfinite(self.value):
            raise ValueError(f"edge value must be finite, got {self.value!r}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind is BoundaryKind.DIRICHLET


def dirichlet(value: float) -> EdgeCondition:
    return EdgeCondition(BoundaryKind.DIRICHLET, value)


def neumann(value: float = 0.0) -> EdgeCondition:
    return EdgeCondition(BoundaryKind.NEUMANN, value)


@dataclass(frozen=True)
class GridSpec:
    cells_per_side: int
    domain_length_x: float = 1.0
    domain_length_y: float = 1.0

    def __post_init__(self):
        if isinstance(self.cells_per_side, bool) or int(self.cells_per_side) != self.cells_per_side:
            raise ValueError(f"cells_per_side must be an integer, got {self.cells_per_side!r}")
        object.__setattr__(self, "cells_per_side", int(self.cells_per_side))
        if self.cells_per_side < 2:
            raise ValueError(f"cells_per_side must be >= 2, got {self.cells_per_side}")
        for name in ("domain_length_x", "domain_length_y"):
            length = getattr(self, name)
            if not (math.isfinite(length) and length > 0):
                raise ValueError(f"{name} must be positive and finite, got {length!r}")

    @property
    def n(self) -> int:
        return self.cells_per_side

    @property
    def dx(self) -> float:
        return self.domain_length_x / self.cells_per_side

    @property
    def dy(self) -> float:
        return self.domain_length_y / self.cells_per_side

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cells_per_side + 1, self.cells_per_side + 1)


@dataclass(frozen=True)
class ProblemSpec:
    """Steady conduction problem ``t_xx + t_yy = source`` on a rectangle.

    ``source`` keeps the sign of the equation as written, so a heated
    interior (temperature peaking in the middle) needs ``source < 0``.
    """

    grid: GridSpec
    left: EdgeCondition
    right: EdgeCondition
    front: EdgeCondition
    back: EdgeCondition
    source: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.source):
            raise ValueError(f"source must be finite, got {self.source!r}")
        if not any(self.edge(name).is_dirichlet for name in EDGES):
            raise ValueError(
                "at least one edge must be Dirichlet; an all-Neumann problem "
                "has no unique solution"
            )

    def edge(self, name: str) -> EdgeCondition:
        if name not in EDGES:
            raise KeyError(name)
        return getattr(self, name)

    def with_grid(self, grid: GridSpec) -> "ProblemSpec":
        return ProblemSpec(grid, self.left, self.right, self.front, self.back, self.source)

    def with_cells(self, n: int) -> "ProblemSpec":
        """Same problem on an ``n`` x ``n`` lattice over the same domain."""
        g = self.grid
        return self.with_grid(GridSpec(n, g.domain_length_x, g.domain_length_y))

    def dirichlet_mask(self) -> np.ndarray:
        """Boolean (n+1, n+1) array, True on nodes fixed by a Dirichlet edge."""
        mask = np.zeros(self.grid.shape, dtype=bool)
        if self.left.is_dirichlet:
            mask[0, :] = True
        if self.right.is_dirichlet:
            mask[-1, :] = True
        if self.front.is_dirichlet:
            mask[:, 0] = True
        if self.back.is_dirichlet:
            mask[:, -1] = True
        return mask

    def unknown_ranges(self) -> tuple[slice, slice]:
        """Index slices (along x, along y) covering the unknown nodes.

        Dirichlet edges are whole lattice lines, so the unknowns always form
        a tensor-product block.
        """
        n = self.grid.n
        xs = slice(1 if self.left.is_dirichlet else 0, n if self.right.is_dirichlet else n + 1)
        ys = slice(1 if self.front.is_dirichlet else 0, n if self.back.is_dirichlet else n + 1)
        return xs, ys


@dataclass
class ScalarField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    def __getitem__(self, index):
        return self.values[index]

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def center(self) -> float:
        n = self.grid.n
        if n % 2:
            raise ValueError(f"no centre node on an odd grid (n={n})")
        return float(self.values[n // 2, n // 2])


def make_field(problem: ProblemSpec, fill: float = 0.0) -> ScalarField:
    """Field filled with ``fill``, Dirichlet edges set to their values.

    Edges are written in reverse of (left, right, front, back) so a corner
    ends up holding the value of the first Dirichlet edge in that order.
    """
    values = np.full(problem.grid.shape, float(fill))
    for name in reversed(EDGES):
        cond = problem.edge(name)
        if not cond.is_dirichlet:
            continue
        if name == "left":
            values[0, :] = cond.value
        elif name == "right":
            values[-1, :] = cond.value
        elif name == "front":
            values[:, 0] = cond.value
        else:
            values[:, -1] = cond.value
    return ScalarField(problem.grid, values)


def node_coordinates(grid: GridSpec, i: int, j: int) -> tuple[float, float]:
    n = grid.n
    if not (0 <= i <= n and 0 <= j <= n):
        raise IndexError(f"node ({i}, {j}) outside 0..{n}")
    x = grid.domain_length_x if i == n else i * grid.dx
    y = grid.domain_length_y if j == n else j * grid.dy
    return x, y
