"""Inverse-polynomial convergence law and grid-independence analysis.

A probe value sampled on grids of ``x`` cells per side is modelled as

    y(x) = a0 + a1/x + a2/x**2 + ... + ad/x**d

so ``a0`` is the value the sequence tends to as the grid is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UnderdeterminedFitError

__all__ = [
    "DEFAULT_DEGREE",
    "DEFAULT_STAGE_THRESHOLD",
    "FitModel",
    "ConvergenceReport",
    "fit_inverse_polynomial",
    "evaluate_fit",
    "grid_independent_value",
    "truncation_errors",
    "detect_stage_boundary",
    "analyse",
]

DEFAULT_DEGREE = 3
DEFAULT_STAGE_THRESHOLD = 1e-3
_FLOOR = 1e-30


@dataclass(frozen=True)
class FitModel:
    degree: int
    coefficients: tuple[float, ...]
    residual_rms: float

    def __post_init__(self):
        if len(self.coefficients) != self.degree + 1:
            raise ValueError("coefficients length must be degree + 1")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("non-finite coefficient")

    def __call__(self, x):
        return evaluate_fit(self, x)


@dataclass(frozen=True)
class ConvergenceReport:
    model: FitModel
    grid_independent_value: float
    grid_sizes: tuple[int, ...]
    samples: tuple[float, ...]
    truncation_errors: tuple[float, ...]
    stage_boundary: int | None
    threshold_used: float


def fit_inverse_polynomial(samples: Sequence[tuple[float, float]], degree: int = DEFAULT_DEGREE) -> FitModel:
    """Least-squares fit of ``y = sum_i a_i / x**i`` for ``i = 0..degree``.

    The basis is evaluated in ``u = x_min / x`` and its columns are scaled
    to unit norm before an SVD-based solve, which keeps the small Vandermonde
    system well conditioned; coefficients are mapped back afterwards.
    """
    if degree < 0 or int(degree) != degree:
        raise ValueError(f"degree must be a non-negative integer, got {degree!r}")
    degree = int(degree)
    xs = np.array([float(x) for x, _ in samples])
    ys = np.array([float(y) for _, y in samples])
    if xs.size and np.any(xs < 1):
        raise ValueError("grid sizes must be >= 1")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("samples must be finite")
    if np.unique(xs).size < degree + 1:
        raise UnderdeterminedFitError(
            f"degree {degree} fit needs {degree + 1} distinct grid sizes, got {np.unique(xs).size}"
        )

    x_ref = xs.min()
    u = x_ref / xs
    basis = u[:, None] ** np.arange(degree + 1)[None, :]
    norms = np.linalg.norm(basis, axis=0)
    # the basis holds the constant column, so fitting about the mean is exact
    # and makes constant data come out with exactly zero higher coefficients
    mean = float(np.mean(ys))
    centred = ys - mean
    b, *_ = np.linalg.lstsq(basis / norms, centred, rcond=None)
    b = b / norms
    # one step of iterative refinement against the unscaled basis
    db, *_ = np.linalg.lstsq(basis / norms, centred - basis @ b, rcond=None)
    b = b + db / norms
    b[0] += mean

    coeffs = tuple(float(bi * x_ref**i) for i, bi in enumerate(b))
    resid = ys - basis @ b
    rms = float(np.sqrt(np.mean(resid**2)))
    return FitModel(degree, coeffs, rms)


def evaluate_fit(model: FitModel, x):
    """Value of the fitted law at ``x`` cells per side (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 1):
        raise ValueError("x must be >= 1")
    inv = 1.0 / x_arr
    # Horner in 1/x
    total = np.zeros_like(x_arr)
    for c in reversed(model.coefficients):
        total = total * inv + c
    return float(total) if total.ndim == 0 else total


def grid_independent_value(model: FitModel) -> float:
    return model.coefficients[0]


def truncation_errors(a: float, samples: Sequence[tuple[float, float]]) -> list[float]:
    return [a - y for _, y in samples]


def detect_stage_boundary(
    samples: Sequence[tuple[float, float]], relative_threshold: float = DEFAULT_STAGE_THRESHOLD
) -> int | float | None:
    """First sampled grid size after which every step changes by at most the threshold.

    A step ``x_k -> x_{k+1}`` counts as flat when
    ``|y_{k+1} - y_k| / max(|y_{k+1}|, 1e-30) <= relative_threshold``.
    Returns None when even the last step is not flat.
    """
    if len(samples) < 2:
        raise ValueError("stage detection needs at least 2 samples")
    if not relative_threshold > 0:
        raise ValueError("relative_threshold must be > 0")
    xs = [x for x, _ in samples]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("samples must have strictly ascending grid sizes")

    boundary = None
    for k in range(len(samples) - 2, -1, -1):
        y0, y1 = samples[k][1], samples[k + 1][1]
        if abs(y1 - y0) / max(abs(y1), _FLOOR) > relative_threshold:
            break
        boundary = samples[k][0]
    if boundary is None:
        return None
    return int(boundary) if float(boundary).is_integer() else boundary


def analyse(
    samples: Sequence[tuple[float, float]],
    degree: int = DEFAULT_DEGREE,
    relative_threshold: float = DEFAULT_STAGE_THRESHOLD,
) -> ConvergenceReport:
    """Fit, extrapolate and locate the flat stage for one probe's samples."""
    samples = sorted(samples)
    model = fit_inverse_polynomial(samples, degree)
    a0 = grid_independent_value(model)
    boundary = detect_stage_boundary(samples, relative_threshold) if len(samples) >= 2 else None
    return ConvergenceReport(
        model=model,
        grid_independent_value=a0,
        grid_sizes=tuple(int(x) for x, _ in samples),
        samples=tuple(float(y) for _, y in samples),
        truncation_errors=tuple(truncation_errors(a0, samples)),
        stage_boundary=boundary,
        threshold_used=relative_threshold,
    )
