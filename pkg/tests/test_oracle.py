import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridconv.afi_solver import solve
from gridconv.errors import NonConvergenceError
from gridconv.grid import GridSpec, ProblemSpec, dirichlet
from gridconv.oracle import (
    SeriesConfig,
    laplace_saddle_series,
    linear_profile,
    poisson_square_series,
    relaxation_solve,
    relaxation_sweeps,
)
from gridconv.scenarios import linear_problem, saddle_problem, source_problem

# -- brute-force double sine series, truncated square of modes ---------------

def double_sine_series(x, y, q, L=1.0, terms=400):
    m = np.arange(1, 2 * terms, 2)[:, None]
    n = np.arange(1, 2 * terms, 2)[None, :]
    s = np.sin(m * np.pi * x / L) * np.sin(n * np.pi * y / L) / (m * n * (m**2 + n**2))
    return 16 * q * L**2 / np.pi**4 * s.sum()


def double_saddle_series(x, y, T, terms=100):
    # one hot edge at x = 0 plus its mirror at x = 1; 100 odd modes keep sinh finite
    n = np.arange(1, 2 * terms, 2)
    hot = (np.sinh(n * np.pi * (1 - x)) + np.sinh(n * np.pi * x)) / np.sinh(n * np.pi)
    return float(np.sum(4 * T / (n * np.pi) * np.sin(n * np.pi * y) * hot))


@pytest.mark.parametrize("x, y", [(0.5, 0.5), (0.3, 0.7), (0.1, 0.2), (0.8, 0.45)])
def test_poisson_series_matches_brute_double_sum(x, y):
    # brute sum is truncated at 400 x 400 modes; its own tail is ~1e-9
    assert poisson_square_series(x, y, 2.0) == pytest.approx(double_sine_series(x, y, 2.0), abs=5e-9)


def test_poisson_series_center_reproduces_published_value():
    c = poisson_square_series(0.5, 0.5, q=2.0)
    # published grid-independent value, quoted to 6 decimals
    assert abs(c - 0.147343) < 5e-7
    # independent literature value of the unit-square torsion-type centre, 0.0736713532814
    assert c == pytest.approx(2 * 0.0736713532814, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.13, 0.5, 0.77, 1.0])
def test_poisson_series_vanishes_on_boundary(t):
    for x, y in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)]:
        assert abs(poisson_square_series(x, y, 2.0)) <= 1e-12


@given(
    x=st.floats(0, 1), y=st.floats(0, 1), q=st.floats(0.01, 100), L=st.sampled_from([0.5, 1.0, 3.0])
)
def test_poisson_series_linear_in_q(x, y, q, L):
    a = poisson_square_series(x * L, y * L, q, L)
    b = poisson_square_series(x * L, y * L, 2 * q, L)
    # truncation is absolute, so q and 2q may stop at different mode counts
    tol = SeriesConfig().truncation_tolerance
    assert b == pytest.approx(2 * a, rel=1e-12, abs=3 * tol)


def test_poisson_series_half_source_halves_center():
    assert poisson_square_series(0.5, 0.5, 1.0) == pytest.approx(poisson_square_series(0.5, 0.5, 2.0) / 2, rel=1e-15)


def test_poisson_series_scales_with_L_squared():
    assert poisson_square_series(1.0, 1.0, 2.0, L=2.0) == pytest.approx(4 * poisson_square_series(0.5, 0.5, 2.0), abs=2e-12)


@settings(max_examples=50)
@given(x=st.floats(0.02, 0.98), y=st.floats(0.02, 0.98))
def test_series_tail_bound(x, y):
    cfg = SeriesConfig()
    wide = SeriesConfig(max_terms=2 * cfg.max_terms)
    assert abs(poisson_square_series(x, y, 2.0, cfg=cfg) - poisson_square_series(x, y, 2.0, cfg=wide)) < cfg.truncation_tolerance
    assert abs(laplace_saddle_series(x, y, 100.0, cfg=cfg) - laplace_saddle_series(x, y, 100.0, cfg=wide)) < 100 * cfg.truncation_tolerance


def test_saddle_series_center_is_half():
    assert laplace_saddle_series(0.5, 0.5, 100.0) == pytest.approx(50.0, abs=1e-11)
    assert laplace_saddle_series(1.5, 1.5, 30.0, L=3.0) == pytest.approx(15.0, abs=1e-11)


@pytest.mark.parametrize("x, y", [(0.2, 0.5), (0.5, 0.3), (0.6, 0.65)])
def test_saddle_series_matches_sinh_form(x, y):
    assert laplace_saddle_series(x, y, 100.0) == pytest.approx(double_saddle_series(x, y, 100.0), abs=1e-9)


def test_saddle_series_edges():
    assert laplace_saddle_series(0.0, 0.4, 100.0) == 100.0
    assert laplace_saddle_series(1.0, 0.4, 100.0) == 100.0
    assert abs(laplace_saddle_series(0.4, 0.0, 100.0)) < 1e-12
    assert abs(laplace_saddle_series(0.4, 1.0, 100.0)) < 1e-12


@pytest.mark.parametrize("x, y", [(0.05, 0.05), (0.95, 0.02), (0.03, 0.97), (0.99, 0.99)])
def test_saddle_series_near_corners_within_bounds(x, y):
    v = laplace_saddle_series(x, y, 100.0)
    assert 0.0 < v < 100.0


@given(x=st.floats(0.5, 1), y=st.floats(0, 1))
def test_saddle_series_left_right_symmetry(x, y):
    # 1 - x is exact for x in [0.5, 1], so the mirrored inputs are true mirrors
    assert laplace_saddle_series(x, y, 100.0) == pytest.approx(laplace_saddle_series(1.0 - x, y, 100.0), abs=1e-12)


@given(x=st.floats(0.5, 1), y=st.floats(0, 1))
def test_poisson_series_left_right_symmetry(x, y):
    assert poisson_square_series(x, y, 2.0) == pytest.approx(poisson_square_series(1.0 - x, y, 2.0), abs=1e-14)


def test_linear_profile():
    assert linear_profile(0.0, 100.0, 0.0) == 100.0
    assert linear_profile(0.5, 100.0, 0.0) == 50.0
    assert linear_profile(1.0, 100.0, 0.0) == 0.0
    assert linear_profile(2.0, 10.0, 30.0, L=4.0) == 20.0


# -- relaxation solver -------------------------------------------------------

def test_relaxation_zero_problem():
    p = ProblemSpec(GridSpec(8), dirichlet(0), dirichlet(0), dirichlet(0), dirichlet(0))
    f, sweeps = relaxation_sweeps(p)
    assert sweeps == 0 and np.all(f.values == 0.0)


def test_relaxation_single_unknown():
    f = relaxation_solve(source_problem(2))
    assert f.values[1, 1] == pytest.approx(0.125, abs=1e-15)


def test_relaxation_non_convergence():
    with pytest.raises(NonConvergenceError):
        relaxation_solve(source_problem(16), max_iterations=5)


@pytest.mark.parametrize("make", [source_problem, saddle_problem, linear_problem])
@pytest.mark.parametrize("n", [8, 16, 32])
def test_relaxation_agrees_with_afi(make, n):
    p = make(n)
    ref = relaxation_solve(p, tolerance=1e-10)
    afi = solve(p).field
    assert np.max(np.abs(ref.values - afi.values)) <= (1e-10 + 1e-10) * 10


def test_discrete_center_converges_at_second_order():
    exact = poisson_square_series(0.5, 0.5, 2.0)
    errs = [abs(solve(source_problem(n)).field.center() - exact) for n in (16, 32, 64)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.7 <= r <= 4.3 for r in ratios), ratios


def test_afi_needs_fewer_iterations_than_relaxation():
    p = source_problem(32)
    _, sweeps = relaxation_sweeps(p, tolerance=1e-10)
    assert solve(p).iterations < sweeps
