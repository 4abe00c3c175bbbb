import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridconv.afi_solver import SolverConfig
from gridconv.errors import StudyError
from gridconv.grid import GridSpec, ScalarField, node_coordinates
from gridconv.oracle import linear_profile, poisson_square_series
from gridconv.scenarios import STREAMWISE_PROBES, linear_problem, saddle_problem, source_problem
from gridconv.study import CENTER, ProbeSpec, default_ladder, probe_value, run_study


def field_from(n, fn):
    g = GridSpec(n)
    v = np.array([[fn(*node_coordinates(g, i, j)) for j in range(n + 1)] for i in range(n + 1)])
    return ScalarField(g, v)


# -- probes ------------------------------------------------------------------

def test_probe_spec_rejects_out_of_range():
    with pytest.raises(ValueError):
        ProbeSpec("p", 1.2, 0.5)
    with pytest.raises(ValueError):
        ProbeSpec("p", 0.5, -0.1)


@given(n=st.integers(1, 40).map(lambda k: 2 * k), seed=st.integers(0, 2**32 - 1))
def test_center_probe_is_bit_identical_to_node(n, seed):
    v = np.random.default_rng(seed).normal(size=(n + 1, n + 1))
    f = ScalarField(GridSpec(n), v)
    assert probe_value(f, CENTER) == v[n // 2, n // 2]


def test_edge_midpoint_on_coarsest_grid():
    v = np.arange(9.0).reshape(3, 3) ** 2
    f = ScalarField(GridSpec(2), v)
    assert probe_value(f, ProbeSpec("q", 0.25, 0.5)) == pytest.approx((v[0, 1] + v[1, 1]) / 2, abs=1e-15)


@pytest.mark.parametrize("n", [3, 7, 10])
def test_bilinear_reproduces_affine(n):
    f = field_from(n, lambda x, y: 1.5 - 2.0 * x + 0.75 * y)
    assert probe_value(f, ProbeSpec("q", 0.3, 0.7)) == pytest.approx(1.5 - 0.6 + 0.525, abs=1e-13)


@pytest.mark.parametrize("frac", [0.0, 1.0])
def test_probe_on_domain_edge(frac):
    f = field_from(5, lambda x, y: x + 10 * y)
    assert probe_value(f, ProbeSpec("e", frac, frac)) == pytest.approx(11 * frac, abs=1e-14)


# -- ladder ------------------------------------------------------------------

@pytest.mark.parametrize(
    "args, expected",
    [((8, 128), [8, 16, 32, 64, 128]), ((8, 100), [8, 16, 32, 64, 100]), ((16, 16), [16]), ((7, 33), [8, 16, 32])],
)
def test_default_ladder(args, expected):
    assert default_ladder(*args) == expected


@pytest.mark.parametrize("args", [(1, 8), (16, 8), (3, 3)])
def test_default_ladder_rejects(args):
    with pytest.raises(ValueError):
        default_ladder(*args)


# -- run_study ---------------------------------------------------------------

def test_sample_table_is_complete():
    probes = (CENTER, ProbeSpec("off", 0.3, 0.6))
    res = run_study(source_problem(), [4, 8, 16], probes)
    assert res.grid_sizes == (4, 8, 16)
    assert len(res.samples) == 3 * 2
    assert all(np.isfinite(v) for v in res.samples.values())
    assert [d.grid_size for d in res.solve_reports] == [4, 8, 16]
    assert res.unconverged == []


def test_study_is_deterministic():
    a = run_study(source_problem(), [8, 16, 32])
    b = run_study(source_problem(), [8, 16, 32])
    assert a == b


def test_parallel_matches_serial():
    serial = run_study(saddle_problem(), [8, 16, 32])
    parallel = run_study(saddle_problem(), [8, 16, 32], max_workers=3)
    assert serial == parallel


def test_linear_profile_identical_on_coarse_and_fine():
    res = run_study(linear_problem(), [20, 140], STREAMWISE_PROBES)
    for p in STREAMWISE_PROBES:
        coarse, fine = res.samples[(20, p.name)], res.samples[(140, p.name)]
        assert abs(coarse - fine) <= 1e-8
        assert coarse == pytest.approx(linear_profile(p.y_fraction, 100.0, 0.0), abs=1e-8)


def test_saddle_center_is_fifty_everywhere():
    res = run_study(saddle_problem(), [2, 6, 10, 24])
    assert all(abs(v - 50.0) <= 1e-6 for v in res.samples.values())


def test_source_center_increases_towards_series_value():
    res = run_study(source_problem(), [8, 16, 32, 64, 128])
    vals = [v for _, v in res.series("center")]
    exact = poisson_square_series(0.5, 0.5, 2.0)
    # S = -2 heats the plate; the five-point centre value approaches from below
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert all(v < exact for v in vals)


def test_unconverged_rungs_are_flagged_and_excluded():
    # n = 4 needs 12 iterations, n = 32 well over 20
    res = run_study(source_problem(), [4, 32], config=SolverConfig(max_iterations=20))
    assert res.unconverged == [32]
    assert not res.diagnostics(32).converged
    assert (32, "center") in res.samples
    assert [n for n, _ in res.series("center")] == [4]
    assert [n for n, _ in res.series("center", converged_only=False)] == [4, 32]


def diverging():
    return SolverConfig(alpha_min=1e10, alpha_max=1e10, alpha_cycle_length=1)


def test_divergence_names_the_rung():
    p = source_problem(source=-1e300)
    with pytest.raises(StudyError) as info:
        run_study(p, [4, 8], config=diverging())
    assert info.value.grid_size == 4


def test_keep_going_drops_failed_rungs():
    p = source_problem(source=-1e300)
    res = run_study(p, [4, 8], config=diverging(), keep_going=True)
    assert res.grid_sizes == ()
    assert set(res.failures) == {4, 8}


@pytest.mark.parametrize("sizes", [[], [1, 4], [8, 4], [4, 4]])
def test_run_study_rejects_bad_sizes(sizes):
    with pytest.raises(ValueError):
        run_study(source_problem(), sizes)


def test_run_study_rejects_duplicate_probe_names():
    with pytest.raises(ValueError):
        run_study(source_problem(), [4], [CENTER, ProbeSpec("center", 0.1, 0.1)])
