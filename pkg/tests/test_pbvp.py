"""Periodic traveling-wave BVP: speed, profile, copies, equilibration."""

import numpy as np
import pytest

from kinklab import pbvp
from kinklab.front import compute_speed
from kinklab.nonlinearity import make_nonlinearity

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def nl():
    return make_nonlinearity(0.2)


@pytest.fixture(scope="module")
def sol41(nl):
    return pbvp.solve_speed(nl, 4.0, 1)


@pytest.fixture(scope="module")
def washout12(nl):
    # gaps 8, 10, 6 on a circumference-24 circle
    return pbvp.washout_experiment(nl, 12.0, [-8.0, 0.0, 10.0], t_end=1500.0)


# --- fixed-a Dirichlet solve ----------------------------------------------


def test_fixed_a_interior_residual(nl):
    """The discrete TWE residual is tiny at every interior node."""
    z, u = pbvp.solve_fixed_a(nl, 4.0, 1, 0.05)
    h = z[1] - z[0]
    res = (
        (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        + 0.05 * (u[2:] - u[:-2]) / (2 * h)
        + nl.f(u[1:-1])
    )
    assert np.abs(res).max() < 1e-8


def test_fixed_a_boundary_values_exact(nl):
    z, u = pbvp.solve_fixed_a(nl, 4.0, 1, 0.05)
    assert u[0] == TWO_PI
    assert u[-1] == 0.0


def test_fixed_a_profile_monotone(nl):
    z, u = pbvp.solve_fixed_a(nl, 4.0, 1, 0.05)
    assert np.all(np.diff(u) < 0)


def test_fixed_a_monotone_in_damping(nl):
    """Raising a lowers the profile at every interior node."""
    _, u_lo = pbvp.solve_fixed_a(nl, 4.0, 1, 0.05)
    _, u_hi = pbvp.solve_fixed_a(nl, 4.0, 1, 0.15)
    assert np.all(u_hi[1:-1] < u_lo[1:-1])


def test_fixed_a_small_domain(nl):
    """A short interval (fine absolute mesh) still converges."""
    z, u = pbvp.solve_fixed_a(nl, 0.5, 1, 0.0)
    assert np.all(np.diff(u) < 0)
    assert u[0] == TWO_PI


# --- speed root-find -------------------------------------------------------


def test_speed_positive_below_front_speed(nl, sol41):
    c = compute_speed(nl)
    assert 0.0 < sol41.a < c


def test_speed_value_stable(sol41):
    assert abs(sol41.a - 0.1559825274) < 1e-8


def test_end_slopes_match(sol41):
    left, right = sol41.end_derivatives()
    assert left < 0 and right < 0
    assert abs(left - right) < 1e-6


def test_energy_identity(nl):
    """a * int (u')^2 equals the potential drop across the winding."""
    sol = pbvp.solve_speed(nl, 4.0, 1, h=0.002)
    assert sol.energy_residual(nl) <= 1e-6


def test_cauchy_schwarz_upper_bound(nl, sol41):
    assert sol41.a <= 0.2 * 4.0 / np.pi * (1.0 + 1e-9)


def test_speed_increases_with_length(nl, sol41):
    a_half = pbvp.solve_speed(nl, 0.5, 1).a
    a_one = pbvp.solve_speed(nl, 1.0, 1).a
    a_two = pbvp.solve_speed(nl, 2.0, 1).a
    assert 0.0 < a_half < a_one < a_two < sol41.a


def test_speed_grid_convergence_second_order(nl):
    a = {h: pbvp.solve_speed(nl, 4.0, 1, h=h).a for h in (0.032, 0.016, 0.008)}
    ratio = (a[0.032] - a[0.016]) / (a[0.016] - a[0.008])
    assert 3.5 < ratio < 4.5


def test_speed_bad_bracket_raises(nl):
    with pytest.raises(RuntimeError, match="sign change"):
        pbvp.solve_speed(nl, 4.0, 1, bracket=(0.3, 0.4))


# --- copy structure --------------------------------------------------------


def test_copy_structure_self(nl, sol41):
    """j = 1 compares the solution against itself."""
    rep = pbvp.verify_copy_structure(sol41, nl)
    assert rep.a_full == rep.a_unit
    assert rep.max_deviation == 0.0


def test_copy_structure_two_windings(nl):
    """The (8, 2) solution is two stacked copies of the (4, 1) one."""
    sol = pbvp.solve_speed(nl, 8.0, 2, h=0.008)
    rep = pbvp.verify_copy_structure(sol, nl)
    assert abs(rep.a_full - rep.a_unit) < 1e-6
    assert rep.max_deviation < 1e-5
    assert rep.end_derivative_gap < 1e-6


def test_copy_structure_tiling_exact_on_matched_mesh(nl):
    """On meshes sharing nodes the tiled profile matches to rounding."""
    sol = pbvp.solve_speed(nl, 8.0, 2, h=0.008)
    rep = pbvp.verify_copy_structure(sol, nl)
    assert abs(rep.a_full - rep.a_unit) < 1e-12
    assert rep.max_deviation < 1e-10


# --- washing out -----------------------------------------------------------


def test_washout_needs_two_kinks(nl):
    with pytest.raises(ValueError, match="two kinks"):
        pbvp.washout_experiment(nl, 12.0, [0.0], t_end=1.0)


def test_washout_equidistant_stays_equidistant(nl):
    res = pbvp.washout_experiment(nl, 15.0, [-10.0, 0.0, 10.0], t_end=50.0)
    assert np.nanmax(res.variances) <= 1e-6


def test_washout_variance_collapses(washout12):
    v = washout12.variances
    assert not np.any(np.isnan(v))
    assert v[-1] < 0.01 * washout12.initial_variance


def test_washout_monotone_after_transient(washout12):
    v = washout12.variances
    tail = v[len(v) // 4 :]
    assert np.all(np.diff(tail) <= 0)


def test_washout_drift_matches_bvp_speed(nl, washout12):
    """The train's drift equals the BVP eigenvalue of one mean cell."""
    a_cell = pbvp.solve_speed(nl, 4.0, 1, h=0.008).a
    assert abs(washout12.drift_speed - a_cell) < 1e-3
    c = compute_speed(nl)
    assert washout12.drift_speed < c
    assert np.sign(washout12.drift_speed - c) == np.sign(a_cell - c)
