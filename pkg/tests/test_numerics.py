"""Root finding, orbit quadrature, ODE integration and differentiation."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mkdvwave import errors
from mkdvwave.model import ModelParams, W, W_prime, rhs_reduced, turning_points
from mkdvwave.numerics import (DEFAULT_TOL, Tolerances, derivative, find_root, integrate_ode,
                               quad_orbit)

P2 = ModelParams(2)


# -- tolerances --------------------------------------------------------------

@pytest.mark.parametrize("field", ["root_tol", "quad_rel_tol", "ode_rel_tol", "ode_abs_tol"])
def test_tolerances_must_be_positive(field):
    with pytest.raises(ValueError):
        Tolerances(**{field: 0.0})


def test_tolerances_with():
    t = DEFAULT_TOL.with_(root_tol=1e-9)
    assert t.root_tol == 1e-9 and t.quad_rel_tol == DEFAULT_TOL.quad_rel_tol


# -- find_root ---------------------------------------------------------------

def test_root_sqrt2():
    assert find_root(lambda x: x * x - 2, 1.0, 2.0) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_root_of_potential_level():
    p = ModelParams(1)
    assert find_root(lambda u: W(p, u) - 1 / 3, 0.5, 1.5) == pytest.approx(1.0, abs=1e-12)


def test_root_odd_function():
    assert find_root(lambda x: x, -1.0, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_root_no_sign_change():
    with pytest.raises(errors.NoSignChange):
        find_root(lambda x: x * x + 1, -1.0, 1.0)


def test_root_max_iterations():
    tight = Tolerances(root_tol=1e-300, max_iter=10)
    with pytest.raises(errors.MaxIterations):
        find_root(lambda x: math.tan(x) - 1e3, 0.0, 1.5707, tight)


@given(st.floats(-50, 50), st.floats(0.1, 10))
def test_root_of_linear_map(r, slope):
    got = find_root(lambda x: slope * (x - r), r - 3.0, r + 7.0)
    assert got == pytest.approx(r, abs=1e-11)


# -- quad_orbit --------------------------------------------------------------

def _sep_tp():
    return turning_points(P2, 0.75, allow_separatrix=True)


def test_quad_area_at_separatrix():
    val = quad_orbit("times_sqrt", np.ones_like, _sep_tp(), P2)
    assert val == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_quad_second_moment_at_separatrix():
    val = quad_orbit("times_sqrt", lambda u: u * u, _sep_tp(), P2)
    assert val == pytest.approx(6 * math.sqrt(2) / 5, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 6])
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.99])
def test_quad_odd_moment_vanishes_for_even_n(n, frac):
    p = ModelParams(n)
    tp = turning_points(p, frac * p.d_n)
    assert abs(quad_orbit("times_sqrt", lambda u: u ** 3, tp, p)) < 1e-13


def test_quad_over_sqrt_harmonic_limit():
    # small orbits: half period -> pi for W ~ u^2/2
    tp = turning_points(P2, 1e-8)
    assert quad_orbit("over_sqrt", np.ones_like, tp, P2) == pytest.approx(math.pi, rel=1e-7)


def test_quad_vector_integrand():
    tp = turning_points(P2, 0.4)
    both = quad_orbit("times_sqrt", lambda u: np.stack([np.ones_like(u), u * u]), tp, P2)
    one = quad_orbit("times_sqrt", np.ones_like, tp, P2)
    two = quad_orbit("times_sqrt", lambda u: u * u, tp, P2)
    assert both == pytest.approx([one, two], rel=1e-14)


def test_quad_bad_weight():
    with pytest.raises(ValueError):
        quad_orbit("bogus", np.ones_like, turning_points(P2, 0.4), P2)


def test_quad_n1_area_against_scipy():
    scipy_integrate = pytest.importorskip("scipy.integrate")
    p = ModelParams(1)
    tp = turning_points(p, 0.4)
    ref, _ = scipy_integrate.quad(lambda u: math.sqrt(max(0.8 - 2 * W(p, u), 0.0)),
                                  tp.u_minus, tp.u_plus, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert quad_orbit("times_sqrt", np.ones_like, tp, p) == pytest.approx(ref, rel=1e-10)


# -- integrate_ode -------------------------------------------------------------

def test_closed_orbit_returns():
    h = 0.5
    tp = turning_points(P2, h)
    y0 = (tp.u_plus, 0.0)
    half = quad_orbit("over_sqrt", np.ones_like, tp, P2)
    tr = integrate_ode(lambda y: rhs_reduced(P2, y), y0, (0.0, 3 * half),
                       events=[(lambda y: y[1], -1, 1)])
    ev = tr.events_of(0)
    assert len(ev) == 1
    assert ev[0].t == pytest.approx(2 * half, rel=1e-9)
    assert np.allclose(ev[0].state, y0, atol=1e-8)


def test_linear_decay():
    tr = integrate_ode(lambda y: -y, [1.0], (0.0, 1.0))
    assert tr.t[-1] == 1.0
    assert tr.y[-1, 0] == pytest.approx(math.exp(-1), abs=1e-9)


def test_backward_time():
    tr = integrate_ode(lambda y: -y, [1.0], (0.0, -1.0), t_eval=np.linspace(0, -1, 5))
    assert np.all(np.diff(tr.t) > 0)
    assert tr.y[0, 0] == pytest.approx(math.e, abs=1e-9)


def test_equilibrium_constant():
    tr = integrate_ode(lambda y: rhs_reduced(P2, y), (0.0, 0.0), (0.0, 10.0))
    assert np.all(tr.y == 0.0)


def test_start_on_event_surface_not_counted():
    # v(0)=0 and the first motion is downward; the t=0 point must not fire
    tp = turning_points(P2, 0.3)
    tr = integrate_ode(lambda y: rhs_reduced(P2, y), (tp.u_plus, 0.0), (0.0, 1.0),
                       events=[(lambda y: y[1], -1, 1)])
    assert tr.events_of(0) == []


def test_blowup_detected():
    with pytest.raises(errors.BlowUp):
        integrate_ode(lambda y: y * y, [1.0], (0.0, 2.0))


def test_dense_output():
    tr = integrate_ode(lambda y: -y, [1.0], (0.0, 2.0), dense=True)
    assert tr.sol(0.5)[0] == pytest.approx(math.exp(-0.5), abs=1e-9)


# -- derivative --------------------------------------------------------------

def test_derivative_square():
    assert derivative(lambda x: x * x, 3.0, 1e-3) == pytest.approx(6.0, abs=1e-9)


def test_derivative_of_potential():
    assert derivative(lambda x: W(P2, x), 1.0, 1e-3) == pytest.approx(2 / 3, abs=1e-9)


@given(st.floats(-100, 100), st.floats(-5, 5))
def test_derivative_constant(c, x):
    assert derivative(lambda _: c, x, 1e-3) == 0.0


@given(st.integers(1, 6), st.floats(-1.2, 1.2))
def test_derivative_matches_w_prime(n, u):
    p = ModelParams(n)
    assert derivative(lambda x: W(p, x), u, 1e-3) == pytest.approx(W_prime(p, u), abs=1e-9)
