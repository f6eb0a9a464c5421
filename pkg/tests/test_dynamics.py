"""Orbits, time integrals, shooting, limit cycles and the slow manifold."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkdvwave import errors
from mkdvwave.abelian import b_tilde, limit_speed
from mkdvwave.dynamics import (c0_from_energy_balance, find_limit_cycle, manifold_residual,
                               on_manifold, orbit_on_level, period, phase_portrait,
                               predicted_cycle_energy, psi_hat, return_map_psi, separatrix,
                               simulate_full, simulate_reduced, solve_wave_speed,
                               time_integrals, time_integrals_direct)
from mkdvwave.model import ModelParams, hamiltonian, turning_points
from mkdvwave.numerics import quad_orbit

P2 = ModelParams(2)
SQ3 = math.sqrt(3.0)


# -- unperturbed orbits ------------------------------------------------------

def test_orbit_closes_and_conserves_energy():
    tr = orbit_on_level(P2, 0.5, samples=201)
    H = np.array([hamiltonian(P2, y) for y in tr.y])
    assert np.max(np.abs(H - 0.5)) <= 1e-8
    assert np.allclose(tr.y[-1], tr.y[0], atol=1e-8)


def test_orbit_period_matches_quadrature():
    tr = orbit_on_level(P2, 0.5)
    T = tr.events_of(0)[0].t
    tp = turning_points(P2, 0.5)
    assert T == pytest.approx(2 * quad_orbit("over_sqrt", np.ones_like, tp, P2), abs=1e-7)
    assert period(P2, 0.5) == pytest.approx(T, abs=1e-7)


def test_orbit_range_n1():
    # odd sample count puts a sample on the half period, the left turning point
    tr = orbit_on_level(ModelParams(1), 1 / 3, samples=401)
    assert tr.y[:, 0].min() == pytest.approx(1 - SQ3, abs=1e-8)
    assert tr.y[:, 0].max() == pytest.approx(1.0, abs=1e-8)


def test_orbit_requires_unperturbed():
    with pytest.raises(errors.ParameterError):
        orbit_on_level(ModelParams(2, 1.0, 0.01), 0.3)


def test_period_small_orbit_is_harmonic():
    assert period(P2, 1e-9) == pytest.approx(2 * math.pi, rel=1e-6)


# -- time integrals ----------------------------------------------------------

def test_identity_on_time_integrals():
    ti = time_integrals(P2, 0.3)
    assert ti.int_v2 - ti.int_unv2 == pytest.approx(ti.int_upp2, rel=1e-8)
    assert ti.identity_residual <= 1e-8


def test_integration_by_parts():
    direct = time_integrals_direct(P2, 0.3)
    ti = time_integrals(P2, 0.3)
    assert ti.int_unv2 == pytest.approx(-direct["int_un1_upp"] / 3, abs=1e-6)


@pytest.mark.parametrize("n, frac", [(1, 0.5), (2, 0.4), (5, 0.9)])
def test_time_domain_matches_quadrature(n, frac):
    p = ModelParams(n)
    h = frac * p.d_n
    ti = time_integrals(p, h)
    d = time_integrals_direct(p, h)
    for key in ("int_v2", "int_upp2", "int_unv2", "period"):
        assert d[key] == pytest.approx(getattr(ti, key), rel=1e-9)


def test_small_energy_ratio():
    ti = time_integrals(P2, 1e-6)
    assert ti.int_unv2 / ti.int_v2 < 1e-5


# -- energy balance ----------------------------------------------------------

def test_psi_hat_signs():
    c0 = limit_speed(P2, 0.3)
    assert abs(psi_hat(P2, 0.3, c0)) <= 1e-8
    assert psi_hat(P2, 0.3, 1.0) < 0
    assert psi_hat(P2, 0.3, 10.0) > 0


@given(st.integers(1, 6), st.floats(0.02, 0.98))
@settings(max_examples=25)
def test_energy_balance_route_agrees(n, frac):
    p = ModelParams(n)
    h = frac * p.d_n
    assert c0_from_energy_balance(p, h) == pytest.approx(limit_speed(p, h), rel=1e-8)


def test_energy_balance_limits():
    assert c0_from_energy_balance(P2, 0.75 - 1e-9) == pytest.approx(2.5, abs=1e-3)
    assert c0_from_energy_balance(P2, 1e-6) == pytest.approx(1.0, abs=1e-5)


# -- shooting ----------------------------------------------------------------

def test_return_map_unperturbed():
    for h in (0.05, 0.3, 0.7):
        u0 = turning_points(P2, h).u_plus
        assert abs(return_map_psi(P2, u0).psi) <= 1e-10


def test_return_map_dissipates_at_unit_speed():
    u0 = turning_points(P2, 0.3).u_plus
    res = return_map_psi(ModelParams(2, 1.0, 0.01), u0)
    assert res.psi < 0
    assert res.tau2 < 0 < res.tau1
    assert res.u_at_tau1 < 0 and res.u_at_tau2 < 0


def test_return_map_second_order_at_melnikov_zero():
    p = ModelParams(2, 2.0, 0.01)
    h_pred = predicted_cycle_energy(p)
    assert b_tilde(P2, h_pred) == pytest.approx(0.5, abs=1e-10)
    u0 = turning_points(P2, h_pred).u_plus
    psi0 = return_map_psi(p, u0).psi
    # first-order size for comparison: eps * B0 scale
    away = return_map_psi(p, turning_points(P2, 0.5 * h_pred).u_plus).psi
    assert abs(psi0) < 0.05 * abs(away)
    sweep = [return_map_psi(p, turning_points(P2, f * h_pred).u_plus).psi for f in (0.95, 1.05)]
    assert sweep[0] * sweep[1] < 0


def test_return_map_section_domain():
    with pytest.raises(errors.DomainViolation):
        return_map_psi(P2, 1.9)


def test_wave_speed_unperturbed_is_limit_speed():
    assert solve_wave_speed(P2, 0.3, 0.0) == limit_speed(P2, 0.3)


def test_wave_speed_n4_bounds():
    c = solve_wave_speed(ModelParams(4), 0.4, 0.01)
    assert 1.0 < c < 1.8589


def test_wave_speed_closes_orbit():
    p = ModelParams(3)
    c = solve_wave_speed(p, 0.2, 0.02)
    u0 = turning_points(p, 0.2).u_plus
    assert abs(return_map_psi(ModelParams(3, c, 0.02), u0).psi) <= 1e-10 * 0.2


def test_wave_speed_eps_range():
    with pytest.raises(errors.ParameterError):
        solve_wave_speed(P2, 0.3, 0.2)


@pytest.mark.slow
def test_wave_speed_error_shrinks_with_eps():
    c0 = limit_speed(P2, 0.3)
    errs = [abs(solve_wave_speed(P2, 0.3, e) - c0) for e in (0.04, 0.02, 0.01)]
    assert errs[0] > errs[1] > errs[2]


# -- limit cycles --------------------------------------------------------------

def test_limit_cycle_n2():
    lc = find_limit_cycle(ModelParams(2, 2.0, 0.01))
    assert lc.h_star == pytest.approx(lc.predicted_h, abs=0.01)
    assert lc.cycle.y[0] == pytest.approx(lc.cycle.y[-1], abs=1e-6)
    assert len(lc.cycle) == 400


def test_limit_cycle_converges_in_eps():
    gaps = [abs(find_limit_cycle(ModelParams(2, 2.0, e)).h_star
                - predicted_cycle_energy(ModelParams(2, 2.0))) for e in (0.04, 0.02, 0.01)]
    assert gaps[0] > gaps[1] > gaps[2]


@pytest.mark.parametrize("c", [1.0, 10.0])
def test_no_cycle(c):
    with pytest.raises(errors.NoCycle):
        find_limit_cycle(ModelParams(2, c, 0.01))


def test_limit_cycle_needs_eps():
    with pytest.raises(errors.ParameterError):
        find_limit_cycle(ModelParams(2, 2.0, 0.0))


# -- perturbed and full flows -------------------------------------------------

def test_reduced_energy_non_increasing():
    tr = simulate_reduced(ModelParams(2, 1.0, 0.01), 0.3, 40.0, 400)
    H = np.array([hamiltonian(P2, y) for y in tr.y])
    assert H[0] == pytest.approx(0.3, abs=1e-12)
    assert np.all(np.diff(H) < 0)


def test_full_flow_needs_eps():
    with pytest.raises(errors.SingularFastField):
        simulate_full(P2, (0.1, 0.0, 0.0), 1.0)


def test_full_flow_tracks_reduced():
    p = ModelParams(2, 1.0, 0.01)
    full = simulate_full(p, on_manifold(p, 0.3), 10.0, 50)
    red = simulate_reduced(p, 0.3, 10.0, 50)
    assert np.max(np.abs(full.y[:, :2] - red.y)) < 5 * p.eps ** 2 * 10


def test_manifold_residual_vanishes_with_eps():
    res = [manifold_residual(ModelParams(2, 1.0, e), on_manifold(ModelParams(2, 1.0, e), 0.3),
                             (0.0, 10.0)) for e in (0.01, 0.002)]
    assert res[1] < res[0] / 10


def test_manifold_attracts():
    p = ModelParams(2, 1.0, 0.01)
    on = manifold_residual(p, on_manifold(p, 0.3), (0.0, 10.0))
    off = manifold_residual(p, on_manifold(p, 0.3, offset=0.5), (0.0, 10.0),
                            burn_in=20 * p.eps)
    assert off <= 2 * on


def test_manifold_residual_burn_in_too_long():
    p = ModelParams(2, 1.0, 0.01)
    with pytest.raises(ValueError):
        manifold_residual(p, on_manifold(p, 0.3), (0.0, 0.01))


# -- separatrix and portrait ---------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_separatrix_on_critical_level(n):
    p = ModelParams(n)
    tr = separatrix(p, samples=200)
    H = np.array([hamiltonian(p, y) for y in tr.y])
    assert np.max(np.abs(H - p.d_n)) < 1e-9


def test_separatrix_extents():
    u1 = separatrix(ModelParams(1)).y[:, 0]
    assert u1.min() == pytest.approx(-1.0, abs=1e-9)
    assert u1.max() == pytest.approx(2.0, abs=1e-3)
    u2 = separatrix(P2).y[:, 0]
    assert u2.min() == pytest.approx(-SQ3, abs=1e-3)
    assert u2.max() == pytest.approx(SQ3, abs=1e-3)


def test_phase_portrait_layout():
    orbits = phase_portrait(ModelParams(3), levels=4, samples=50)
    assert [o["orbit_id"] for o in orbits] == [0, 1, 2, 3, 4]
    assert [o["separatrix"] for o in orbits] == [False] * 4 + [True]
    hs = [o["h"] for o in orbits]
    assert np.all(np.diff(hs) > 0) and hs[-1] == ModelParams(3).d_n
