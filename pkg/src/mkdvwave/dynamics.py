"""Time-domain side: orbits, energy balance, return map, shooting, slow manifold.

The energy balance route computes the limit speed from time integrals along
the unperturbed orbit,

    c0 = int v**2 dtau / int (u'')**2 dtau,

while the shooting route solves ``Psi(u0(h), c, eps) = 0`` on the perturbed
planar flow, ``Psi`` being the change of ``H`` over one full return to the
section ``{v = 0}``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import errors
from .abelian import b_tilde, limit_speed, moments
from .model import (ModelParams, W, W_prime, hamiltonian, ipow, rhs_full, rhs_reduced,
                    slow_manifold_w, turning_points)
from .numerics import DEFAULT_TOL, OrbitTrace, Tolerances, find_root, integrate_ode, quad_orbit

log = logging.getLogger(__name__)

EPS_MAX_SHOOTING = 0.05
EPS_MAX_FULL = 0.1
#: tighter controller settings for quantities that are O(eps) differences of H
SHOOTING_TOL = Tolerances(ode_rel_tol=1e-12, ode_abs_tol=1e-14)


@dataclass(frozen=True)
class TimeIntegrals:
    int_v2: float
    int_upp2: float
    int_unv2: float
    period: float

    @property
    def identity_residual(self) -> float:
        """Relative defect of ``int v^2 - int u^n v^2 = int (u'')^2``."""
        return abs(self.int_v2 - self.int_unv2 - self.int_upp2) / abs(self.int_upp2)


@dataclass(frozen=True)
class ReturnMapResult:
    tau1: float
    tau2: float
    u_at_tau1: float
    u_at_tau2: float
    psi: float


@dataclass
class LimitCycleResult:
    h_star: float
    u0_star: float
    cycle: OrbitTrace
    predicted_h: float


def _unperturbed(params: ModelParams) -> ModelParams:
    return params if params.eps == 0 else params.replace(eps=0.0)


def period(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """Period ``2 int du / sqrt(2h - 2W)`` of the closed orbit at energy ``h``."""
    tp = turning_points(params, h, tol)
    return 2.0 * quad_orbit("over_sqrt", lambda u: np.ones_like(u), tp, params, tol)


def orbit_on_level(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL,
                   samples: int | None = None, extra=None) -> OrbitTrace:
    """One period of the unperturbed flow started at ``(u_plus(h), 0)``.

    ``extra`` optionally maps a state to the derivatives of additional
    quadrature components appended to the state vector.
    """
    if params.eps != 0:
        raise errors.ParameterError("orbit_on_level integrates the unperturbed flow (eps = 0)")
    tp = turning_points(params, h, tol)
    T_guess = period(params, h, tol)
    n_extra = 0 if extra is None else len(extra(np.zeros(2)))

    def rhs(y):
        du, dv = rhs_reduced(params, y[:2])
        if extra is None:
            return (du, dv)
        return (du, dv, *extra(y[:2]))

    y0 = np.zeros(2 + n_extra)
    y0[0] = tp.u_plus
    horizon = 2.0 * T_guess + 10.0
    t_eval = None
    if samples:
        t_eval = np.linspace(0.0, T_guess, samples)
        t_eval = t_eval[t_eval < T_guess * (1 - 1e-12)]
    # v crossing downward with u > 0 closes the loop at the right turning point
    section = (lambda y: y[1], -1, 1)
    tr = integrate_ode(rhs, y0, (0.0, horizon), [section], tol, t_eval=t_eval)
    ev = tr.events_of(0)
    if not ev or ev[0].state[0] <= 0:
        raise errors.PeriodNotFound(f"no return to the section within tau={horizon}")
    end = ev[0]
    if samples:
        t = np.append(tr.t, end.t)
        y = np.vstack([tr.y, end.state])
        return OrbitTrace(t, y, tr.events)
    return OrbitTrace(tr.t, tr.y, tr.events)


def time_integrals(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> TimeIntegrals:
    """Period integrals of ``v^2``, ``(u'')^2`` and ``u^n v^2`` as orbit quadratures."""
    p = _unperturbed(params)
    n = p.n
    B0, Bn = moments(p, h, (0, n), tol)
    tp = turning_points(p, h, tol)
    upp2, T = quad_orbit("over_sqrt",
                         lambda u: np.stack([W_prime(p, u) ** 2, np.ones_like(u)]), tp, p, tol)
    return TimeIntegrals(int_v2=B0, int_upp2=2.0 * float(upp2), int_unv2=Bn, period=2.0 * float(T))


def time_integrals_direct(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Same integrals accumulated along the integrated orbit (time-domain route).

    Also returns ``int_un1_upp = int u^(n+1) u'' dtau``.
    """
    p = _unperturbed(params)
    n = p.n

    def extra(s):
        u, v = s
        upp = -W_prime(p, u)
        return (v * v, upp * upp, ipow(u, n) * v * v, ipow(u, n + 1) * upp)

    tr = orbit_on_level(p, h, tol, extra=extra)
    end = tr.events_of(0)[0]
    q = end.state[2:]
    return {"int_v2": float(q[0]), "int_upp2": float(q[1]), "int_unv2": float(q[2]),
            "int_un1_upp": float(q[3]), "period": float(end.t), "end_state": end.state[:2]}


def psi_hat(params: ModelParams, h: float, c: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """Scaled first-order energy change ``(c int u''^2 - int v^2) / sqrt(c)``."""
    if not c > 0:
        raise errors.NonPositiveSpeed(f"c must be > 0, got {c}")
    ti = time_integrals(params, h, tol)
    return (c * ti.int_upp2 - ti.int_v2) / math.sqrt(c)


def c0_from_energy_balance(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    ti = time_integrals(params, h, tol)
    return ti.int_v2 / ti.int_upp2


def _check_section(params: ModelParams, u0: float) -> None:
    if not (0.0 < u0 < params.saddle):
        raise errors.DomainViolation(f"u0={u0} outside (0, {params.saddle})")


def return_map_psi(params: ModelParams, u0: float, tol: Tolerances = SHOOTING_TOL) -> ReturnMapResult:
    """Energy change over one full return through ``(u0, 0)``.

    Forward and backward integrations from ``(u0, 0)`` stop at the first
    ``v = 0`` crossing on the far side (``tau1 > 0``, ``tau2 < 0``), so the
    arc ``[tau2, tau1]`` is one loop around the center.
    """
    _check_section(params, u0)
    rhs = lambda y: rhs_reduced(params, y)  # noqa: E731
    h0 = W(params, u0)
    T = period(params.replace(eps=0.0), h0) if h0 < params.d_n else 50.0
    horizon = 2.0 * T + 10.0
    # v' = -W'(u0) < 0 at the start; both arcs end where v rises through 0 (in tau)
    # at the left turning point, so [tau2, tau1] is exactly one loop
    section = (lambda y: y[1], +1, 1)
    fwd = integrate_ode(rhs, (u0, 0.0), (0.0, horizon), [section], tol)
    bwd = integrate_ode(rhs, (u0, 0.0), (0.0, -horizon), [section], tol)
    e1, e2 = fwd.events_of(0), bwd.events_of(0)
    if not e1 or not e2:
        raise errors.NoReturn(f"no v=0 crossing from u0={u0}")
    s1, s2 = e1[0].state, e2[0].state
    psi = hamiltonian(params, s1) - hamiltonian(params, s2)
    return ReturnMapResult(tau1=e1[0].t, tau2=e2[0].t, u_at_tau1=float(s1[0]),
                           u_at_tau2=float(s2[0]), psi=float(psi))


def solve_wave_speed(params: ModelParams, h: float, eps: float | None = None,
                     tol: Tolerances = SHOOTING_TOL) -> float:
    """Wave speed ``c(eps, h)`` making the orbit through ``(u_plus(h), 0)`` closed.

    ``eps = 0`` returns the limit speed; otherwise a bracket around ``c0(h)`` is
    grown up to +-50% and the root of ``Psi`` in ``c`` is found by Brent's method.
    """
    eps = params.eps if eps is None else eps
    if eps < 0 or eps > EPS_MAX_SHOOTING:
        raise errors.ParameterError(f"eps={eps} outside [0, {EPS_MAX_SHOOTING}]")
    base = ModelParams(params.n)
    c0 = limit_speed(base, h)
    if eps == 0:
        return c0
    u0 = turning_points(base, h).u_plus

    def psi(c):
        return return_map_psi(ModelParams(params.n, c, eps), u0, tol).psi

    root_tol = Tolerances(root_tol=1e-13 * c0)
    for frac in (0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5):
        lo, hi = c0 * (1.0 - frac), c0 * (1.0 + frac)
        plo, phi = psi(lo), psi(hi)
        if plo * phi < 0:
            c = find_root(psi, lo, hi, root_tol)
            log.debug("c(eps=%g, h=%g) = %.15g (c0 = %.15g)", eps, h, c, c0)
            return c
    raise errors.NoConvergence(f"no sign change of Psi within c0 +- 50% at h={h}, eps={eps}")


def predicted_cycle_energy(params: ModelParams, tol: Tolerances = DEFAULT_TOL) -> float:
    """Energy ``h`` with ``B_n/B_0 = 1 - 1/c``; raises :class:`NoCycle` if absent."""
    target = 1.0 - 1.0 / params.c
    base = ModelParams(params.n)
    dn = base.d_n
    lo, hi = 1e-9 * dn, dn
    f = lambda h: b_tilde(base, h, tol) - target  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if not flo * fhi < 0:
        raise errors.NoCycle(f"B_n/B_0 never equals 1 - 1/c = {target} on (0, d_n)")
    return find_root(f, lo, hi, tol)


def find_limit_cycle(params: ModelParams, tol: Tolerances = SHOOTING_TOL,
                     samples: int = 400) -> LimitCycleResult:
    """Locate the limit cycle of the perturbed planar flow.

    The abelian prediction ``h~`` seeds a bracket on the section ``u0`` which
    is widened until ``Psi`` changes sign; the root is the cycle's section point.
    """
    if params.eps <= 0:
        raise errors.ParameterError("find_limit_cycle needs eps > 0")
    h_pred = predicted_cycle_energy(params)
    base = ModelParams(params.n)
    dn = base.d_n
    psi = lambda u: return_map_psi(params, u, tol).psi  # noqa: E731
    bracket = None
    for frac in (0.02, 0.05, 0.1, 0.2, 0.4):
        hlo = max(h_pred * (1.0 - frac), 1e-6 * dn)
        hhi = min(h_pred * (1.0 + frac), dn * (1.0 - 1e-6))
        ulo, uhi = turning_points(base, hlo).u_plus, turning_points(base, hhi).u_plus
        if psi(ulo) * psi(uhi) < 0:
            bracket = (ulo, uhi)
            break
    if bracket is None:
        raise errors.NoConvergence(f"Psi has no sign change near h={h_pred}")
    u0 = find_root(psi, *bracket, Tolerances(root_tol=1e-13))
    rm = return_map_psi(params, u0, tol)
    rhs = lambda y: rhs_reduced(params, y)  # noqa: E731
    span = (rm.tau2, rm.tau1)
    t_eval = np.linspace(span[0], span[1], samples)
    fwd = integrate_ode(rhs, (u0, 0.0), (0.0, span[1]), (), tol, t_eval=t_eval[t_eval >= 0])
    bwd = integrate_ode(rhs, (u0, 0.0), (0.0, span[0]), (), tol, t_eval=t_eval[t_eval < 0])
    cycle = OrbitTrace(np.concatenate([bwd.t, fwd.t]), np.vstack([bwd.y, fwd.y]))
    return LimitCycleResult(h_star=float(W(params, u0)), u0_star=u0, cycle=cycle,
                            predicted_h=h_pred)


def simulate_reduced(params: ModelParams, h: float, t_end: float, samples: int = 1000,
                     tol: Tolerances = DEFAULT_TOL) -> OrbitTrace:
    """Perturbed planar flow started at ``(u_plus(h), 0)``."""
    u0 = turning_points(ModelParams(params.n), h).u_plus
    return integrate_ode(lambda y: rhs_reduced(params, y), (u0, 0.0), (0.0, t_end), (), tol,
                         t_eval=np.linspace(0.0, t_end, samples))


def simulate_full(params: ModelParams, init, t_end: float, samples: int = 1000,
                  tol: Tolerances = DEFAULT_TOL) -> OrbitTrace:
    """Third-order field from ``init = (u, v, w)``."""
    if params.eps <= 0:
        raise errors.SingularFastField("the 3D field needs eps > 0")
    if params.eps > EPS_MAX_FULL:
        raise errors.ParameterError(f"eps={params.eps} exceeds {EPS_MAX_FULL} for the 3D field")
    return integrate_ode(lambda y: rhs_full(params, y), init, (0.0, t_end), (), tol,
                         t_eval=np.linspace(0.0, t_end, samples))


def manifold_residual(params: ModelParams, init, t_span, samples: int = 2000,
                      tol: Tolerances = DEFAULT_TOL, burn_in: float | None = None) -> float:
    """Largest ``|w - w_slow(u, v)|`` along the 3D flow after a burn-in.

    The burn-in defaults to five fast time constants ``5 eps sqrt(c)``.
    """
    if params.eps <= 0:
        raise errors.SingularFastField("the 3D field needs eps > 0")
    t0, t1 = float(t_span[0]), float(t_span[1])
    burn = 5.0 * params.eps * math.sqrt(params.c) if burn_in is None else burn_in
    if t0 + burn >= t1:
        raise ValueError("t_span shorter than the burn-in")
    t_eval = np.linspace(t0 + burn, t1, samples)
    tr = integrate_ode(lambda y: rhs_full(params, y), init, (t0, t1), (), tol, t_eval=t_eval)
    u, v, w = tr.y[:, 0], tr.y[:, 1], tr.y[:, 2]
    return float(np.max(np.abs(w - slow_manifold_w(params, (u, v)))))


def on_manifold(params: ModelParams, h: float, offset: float = 0.0):
    """3D initial state at ``(u_plus(h), 0)`` on the first-order slow manifold."""
    u0 = turning_points(ModelParams(params.n), h).u_plus
    return (u0, 0.0, float(slow_manifold_w(params, (u0, 0.0))) + offset)


def separatrix(params: ModelParams, samples: int = 400, gap: float = 1e-4,
               tol: Tolerances = SHOOTING_TOL) -> OrbitTrace:
    """Level ``H = d_n`` bounding the annulus, traced up to ``gap`` from the saddle(s).

    For even ``n`` this is the upper heteroclinic branch followed by its mirror
    image; for odd ``n`` it is the homoclinic loop through ``(n_*, 0)``.
    """
    p = _unperturbed(params)
    s = p.saddle
    rhs = lambda y: rhs_reduced(p, y)  # noqa: E731
    near_right = (lambda y: y[0] - (s - gap), +1, 1)
    near_left = (lambda y: y[0] + (s - gap), +1, 1)
    horizon = 200.0
    if p.even:
        start = (0.0, math.sqrt(2.0 * p.d_n))
        fwd = integrate_ode(rhs, start, (0.0, horizon), [near_right], tol, dense=True)
        bwd = integrate_ode(rhs, start, (0.0, -horizon), [near_left], tol, dense=True)
    else:
        from .model import left_domain_endpoint
        start = (left_domain_endpoint(p), 0.0)
        fwd = integrate_ode(rhs, start, (0.0, horizon), [near_right], tol, dense=True)
        bwd = integrate_ode(rhs, start, (0.0, -horizon), [(near_right[0], -1, 1)], tol, dense=True)
    e1, e2 = fwd.events_of(0), bwd.events_of(0)
    if not e1 or not e2:
        raise errors.PeriodNotFound("separatrix did not approach the saddle")
    t = np.union1d(np.linspace(e2[0].t, e1[0].t, samples), [0.0])
    y = np.vstack([bwd.sol(t[t < 0]).T, fwd.sol(t[t >= 0]).T])
    if p.even:
        # lower branch: v -> -v, tau -> -tau, continued after the upper one
        t_low = t[-1] + (t - t[0])
        t = np.concatenate([t, t_low[1:]])
        y = np.vstack([y, (y[::-1] * [1.0, -1.0])[1:]])
    return OrbitTrace(t, y)


def phase_portrait(params: ModelParams, levels: int = 8, samples: int = 400,
                   tol: Tolerances = DEFAULT_TOL) -> list[dict]:
    """Closed orbits on ``levels`` energies in ``(0, d_n)`` plus the separatrix."""
    p = _unperturbed(params)
    out = []
    for i, frac in enumerate(np.linspace(0.0, 1.0, levels + 2)[1:-1]):
        h = float(frac) * p.d_n
        tr = orbit_on_level(p, h, tol, samples=samples)
        out.append({"orbit_id": i, "h": h, "separatrix": False, "tau": tr.t,
                    "u": tr.y[:, 0], "v": tr.y[:, 1]})
    sep = separatrix(p, samples, tol=tol)
    out.append({"orbit_id": levels, "h": p.d_n, "separatrix": True, "tau": sep.t,
                "u": sep.y[:, 0], "v": sep.y[:, 1]})
    return out
