"""Numerical kernels: bracketed roots, orbit quadrature, ODE traces, derivatives.

Root finding and time stepping delegate to :func:`scipy.optimize.brentq` and
:func:`scipy.integrate.solve_ivp`; this module pins their tolerances and
translates their failure modes into the package exceptions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import errors

log = logging.getLogger(__name__)

BLOWUP_NORM = 1e8
GL_POINTS = 16
MAX_PANELS = 4096
ROUNDOFF = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    root_tol: float = 1e-12
    quad_rel_tol: float = 1e-10
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        for name in ("root_tol", "quad_rel_tol", "ode_rel_tol", "ode_abs_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iter < 10:
            raise ValueError("max_iter must be >= 10")

    def with_(self, **changes) -> "Tolerances":
        kw = dict(self.__dict__)
        kw.update(changes)
        return Tolerances(**kw)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Event:
    t: float
    state: np.ndarray
    event_id: int


@dataclass
class OrbitTrace:
    """Sampled trajectory. ``t`` is increasing, ``y`` has shape ``(len(t), dim)``."""

    t: np.ndarray
    y: np.ndarray
    events: list[Event] = field(default_factory=list)
    sol: Callable | None = field(default=None, repr=False)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), [row for row in self.y]))

    def events_of(self, event_id: int) -> list[Event]:
        return [e for e in self.events if e.event_id == event_id]

    def __len__(self):
        return len(self.t)


# ---------------------------------------------------------------- roots

def find_root(f: Callable[[float], float], a: float, b: float,
              tol: Tolerances = DEFAULT_TOL) -> float:
    """Bracketed root of ``f`` on ``[a, b]`` (Brent's method).

    Raises
    ------
    NoSignChange
        If ``f(a)`` and ``f(b)`` do not have opposite signs.
    MaxIterations
        If Brent's method exceeds ``tol.max_iter`` iterations.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (fa * fb < 0):
        raise errors.NoSignChange(f"f({a})={fa} and f({b})={fb} have the same sign")
    try:
        return brentq(f, a, b, xtol=tol.root_tol, rtol=4 * np.finfo(float).eps,
                      maxiter=tol.max_iter)
    except RuntimeError as exc:
        raise errors.MaxIterations(str(exc)) from exc


# ------------------------------------------------------------ quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(m: int):
    if m not in _GL_CACHE:
        _GL_CACHE[m] = np.polynomial.legendre.leggauss(m)
    return _GL_CACHE[m]


def _theta_nodes(panels: int, m: int = GL_POINTS):
    x, w = _gl(m)
    edges = np.linspace(-0.5 * np.pi, 0.5 * np.pi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    theta = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return theta, weights


def _deflated_radicand(n: int, tp) -> np.ndarray:
    """Coefficients of G with ``2h - 2W(u) = (u_plus - u)(u - u_minus) G(u)``."""
    # 2h - 2W(u) = a u^(n+2) - u^2 + 2h, highest degree first
    a = 2.0 / ((n + 1) * (n + 2))
    poly = np.zeros(n + 3)
    poly[0] = a
    poly[n] = -1.0
    poly[n + 2] = 2.0 * tp.h
    q, _ = np.polydiv(poly, np.poly([tp.u_plus, tp.u_minus]))
    return -q


def quad_orbit(weight: str, f: Callable, tp, model, tol: Tolerances = DEFAULT_TOL):
    """Integrate ``f`` against the orbit speed over ``[u_minus, u_plus]``.

    ``weight="times_sqrt"`` gives ``int f(u) sqrt(2h - 2W(u)) du`` and
    ``weight="over_sqrt"`` gives ``int f(u) / sqrt(2h - 2W(u)) du``.

    The substitution ``u = m + r sin(theta)`` absorbs the square-root edge
    behaviour, leaving a smooth integrand in ``theta`` that is integrated by
    composite Gauss-Legendre with panel doubling.  ``f`` receives a node array
    and may return an array of shape ``(k, nodes)`` to integrate ``k``
    functions at once; the result then has shape ``(k,)``.
    """
    if weight not in ("times_sqrt", "over_sqrt"):
        raise ValueError(f"unknown weight {weight!r}")
    m = 0.5 * (tp.u_plus + tp.u_minus)
    r = 0.5 * (tp.u_plus - tp.u_minus)
    gcoef = _deflated_radicand(model.n, tp)
    guard = 1e-13 * (1.0 + abs(tp.h))

    def estimate(panels):
        theta, wts = _theta_nodes(panels)
        u = m + r * np.sin(theta)
        G = np.polyval(gcoef, u)
        if np.any(G < -guard):
            raise errors.NegativeRadicand(
                f"2h-2W < 0 inside the orbit at h={tp.h}; turning points are off")
        sg = np.sqrt(np.maximum(G, 0.0))
        if weight == "times_sqrt":
            kern = r * r * np.cos(theta) ** 2 * sg
        else:
            with np.errstate(divide="ignore"):
                kern = 1.0 / sg
        vals = np.asarray(f(u), dtype=float)
        vals = np.broadcast_to(vals, vals.shape[:-1] + u.shape) if vals.ndim else np.full(u.shape, vals)
        return (vals * kern) @ wts, (np.abs(vals) * np.abs(kern)) @ wts

    panels = 1
    prev, _ = estimate(panels)
    while panels < MAX_PANELS:
        panels *= 2
        cur, scale = estimate(panels)
        # relative test, floored at round-off of the absolute integrand for
        # components that cancel to ~0 (odd moments)
        allowed = np.maximum(tol.quad_rel_tol * np.abs(cur), ROUNDOFF * scale)
        if np.all(np.abs(cur - prev) <= allowed):
            return cur if np.ndim(cur) else float(cur)
        prev = cur
    raise errors.NonConvergent(f"orbit quadrature did not converge at h={tp.h}")


# ------------------------------------------------------------------ ODEs

def _event_fn(fn, direction, terminal, sign, y0):
    # A start point lying exactly on the event surface is not a crossing.
    on_start = fn(y0) == 0.0

    def g(s, y):
        if on_start and s == 0.0:
            return np.nan
        return fn(y)
    g.direction = sign * direction
    g.terminal = terminal
    return g


def integrate_ode(rhs: Callable, y0, t_span, events: Sequence = (),
                  tol: Tolerances = DEFAULT_TOL, t_eval=None,
                  max_step: float = np.inf, dense: bool = False) -> OrbitTrace:
    """Adaptive Dormand-Prince 8(5,3) integration with event location.

    ``rhs(y)`` is autonomous.  Each entry of ``events`` is either a callable
    ``g(y)`` or a tuple ``(g, direction, terminal)`` where ``direction`` is
    measured in the physical time ``tau`` and ``terminal`` is ``False`` or the
    number of occurrences after which integration stops.  A start point on
    an event surface does not count as a crossing.  When ``t1 < t0``
    the field is negated and integrated forward in ``s = t0 - tau``; returned
    samples are re-sorted so that ``t`` increases.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    sign = 1.0 if t1 >= t0 else -1.0
    y0 = np.asarray(y0, dtype=float)

    def f(s, y):
        return sign * np.asarray(rhs(y), dtype=float)

    evs = []
    for e in events:
        fn, direction, terminal = (e, 0, False) if callable(e) else (tuple(e) + (0, False))[:3]
        evs.append(_event_fn(fn, direction, terminal, sign, y0))

    def blowup(s, y):
        return BLOWUP_NORM - np.linalg.norm(y)
    blowup.terminal = True
    evs.append(blowup)

    s_eval = None if t_eval is None else sign * (np.asarray(t_eval, dtype=float) - t0)
    if s_eval is not None and sign < 0:
        s_eval = s_eval[::-1].copy()
        s_eval.sort()
    res = solve_ivp(f, (0.0, abs(t1 - t0)), y0, method="DOP853", t_eval=s_eval,
                    events=evs, rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol,
                    max_step=max_step, dense_output=dense)
    if res.status == -1:
        raise errors.StepUnderflow(res.message)
    if res.t_events[-1].size:
        raise errors.BlowUp(f"state norm exceeded {BLOWUP_NORM:g}")

    t = t0 + sign * res.t
    y = res.y.T
    found = []
    for k in range(len(events)):
        for se, ye in zip(res.t_events[k], res.y_events[k]):
            found.append(Event(t0 + sign * float(se), np.array(ye), k))
    if sign < 0:
        t, y = t[::-1], y[::-1]
        found.sort(key=lambda e: -e.t)
    sol = None
    if dense:
        inner = res.sol
        sol = lambda tau: inner(sign * (np.asarray(tau) - t0))  # noqa: E731
    return OrbitTrace(np.ascontiguousarray(t), np.ascontiguousarray(y), found, sol)


# ----------------------------------------------------------- derivatives

def derivative(f: Callable[[float], float], x: float, scale: float) -> float:
    """Central difference of ``f`` at ``x`` with two Richardson sweeps.

    Uses steps ``scale``, ``scale/2`` and ``scale/4``; the truncation error is
    ``O(scale**6)`` for smooth ``f``.
    """
    hs = (scale, scale / 2.0, scale / 4.0)
    d = [(f(x + h) - f(x - h)) / (2.0 * h) for h in hs]
    r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0]
    return (16.0 * r1[1] - r1[0]) / 15.0

