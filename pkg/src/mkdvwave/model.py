"""Potential, Hamiltonian and vector fields of the traveling-wave reduction.

After the substitution ``U = c**(1/n) * u`` and ``xi = tau / sqrt(c)`` the
traveling-wave ODE of the perturbed defocusing mKdV equation becomes

    u'' + u - u**(n+1)/(n+1) + eps * (u'/sqrt(c) + sqrt(c) * u''') = 0.

At ``eps = 0`` this is the Hamiltonian system ``u' = v, v' = -W'(u)`` with
``H(u, v) = v**2/2 + W(u)`` and ``W(u) = u**2/2 - u**(n+2)/((n+1)(n+2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import errors
from .numerics import Tolerances, find_root


def ipow(u, n: int):
    """``u**n`` for a non-negative integer ``n`` by repeated squaring.

    Works elementwise on arrays and keeps the exact sign for negative ``u``.
    """
    if n < 0:
        raise ValueError("ipow needs n >= 0")
    result = np.ones_like(u, dtype=float) if isinstance(u, np.ndarray) else 1.0
    base = u
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


@dataclass(frozen=True)
class ModelParams:
    """Exponent ``n``, wave speed ``c`` and perturbation size ``eps``."""

    n: int
    c: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise errors.NonPositiveN(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (self.c > 0) or not math.isfinite(self.c):
            raise errors.NonPositiveSpeed(f"c must be > 0, got {self.c!r}")
        if not (self.eps >= 0) or not math.isfinite(self.eps):
            raise errors.NegativeEps(f"eps must be >= 0, got {self.eps!r}")

    @cached_property
    def d_n(self) -> float:
        """Saddle energy ``n (n+1)^(2/n) / (2(n+2))``; top of the periodic annulus."""
        n = self.n
        return n * (n + 1) ** (2.0 / n) / (2.0 * (n + 2))

    @cached_property
    def saddle(self) -> float:
        """Positive saddle abscissa ``(n+1)^(1/n)``."""
        return (self.n + 1) ** (1.0 / self.n)

    @property
    def even(self) -> bool:
        return self.n % 2 == 0

    def replace(self, **changes) -> "ModelParams":
        kw = {"n": self.n, "c": self.c, "eps": self.eps}
        kw.update(changes)
        return ModelParams(**kw)


def validate_params(n, c=1.0, eps=0.0) -> ModelParams:
    return ModelParams(n, c, eps)


class TurningPoints(NamedTuple):
    u_minus: float
    u_plus: float
    h: float


class Equilibrium(NamedTuple):
    u: float
    kind: str


def potential(params: ModelParams, u):
    """Return ``(W(u), W'(u))``; vectorised over ``u``."""
    n = params.n
    un = ipow(u, n)
    W = 0.5 * u * u - un * u * u / ((n + 1) * (n + 2))
    Wp = u - un * u / (n + 1)
    return W, Wp


def W(params: ModelParams, u):
    return potential(params, u)[0]


def W_prime(params: ModelParams, u):
    return potential(params, u)[1]


def hamiltonian(params: ModelParams, s) -> float:
    u, v = s
    return 0.5 * v * v + W(params, u)


def equilibria(params: ModelParams) -> list[Equilibrium]:
    s = params.saddle
    out = [Equilibrium(0.0, "center"), Equilibrium(s, "saddle")]
    if params.even:
        out.append(Equilibrium(-s, "saddle"))
    return out


def _polish(params: ModelParams, x: float, h: float) -> float:
    # One Newton step; bracketed roots lose digits where W is flat (near 0).
    w, wp = potential(params, x)
    if wp != 0.0:
        y = x - (w - h) / wp
        if abs(potential(params, y)[0] - h) <= abs(w - h):
            return y
    return x


def left_domain_endpoint(params: ModelParams) -> float:
    """Left end of the periodic annulus: ``-saddle`` for even n, ``n_*`` for odd n."""
    return _left_endpoint(params.n)


_LEFT_CACHE: dict[int, float] = {}


def _left_endpoint(n: int) -> float:
    if n in _LEFT_CACHE:
        return _LEFT_CACHE[n]
    p = ModelParams(n)
    if p.even:
        val = -p.saddle
    else:
        dn = p.d_n
        lo = -1.0
        f = lambda x: W(p, x) - dn  # noqa: E731
        while f(lo) <= 0:
            lo *= 2.0
        val = find_root(f, lo, 0.0, Tolerances(root_tol=1e-15))
        val = _polish(p, val, dn)
    _LEFT_CACHE[n] = val
    return val


def turning_points(params: ModelParams, h: float, tol: Tolerances | None = None,
                   allow_separatrix: bool = False) -> TurningPoints:
    """Roots of ``W(u) = h`` bounding the periodic orbit at energy ``h``.

    With ``allow_separatrix`` the level ``h = d_n`` is accepted and the domain
    endpoints are returned.
    """
    dn = params.d_n
    if allow_separatrix and h == dn:
        return TurningPoints(left_domain_endpoint(params), params.saddle, h)
    if not (0.0 < h < dn):
        raise errors.EnergyOutOfRange(h, 0.0, dn)
    tol = tol or Tolerances()
    fine = Tolerances(root_tol=min(tol.root_tol, 1e-15), max_iter=tol.max_iter)
    f = lambda x: W(params, x) - h  # noqa: E731
    up = _polish(params, find_root(f, 0.0, params.saddle, fine), h)
    if params.even:
        um = -up
    else:
        um = _polish(params, find_root(f, left_domain_endpoint(params), 0.0, fine), h)
    return TurningPoints(um, up, h)


def rhs_reduced(params: ModelParams, s):
    """Planar field on the slow manifold with the O(eps**2) remainder dropped."""
    u, v = s
    n, c, eps = params.n, params.c, params.eps
    un = ipow(u, n)
    dv = -u + un * u / (n + 1) - eps * math.sqrt(c) * (un + (-1.0 + 1.0 / c)) * v
    return v, dv


def rhs_full(params: ModelParams, s):
    """Full third-order field in ``(u, v, w)`` with ``w = v'``."""
    if params.eps == 0:
        raise errors.SingularFastField("the 3D field needs eps > 0")
    u, v, w = s
    n, sc, eps = params.n, math.sqrt(params.c), params.eps
    dw = (-u + ipow(u, n + 1) / (n + 1) - w - eps / sc * v) / (eps * sc)
    return v, w, dw


def slow_manifold_w(params: ModelParams, s):
    """First-order slow manifold ``w = -W'(u) + eps * g2(u, v)``."""
    u, v = s
    n, c, eps = params.n, params.c, params.eps
    un = ipow(u, n)
    g2 = -math.sqrt(c) * (un * v + (-1.0 + 1.0 / c) * v)
    return -u + un * u / (n + 1) + eps * g2


def fast_eigenvalues(params: ModelParams):
    return (0.0, 0.0, -1.0 / math.sqrt(params.c))


def reconstruct_wave(params: ModelParams, orbit):
    """Map an orbit trace to physical coordinates ``(xi, U)``.

    ``orbit`` is an :class:`~mkdvwave.numerics.OrbitTrace` or an iterable of
    ``(tau, u)`` pairs.
    """
    if hasattr(orbit, "t"):
        tau = np.asarray(orbit.t, dtype=float)
        u = np.asarray(orbit.y, dtype=float)[:, 0]
    else:
        pairs = np.asarray(list(orbit), dtype=float).reshape(-1, 2)
        tau, u = pairs[:, 0], pairs[:, 1]
    c = params.c
    scale = c ** (1.0 / params.n)
    return list(zip((tau / math.sqrt(c)).tolist(), (scale * u).tolist()))
