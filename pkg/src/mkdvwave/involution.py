"""Involution pairing points of equal potential across the center.

For ``u`` in the annulus domain, ``eta(u)`` is the point on the other side of
the origin with ``W(eta(u)) = W(u)``.  Through it the ratio

    T_n(u) = (u**(n+1) - eta**(n+1)) / (u - eta) = sum_k u**(n-k) eta**k

is defined, whose monotonicity on ``(0, saddle)`` drives the monotonicity of
the moment ratio ``B_n / B_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from . import errors
from .model import ModelParams, W, W_prime, ipow, left_domain_endpoint, potential
from .numerics import Tolerances, find_root

_FINE = Tolerances(root_tol=1e-15)
WP_GUARD = 1e-10


@dataclass(frozen=True)
class InvolutionDomain:
    params: ModelParams

    @cached_property
    def left(self) -> float:
        return left_domain_endpoint(self.params)

    @cached_property
    def right(self) -> float:
        return self.params.saddle

    @property
    def n(self) -> int:
        return self.params.n

    def check(self, u: float) -> None:
        # closed: the endpoints pair with each other on the critical level
        if not (self.left <= u <= self.right):
            raise errors.DomainViolation(f"u={u} outside [{self.left}, {self.right}]")


def _newton(params, x, h):
    w, wp = potential(params, x)
    if wp == 0.0:
        return x
    y = x - (w - h) / wp
    return y if abs(W(params, y) - h) <= abs(w - h) else x


def branch_inverse(dom: InvolutionDomain, h: float, side: str) -> float:
    """Inverse of ``W`` on the negative (``sigma_1``) or positive (``sigma_2``) branch."""
    p = dom.params
    if not (0.0 < h < p.d_n):
        raise errors.EnergyOutOfRange(h, 0.0, p.d_n)
    f = lambda x: W(p, x) - h  # noqa: E731
    if side == "positive":
        x = find_root(f, 0.0, dom.right, _FINE)
    elif side == "negative":
        x = find_root(f, dom.left, 0.0, _FINE)
    else:
        raise ValueError(f"side must be 'negative' or 'positive', not {side!r}")
    return _newton(p, x, h)


def involution_eta(dom: InvolutionDomain, u: float, generic: bool = False) -> float:
    """``eta(u)``; even ``n`` short-circuits to ``-u`` unless ``generic`` is set."""
    dom.check(u)
    if u == 0.0:
        return 0.0
    if dom.params.even and not generic:
        return -u
    h = W(dom.params, u)
    if h <= 0.0:
        # W(u) underflowed; eta = -u + O(u**2)
        return -u
    if h >= dom.params.d_n:
        return dom.left if u > 0 else dom.right
    return branch_inverse(dom, h, "negative" if u > 0 else "positive")


def _sums(n, u, eta):
    s1 = sum(k * ipow(u, n - k) * ipow(eta, k - 1) for k in range(1, n + 1))
    s2 = sum(k * ipow(eta, n - k) * ipow(u, k - 1) for k in range(1, n + 1))
    return s1, s2


def t_n(dom: InvolutionDomain, u: float):
    """Return ``(T_n(u), T_n'(u))``.

    ``T_n'(u) = (S1 W'(u) + S2 W'(eta)) / W'(eta)`` with ``S1 = dT/d eta`` and
    ``S2 = dT/du``.  Where ``|W'(eta)|`` falls below the guard the derivative is
    reported as ``+inf``.
    """
    dom.check(u)
    if u == 0.0:
        raise errors.CenterSingularity("T_n' is undefined at the center")
    n = dom.n
    eta = involution_eta(dom, u)
    T = sum(ipow(u, n - k) * ipow(eta, k) for k in range(n + 1))
    s1, s2 = _sums(n, u, eta)
    wp_eta = W_prime(dom.params, eta)
    if abs(wp_eta) < WP_GUARD:
        return T, math.inf
    Tp = (s1 * W_prime(dom.params, u) + s2 * wp_eta) / wp_eta
    return T, Tp


def t_n_value(dom: InvolutionDomain, u: float) -> float:
    """``T_n(u)`` with the center limit ``T_n(0) = 0``."""
    if u == 0.0:
        return 0.0
    dom.check(u)
    n = dom.n
    eta = involution_eta(dom, u)
    return sum(ipow(u, n - k) * ipow(eta, k) for k in range(n + 1))


def lemma4_sides(dom: InvolutionDomain, u: float):
    """Left and right sides of the polynomial identity behind ``T_n' > 0``.

    LHS = S1 (u**(n+1)/(n+1) - u) + S2 (eta**(n+1)/(n+1) - eta)
    RHS = n/((n+1)(n+2)) * sum_{k <= (n-1)/2} (u**(n-2k) - eta**(n-2k))**2 (u eta)**(2k)
    """
    dom.check(u)
    if u == 0.0:
        raise errors.CenterSingularity("identity is checked away from the center")
    n = dom.n
    eta = involution_eta(dom, u)
    s1, s2 = _sums(n, u, eta)
    lhs = s1 * (ipow(u, n + 1) / (n + 1) - u) + s2 * (ipow(eta, n + 1) / (n + 1) - eta)
    rhs = n / ((n + 1) * (n + 2)) * sum(
        (ipow(u, n - 2 * k) - ipow(eta, n - 2 * k)) ** 2 * ipow(u * eta, 2 * k)
        for k in range((n - 1) // 2 + 1))
    return lhs, rhs


def lemma4_residual(dom: InvolutionDomain, u: float) -> float:
    lhs, rhs = lemma4_sides(dom, u)
    return lhs - rhs
