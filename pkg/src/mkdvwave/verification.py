"""Invariant battery behind ``mkdvwave verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .abelian import (abelian_integral, b_tilde, heteroclinic_limit, limit_speed,
                      limit_speed_derivative)
from .dynamics import c0_from_energy_balance, time_integrals
from .involution import InvolutionDomain, involution_eta, lemma4_sides, t_n
from .model import ModelParams, W
from .numerics import DEFAULT_TOL, Tolerances


@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""

    def __post_init__(self):
        self.measured = float(self.measured)
        self.threshold = float(self.threshold)
        self.passed = bool(self.passed)

    def as_dict(self):
        return {"name": self.name, "measured": self.measured, "threshold": self.threshold,
                "passed": self.passed, "note": self.note}


def domain_samples(dom: InvolutionDomain, count: int = 500) -> np.ndarray:
    """``count`` points spread over the open domain, skipping the center."""
    u = np.linspace(dom.left, dom.right, count + 2)[1:-1]
    return u[u != 0.0]


CLOSED_LABELS = {2: ("3/5", "5/2"), 4: ("closed form 0.4620232", "1.8588162")}


def _subscript(n: int) -> str:
    return str(n).translate(str.maketrans("0123456789", "\u2080\u2081\u2082\u2083\u2084\u2085\u2086\u2087\u2088\u2089"))


def check_constants(p: ModelParams, tol: Tolerances) -> list[Check]:
    out = [Check("d_n equals W(saddle)", abs(p.d_n - W(p, p.saddle)), 1e-14,
                 abs(p.d_n - W(p, p.saddle)) <= 1e-14)]
    bt, c0, closed = heteroclinic_limit(p, tol)
    if closed is None:
        out.append(Check(f"heteroclinic B\u0303{_subscript(p.n)}(d{_subscript(p.n)}) (regression value)", bt, math.nan, True,
                         f"c0 = {c0:.10f}; no closed form"))
    else:
        label, c_label = CLOSED_LABELS[p.n]
        sub = _subscript(p.n)
        err = abs(bt - closed)
        out.append(Check(f"B\u0303{sub}(d{sub})={bt:.6f} vs {label}", err, 1e-6, err <= 1e-6))
        c_closed = 1.0 / (1.0 - closed)
        err = abs(c0 - c_closed)
        out.append(Check(f"c\u2080(d{sub})={c0:.6f} vs {c_label}", err, 5e-6, err <= 5e-6))
    return out


def check_monotonicity(p: ModelParams, tol: Tolerances, num: int = 200) -> list[Check]:
    hs = np.linspace(0.005 * p.d_n, 0.995 * p.d_n, num)
    bt = np.array([b_tilde(p, h, tol) for h in hs])
    dc = np.array([limit_speed_derivative(p, h, tol) for h in hs])
    step = float(np.min(np.diff(bt)))
    return [Check("B~_n strictly increasing (min step)", step, 0.0, step > 0),
            Check("c0'(h) > 0 (min value)", float(dc.min()), 0.0, bool(dc.min() > 0))]


def check_small_energy(p: ModelParams, tol: Tolerances) -> list[Check]:
    gap = limit_speed(p, 1e-6 * p.d_n, tol) - 1.0
    return [Check("c0(1e-6 d_n) - 1", gap, 1e-3, gap < 1e-3)]


def check_routes(p: ModelParams, tol: Tolerances, num: int = 10) -> list[Check]:
    hs = np.linspace(0.05 * p.d_n, 0.95 * p.d_n, num)
    route, ident, root = 0.0, 0.0, 0.0
    for h in hs:
        c0 = limit_speed(p, h, tol)
        route = max(route, abs(c0 - c0_from_energy_balance(p, h, tol)) / c0)
        ident = max(ident, time_integrals(p, h, tol).identity_residual)
        ti = time_integrals(p, h, tol)
        root = max(root, abs(abelian_integral(p, h, c0, tol)) / (math.sqrt(c0) * ti.int_v2))
    return [Check("abelian vs energy-balance c0 (rel)", route, 1e-8, route <= 1e-8),
            Check("int v^2 - int u^n v^2 = int u''^2 (rel)", ident, 1e-8, ident <= 1e-8),
            Check("I(h, c0(h)) = 0 (rel)", root, 1e-9, root <= 1e-9)]


def check_involution(p: ModelParams, count: int = 500) -> list[Check]:
    dom = InvolutionDomain(p)
    us = domain_samples(dom, count)
    poly = inv = 0.0
    tmin = math.inf
    for u in us:
        lhs, rhs = lemma4_sides(dom, u)
        poly = max(poly, abs(lhs - rhs) / (1.0 + abs(rhs)))
        eta = involution_eta(dom, u)
        if dom.left < eta < dom.right:
            inv = max(inv, abs(involution_eta(dom, eta) - u))
        if u > 0:
            tmin = min(tmin, t_n(dom, u)[1])
    return [Check("polynomial identity for T_n' (rel residual)", poly, 1e-9, poly <= 1e-9),
            Check("eta(eta(u)) = u", inv, 1e-10, inv <= 1e-10),
            Check("T_n'(u) > 0 on (0, saddle) (min)", tmin, 0.0, tmin > 0)]


def run_battery(n: int, tol: Tolerances = DEFAULT_TOL) -> list[Check]:
    p = ModelParams(n)
    checks = []
    checks += check_constants(p, tol)
    checks += check_monotonicity(p, tol)
    checks += check_small_energy(p, tol)
    checks += check_routes(p, tol)
    checks += check_involution(p)
    return checks
