"""Moment integrals over the periodic annulus and the limit wave speed.

For an energy level ``0 < h <= d_n`` the closed orbit ``H = h`` has moments

    B_k(h) = 2 * int_{u_minus}^{u_plus} u**k sqrt(2h - 2W(u)) du

(``B_0`` is the enclosed area).  The first-order energy balance of the
perturbed flow closes when ``B_n / B_0 = 1 - 1/c``, giving the limit speed
``c0(h) = 1 / (1 - B_n(h)/B_0(h))``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import errors
from .model import ModelParams, ipow, turning_points
from .numerics import DEFAULT_TOL, Tolerances, derivative, quad_orbit

log = logging.getLogger(__name__)

# 5(2 sqrt3 + ln(26 - 15 sqrt3)) / (4 ln(2 - sqrt3)); since 26 - 15 sqrt3 = (2 - sqrt3)**3
# and ln(2 - sqrt3) = -ln(2 + sqrt3), this form avoids the cancellation in 26 - 15 sqrt3.
_L = math.log(2.0 + math.sqrt(3.0))
N4_CLOSED_FORM = 5.0 * (3.0 * _L - 2.0 * math.sqrt(3.0)) / (4.0 * _L)

CLOSED_FORMS = {2: 0.6, 4: N4_CLOSED_FORM}


@dataclass(frozen=True)
class AbelianValues:
    h: float
    B0: float
    Bn: float
    Btilde: float
    c0: float
    c0_prime: float | None = None
    I: float | None = None

    def as_row(self) -> dict:
        return asdict(self)


def _check_h(params: ModelParams, h: float) -> None:
    if not (0.0 < h <= params.d_n):
        raise errors.EnergyOutOfRange(h, 0.0, params.d_n)


@lru_cache(maxsize=4096)
def _moments(n: int, h: float, ks: tuple, tol: Tolerances) -> tuple:
    params = ModelParams(n)
    tp = turning_points(params, h, tol, allow_separatrix=True)
    vals = quad_orbit("times_sqrt", lambda u: np.stack([ipow(u, k) for k in ks]), tp, params, tol)
    return tuple(2.0 * float(v) for v in vals)


def moments(params: ModelParams, h: float, ks, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """Several moments ``B_k(h)`` from one quadrature pass."""
    _check_h(params, h)
    return _moments(params.n, float(h), tuple(int(k) for k in ks), tol)


def b_moment(params: ModelParams, h: float, k: int, tol: Tolerances = DEFAULT_TOL) -> float:
    if k < 0:
        raise ValueError("moment order must be >= 0")
    return moments(params, h, (k,), tol)[0]


def b_tilde(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    B0, Bn = moments(params, h, (0, params.n), tol)
    return Bn / B0


def abelian_integral(params: ModelParams, h: float, c: float | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> float:
    """``I(h) = sqrt(c) B_0 ((1 - 1/c) - B_n/B_0)``; ``c`` defaults to ``params.c``."""
    c = params.c if c is None else c
    if not c > 0:
        raise errors.NonPositiveSpeed(f"c must be > 0, got {c}")
    B0, Bn = moments(params, h, (0, params.n), tol)
    return math.sqrt(c) * B0 * ((1.0 - 1.0 / c) - Bn / B0)


def limit_speed(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    bt = b_tilde(params, h, tol)
    if bt >= 1.0:
        raise errors.SpeedUndefined(f"B_n/B_0 = {bt} >= 1 at h={h}")
    return 1.0 / (1.0 - bt)


def b_tilde_derivative(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    dn = params.d_n
    if not (0.0 < h < dn):
        raise errors.EnergyOutOfRange(h, 0.0, dn)
    scale = min(1e-4 * dn, 0.5 * h, 0.5 * (dn - h))
    return derivative(lambda x: b_tilde(params, x, tol), h, scale)


def limit_speed_derivative(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """``c0'(h) = B~'(h) / (1 - B~(h))**2`` with ``B~'`` from Richardson differences."""
    dbt = b_tilde_derivative(params, h, tol)
    bt = b_tilde(params, h, tol)
    return dbt / (1.0 - bt) ** 2


def heteroclinic_limit(params: ModelParams, tol: Tolerances = DEFAULT_TOL):
    """``(B~(d_n), c0(d_n), closed_form)``; ``closed_form`` is known for n = 2 and 4."""
    bt = b_tilde(params, params.d_n, tol)
    return bt, 1.0 / (1.0 - bt), CLOSED_FORMS.get(params.n)


def abelian_values(params: ModelParams, h: float, tol: Tolerances = DEFAULT_TOL,
                   with_derivative: bool = True) -> AbelianValues:
    B0, Bn = moments(params, h, (0, params.n), tol)
    bt = Bn / B0
    if bt >= 1.0:
        raise errors.SpeedUndefined(f"B_n/B_0 = {bt} >= 1 at h={h}")
    c0 = 1.0 / (1.0 - bt)
    c0p = None
    if with_derivative and h < params.d_n:
        c0p = limit_speed_derivative(params, h, tol)
    I = math.sqrt(params.c) * B0 * ((1.0 - 1.0 / params.c) - bt)
    return AbelianValues(h=h, B0=B0, Bn=Bn, Btilde=bt, c0=c0, c0_prime=c0p, I=I)


class GridPointError(errors.NumericalError):
    def __init__(self, h, cause):
        self.h = h
        self.cause = cause
        super().__init__(f"failed at h={h!r}: {cause}")


def speed_curve(params: ModelParams, h_grid, tol: Tolerances = DEFAULT_TOL,
                workers: int | None = None) -> list[AbelianValues]:
    """Evaluate :class:`AbelianValues` on every grid point, in grid order."""
    grid = [float(h) for h in h_grid]

    def one(h):
        try:
            return abelian_values(params, h, tol)
        except errors.EnergyOutOfRange:
            raise
        except errors.MkdvError as exc:
            raise GridPointError(h, exc) from exc

    if workers and workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, grid))
    return [one(h) for h in grid]


def default_grid(params: ModelParams, num: int, h_min: float | None = None,
                 h_max: float | None = None) -> np.ndarray:
    """Uniform grid on ``(h_min, h_max]``; defaults to ``(1e-6 d_n, d_n]``."""
    dn = params.d_n
    lo = 1e-6 * dn if h_min is None else h_min
    hi = dn if h_max is None else h_max
    grid = np.linspace(lo, hi, num)
    if h_max is None or abs(hi - dn) <= 1e-12 * dn:
        grid[-1] = dn
    return grid
