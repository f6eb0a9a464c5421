"""Periodic traveling waves of the perturbed generalized defocusing mKdV equation.

The traveling-wave reduction gives the planar Hamiltonian system
``u' = v, v' = -W'(u)`` with ``W(u) = u**2/2 - u**(n+2)/((n+1)(n+2))``, perturbed
by a small dissipation ``eps``.  The package computes the limit wave speed
``c0(h)`` of the periodic family by Abelian integrals, by energy-balance time
integrals and by direct shooting on the perturbed flow.
"""

from .abelian import (AbelianValues, abelian_integral, abelian_values, b_moment, b_tilde,
                      default_grid, heteroclinic_limit, limit_speed, limit_speed_derivative,
                      moments, speed_curve)
from .dynamics import (LimitCycleResult, ReturnMapResult, TimeIntegrals,
                       c0_from_energy_balance, find_limit_cycle, manifold_residual,
                       orbit_on_level, period, phase_portrait, predicted_cycle_energy,
                       psi_hat, return_map_psi, separatrix, simulate_full, simulate_reduced,
                       solve_wave_speed, time_integrals)
from .errors import MkdvError, NumericalError, ParameterError
from .involution import InvolutionDomain, involution_eta, lemma4_residual, t_n
from .model import (ModelParams, W, W_prime, equilibria, hamiltonian, potential,
                    reconstruct_wave, turning_points)
from .numerics import DEFAULT_TOL, Tolerances

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
