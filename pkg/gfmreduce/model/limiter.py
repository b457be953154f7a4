# -*- coding: utf-8 -*-
'''
Current-reference limiter algebra.

The limited reference is ρ·I*, with ρ a smooth approximation of
min(1, I_max/‖I*‖). In the full model ρ is explicit. On the reduced manifold
it solves a scalar implicit equation, and the fast states are linear in
(I_g, E*) through the gain matrices A1...A4.

2x2 gain blocks all have the form [[x, -y], [y, x]].
'''
import math

from dataclasses import dataclass
from typing import Callable

import numpy as np

from scipy.optimize import brentq

from .frames import I2, J
from .params import ParameterSet
from ..common_utils.constants import (LN2, RHO_DEGENERATE_NORM, RHO_MAX_ITERATIONS, RHO_TOLERANCE)
from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import RhoSolverError, SingularGainError

_logger = get_logger(__name__)


@dataclass(frozen=True, slots=True)
class RhoSolution:
    rho: float
    residual: float
    iterations: int
    saturated: bool
    '''ρ < 1 − ε·ln 2, i.e. past the knee of the smooth limiter'''


@dataclass(frozen=True)
class GainMatrices:
    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    A4: np.ndarray
    f1: float
    f2: float
    f3: float
    f4: float
    f5: float


class RhoCache:
    '''Last solved ρ of one trajectory, used as the next warm start.'''

    __slots__ = ('last',)

    def __init__(self, last: float|None = None):
        self.last = last

    def update(self, solution: RhoSolution) -> RhoSolution:
        self.last = solution.rho
        return solution


# region saturation factor
def rho_exact_min(ref_norm: float, I_max: float) -> float:
    if ref_norm <= 0.0:
        return 1.0
    return min(1.0, I_max / ref_norm)

def _soft_min_unit(y: float, eps_sat: float) -> float:
    '''-ε·ln(exp(-1/ε) + exp(-y/ε)) with the larger exponent factored out.'''
    if y == math.inf:
        return 1.0
    return min(1.0, y) - eps_sat * math.log1p(math.exp(-abs(1.0 - y) / eps_sat))

def rho_smooth(ref_norm, I_max: float, eps_sat: float):
    '''
    Smooth saturation factor. Scalars give a float, arrays an array.
    The value at ref_norm = 0 is the limit 1.
    '''
    if np.ndim(ref_norm) == 0:
        x = float(ref_norm)
        if x <= 0.0:
            return 1.0
        return _soft_min_unit(I_max / x, eps_sat)
    x = np.asarray(ref_norm, dtype=float)
    with np.errstate(divide='ignore'):
        y = np.where(x > 0.0, I_max / np.where(x > 0.0, x, 1.0), np.inf)
    gap = eps_sat * np.log1p(np.exp(-np.abs(1.0 - y) / eps_sat))
    return np.where(np.isinf(y), 1.0, np.minimum(1.0, y) - gap)

def rho_lower_bound(eps_sat: float) -> float:
    return -eps_sat * LN2
# endregion

# region gain matrices
def _block(x: float, y: float) -> np.ndarray:
    return np.array([[x, -y], [y, x]])

def _f_terms(rho: float, params: ParameterSet) -> tuple[float, float, float, float, float, float]:
    '''(D, f1, f2, f3, f4, f5)'''
    C, L_g, R_g = params.C, params.L_g, params.R_g
    k = params.K_b * (rho - 1.0)
    D = (C * k) ** 2 + rho ** 2
    f1 = (C * L_g - 1.0) * k * rho + R_g * rho ** 2
    f2 = C * R_g * k * rho - L_g * rho ** 2
    f3 = k * rho - R_g * D
    f4 = L_g * rho ** 2 + C * k ** 2 * (C * L_g - 1.0)
    f5 = ((C * L_g - 1.0) ** 2 + (C * R_g) ** 2) * k ** 2 - 2.0 * k * R_g * rho + rho ** 2 * (R_g ** 2 + L_g ** 2)
    return D, f1, f2, f3, f4, f5

def gain_matrices(rho: float, params: ParameterSet) -> GainMatrices:
    '''Closed forms of A1...A4 and f1...f5.'''
    D, f1, f2, f3, f4, f5 = _f_terms(rho, params)
    if not D > 0.0:
        raise SingularGainError(f'gain denominator vanishes at rho={rho:.17g}')
    if not f5 > 0.0:
        raise SingularGainError(f'f5={f5:.3g} is not positive at rho={rho:.17g}')
    C = params.C
    k = params.K_b * (rho - 1.0)
    return GainMatrices(
        A1=_block(rho, C * k) / D,
        A2=_block(-C * C * k, C * rho) / D,
        A3=_block(f1, f2) / f5,
        A4=_block(f3, f4) / f5,
        f1=f1, f2=f2, f3=f3, f4=f4, f5=f5,
    )

def gain_matrices_oracle(rho: float, params: ParameterSet) -> GainMatrices:
    '''
    A1...A4 by numerical inversion of the manifold equations.
    f1...f5 are recovered from A3, A4 and the determinants.
    '''
    C, L_g, R_g = params.C, params.L_g, params.R_g
    M = (rho / C) * J - params.K_b * (rho - 1.0) * I2
    det_M = float(np.linalg.det(M))
    if abs(det_M) < 1e-300:
        raise SingularGainError(f'M is singular at rho={rho:.17g}')
    A2 = np.linalg.inv(M)
    A1 = A2 @ J / C
    N = (R_g / L_g) * I2 - J @ (I2 - (I2 - rho * A1) / (L_g * C))
    det_N = float(np.linalg.det(N))
    if abs(det_N) < 1e-300:
        raise SingularGainError(f'resistive manifold matrix is singular at rho={rho:.17g}')
    N_inv = np.linalg.inv(N)
    A3 = N_inv @ ((rho / (L_g * C)) * J) @ A2
    A4 = -N_inv / L_g
    f5 = C ** 2 * det_M * L_g ** 2 * det_N
    return GainMatrices(
        A1=A1, A2=A2, A3=A3, A4=A4,
        f1=float(A3[0, 0] * f5), f2=float(A3[1, 0] * f5),
        f3=float(A4[0, 0] * f5), f4=float(A4[1, 0] * f5), f5=float(f5),
    )

def gain_scalars(rho: float, params: ParameterSet) -> tuple[complex, complex, complex, complex]:
    '''
    A1...A4 as complex numbers x + jy: a block [[x, -y], [y, x]] acts on
    (d, q) like multiplication on d + jq.
    '''
    D, f1, f2, f3, f4, f5 = _f_terms(rho, params)
    if not (D > 0.0 and f5 > 0.0):
        raise SingularGainError(f'singular gains at rho={rho:.17g} (D={D:.3g}, f5={f5:.3g})')
    C = params.C
    k = params.K_b * (rho - 1.0)
    return (complex(rho, C * k) / D, complex(-C * C * k, C * rho) / D,
            complex(f1, f2) / f5, complex(f3, f4) / f5)
# endregion

# region implicit solve
def solve_rho_scalar(residual: Callable[[float], float],
                     eps_sat: float,
                     guess: float|None = None,
                     tol: float = RHO_TOLERANCE,
                     max_iter: int = RHO_MAX_ITERATIONS) -> RhoSolution:
    '''
    Root of a residual that is negative below and positive above the solution
    on [-ε·ln 2, 1]. Brent's method on a bracket; a warm start first tries a
    narrow bracket around `guess`.
    '''
    lower = rho_lower_bound(eps_sat)
    saturation_knee = 1.0 - eps_sat * LN2

    def _done(rho: float, r: float, iterations: int) -> RhoSolution:
        return RhoSolution(rho=rho, residual=r, iterations=iterations, saturated=rho < saturation_knee)

    if guess is not None and math.isfinite(guess):
        r = residual(guess)
        if abs(r) <= tol:
            return _done(guess, r, 0)
        width = 1e-3
        a, b = max(lower - 1e-9, guess - width), min(1.0 + 1e-12, guess + width)
        ra, rb = residual(a), residual(b)
        if ra * rb < 0.0:
            return _brent(residual, a, b, tol, max_iter, _done)
        _logger.verbose(f'warm start {guess:.6g} not bracketed, using the full interval')

    a, b = lower - 1e-9, 1.0 + 1e-12
    ra, rb = residual(a), residual(b)
    expansions = 0
    while not ra * rb <= 0.0:
        if expansions >= 8 or not (math.isfinite(ra) and math.isfinite(rb)):
            raise RhoSolverError('no sign change of the saturation residual', bracket=(a, b))
        span = b - a
        a, b = a - span, b + span
        ra, rb = residual(a), residual(b)
        expansions += 1
    if ra == 0.0:
        return _done(a, 0.0, 0)
    if rb == 0.0:
        return _done(b, 0.0, 0)
    return _brent(residual, a, b, tol, max_iter, _done)

def _brent(residual, a, b, tol, max_iter, done) -> RhoSolution:
    rho, info = brentq(residual, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                       maxiter=max_iter, full_output=True, disp=False)
    r = residual(rho)
    if not info.converged or abs(r) > tol:
        raise RhoSolverError(f'saturation residual {r:.3g} after {info.iterations} iterations '
                             f'({info.flag})', bracket=(a, b))
    return done(float(rho), float(r), int(info.iterations))

def manifold_reference_norm(E_star: float, I_g_d: float, I_g_q: float, params: ParameterSet) -> float:
    '''‖C·e2·E* + I_g‖'''
    return math.hypot(I_g_d, I_g_q + params.C * E_star)

def rho_residual(rho: float, E_star: float, I_g, params: ParameterSet) -> float:
    '''ρ + ε·ln(exp(-1/ε) + exp(-I_max·√D/(ε·‖C·e2·E* + I_g‖)))'''
    I_g_d, I_g_q = (float(v) for v in I_g)
    n = manifold_reference_norm(E_star, I_g_d, I_g_q, params)
    return _residual_at_norm(rho, n, params)

def _residual_at_norm(rho: float, n: float, params: ParameterSet) -> float:
    D = (params.C * params.K_b * (rho - 1.0)) ** 2 + rho ** 2
    if n <= 0.0:
        return rho - 1.0
    return rho - _soft_min_unit(params.I_max * math.sqrt(D) / n, params.eps_sat)

def solve_rho_reduced(E_star: float, I_g, params: ParameterSet,
                      guess: float|None = None,
                      tol: float = RHO_TOLERANCE,
                      max_iter: int = RHO_MAX_ITERATIONS) -> RhoSolution:
    '''Saturation factor on the reduced manifold for given (E*, I_g).'''
    I_g_d, I_g_q = (float(v) for v in I_g)
    n = manifold_reference_norm(E_star, I_g_d, I_g_q, params)
    if n < RHO_DEGENERATE_NORM:
        return RhoSolution(rho=1.0, residual=0.0, iterations=0, saturated=False)
    return solve_rho_scalar(lambda rho: _residual_at_norm(rho, n, params),
                            params.eps_sat, guess=guess, tol=tol, max_iter=max_iter)
# endregion


__all__ = [
    'RhoSolution',
    'GainMatrices',
    'RhoCache',
    'rho_exact_min',
    'rho_smooth',
    'rho_lower_bound',
    'gain_matrices',
    'gain_matrices_oracle',
    'gain_scalars',
    'solve_rho_scalar',
    'manifold_reference_norm',
    'rho_residual',
    'solve_rho_reduced',
]
