# -*- coding: utf-8 -*-
'''
Reduced-order models on the zero-order manifold of the fast states.

    reduced-L   x = [δ, E*, I_gd, I_gq]    inductive lines
    reduced-R   x = [δ, E*]                resistive lines, I_g algebraic

The fast states I_i, E, Φ, Γ (and I_g for reduced-R) are algebraic functions
of the slow states through the saturation factor ρ, which solves a scalar
implicit equation re-solved in every right-hand-side evaluation.
'''
import math

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .frames import E1, I2, J, AngleState, DqPair, t2_rotation
from .full_order import Inputs, dvoc_rates, _frequency_deviation
from .limiter import (RhoCache, RhoSolution, gain_matrices, gain_scalars, solve_rho_reduced, solve_rho_scalar,
                      _soft_min_unit)
from .params import ParameterSet
from ..common_utils.errors import SingularGainError, StateError


class LimiterMode(str, Enum):
    SMOOTH = 'smooth'
    NONE = 'none'
    '''ρ ≡ 1, the current limiter never engages'''


REDUCED_L_STATE_NAMES = ('delta', 'E_star', 'Igd', 'Igq')
REDUCED_R_STATE_NAMES = ('delta', 'E_star')

_UNLIMITED = RhoSolution(rho=1.0, residual=0.0, iterations=0, saturated=False)


@dataclass(frozen=True)
class ReducedStateL:
    delta: float
    E_star: float
    I_g: DqPair

    def __post_init__(self):
        if not self.E_star > 0.0:
            raise StateError(f'E_star must be positive, got {self.E_star}')

    def to_array(self) -> np.ndarray:
        return np.array([self.delta, self.E_star, self.I_g.d, self.I_g.q])


@dataclass(frozen=True)
class ReducedStateR:
    delta: float
    E_star: float

    def __post_init__(self):
        if not self.E_star > 0.0:
            raise StateError(f'E_star must be positive, got {self.E_star}')

    def to_array(self) -> np.ndarray:
        return np.array([self.delta, self.E_star])


@dataclass(frozen=True)
class ManifoldPoint:
    I_i: DqPair
    E: DqPair
    Phi: DqPair
    Gamma: DqPair
    rho: float


def _values(state, size: int) -> list[float]:
    if isinstance(state, (ReducedStateL, ReducedStateR)):
        state = state.to_array()
    values = np.asarray(state, dtype=float).tolist()
    if len(values) != size:
        raise StateError(f'expected a state with {size} entries, got {len(values)}')
    if not values[1] > 0.0:
        raise StateError(f'E_star must be positive, got {values[1]}')
    return values

def _mode(mode) -> LimiterMode:
    return LimiterMode(mode)

def _solve_rho(E_star: float, I_g: Sequence[float], params: ParameterSet, mode: LimiterMode,
               cache: RhoCache|None) -> RhoSolution:
    if mode is LimiterMode.NONE:
        return _UNLIMITED
    solution = solve_rho_reduced(E_star, I_g, params, guess=cache.last if cache is not None else None)
    if cache is not None:
        cache.update(solution)
    return solution

# region algebraic relations
def reduced_PQ(E_star: float, I_g, rho: float, params: ParameterSet, gains=None) -> tuple[float, float]:
    '''Active and reactive power at the capacitor, as functions of (E*, I_g) on the manifold.'''
    gains = gains if gains is not None else gain_matrices(rho, params)
    I_g = np.asarray(tuple(I_g), dtype=float)
    C = params.C
    A1T, A2T, JT = gains.A1.T, gains.A2.T, J.T
    P = (I_g @ ((rho / C) * A1T @ JT - JT / C) @ I_g
         + (rho / C) * (E1 @ A2T @ JT) * E_star @ I_g)
    Q = (I_g @ (I2 / C - (rho / C) * A1T) @ I_g
         - (rho / C) * (E1 @ A2T) * E_star @ I_g)
    return float(P), float(Q)

def manifold_states(E_star: float, I_g, rho: float, params: ParameterSet,
                    mode: LimiterMode|str = LimiterMode.SMOOTH, gains=None) -> ManifoldPoint:
    '''Fast states on the manifold for given slow states and saturation factor.'''
    if _mode(mode) is LimiterMode.NONE:
        rho = 1.0
    if not rho > 0.0:
        raise SingularGainError(f'manifold integrator state needs rho > 0, got {rho:.17g}')
    gains = gains if gains is not None else gain_matrices(rho, params)
    I_g = np.asarray(tuple(I_g), dtype=float)
    I_i = rho * (gains.A1 @ I_g + gains.A2 @ E1 * E_star)
    E = (J @ (I_i - I_g)) / params.C
    Phi = ((rho - 1.0) * (params.K_b * params.K_Pv - 1.0) / (rho * params.K_Iv)) * I_i
    Gamma = (params.R_i / params.K_Ii) * I_i
    return ManifoldPoint(I_i=DqPair.Of(I_i), E=DqPair.Of(E), Phi=DqPair.Of(Phi),
                         Gamma=DqPair.Of(Gamma), rho=float(rho))
# endregion

# region inductive lines
def reduced_L_rhs(state, inputs: Inputs, params: ParameterSet,
                  mode: LimiterMode|str = LimiterMode.SMOOTH,
                  cache: RhoCache|None = None) -> np.ndarray:
    '''Time derivative of [δ, E*, I_gd, I_gq].'''
    delta, E_star, I_gd, I_gq = _values(state, 4)
    mode = _mode(mode)
    I_g = np.array([I_gd, I_gq])
    rho = _solve_rho(E_star, I_g, params, mode, cache).rho
    gains = gain_matrices(rho, params)
    P, Q = reduced_PQ(E_star, I_g, rho, params, gains=gains)
    delta_dot, E_star_dot = _frequency_deviation(E_star, inputs.S_star[0] - P, inputs.S_star[1] - Q, params)

    w_b, L_g, C = params.omega_b, params.L_g, params.C
    A = w_b * (J @ (I2 - (I2 - rho * gains.A1) / (L_g * C)) - (params.R_g / L_g) * I2)
    b = (w_b / L_g) * ((rho / C) * (J @ gains.A2 @ E1) * E_star - t2_rotation(delta) @ inputs.V_DQ.as_array())
    I_g_dot = A @ I_g + b
    return np.array([delta_dot, E_star_dot, I_g_dot[0], I_g_dot[1]])
# endregion

# region resistive lines
def _resistive_current(rho: float, E_star: float, v: complex, params: ParameterSet) -> complex:
    '''I_g = A3(ρ)·e1·E* + A4(ρ)·T2(δ)·V_DQ, with v = T2(δ)·V_DQ as d + jq.'''
    _, _, a3, a4 = gain_scalars(rho, params)
    return a3 * E_star + a4 * v

def solve_Ig_resistive(delta: float, E_star: float, V_DQ, params: ParameterSet,
                       mode: LimiterMode|str = LimiterMode.SMOOTH,
                       cache: RhoCache|None = None) -> tuple[DqPair, RhoSolution]:
    '''
    Grid current of the resistive model and the saturation factor it implies.
    Substituting I_g(ρ) into the implicit ρ equation leaves one scalar root.
    '''
    if not E_star > 0.0:
        raise StateError(f'E_star must be positive, got {E_star}')
    V_d, V_q = (float(v) for v in V_DQ)
    c, s = math.cos(delta), math.sin(delta)
    v = complex(c * V_d + s * V_q, -s * V_d + c * V_q)
    if _mode(mode) is LimiterMode.NONE:
        I_g = _resistive_current(1.0, E_star, v, params)
        return DqPair(I_g.real, I_g.imag), _UNLIMITED

    C, K_b, I_max, eps_sat = params.C, params.K_b, params.I_max, params.eps_sat

    def residual(rho: float) -> float:
        try:
            I_g = _resistive_current(rho, E_star, v, params)
        except SingularGainError:
            return math.nan
        n = abs(I_g + 1j * C * E_star)
        if n <= 0.0:
            return rho - 1.0
        D = (C * K_b * (rho - 1.0)) ** 2 + rho ** 2
        return rho - _soft_min_unit(I_max * math.sqrt(D) / n, eps_sat)

    solution = solve_rho_scalar(residual, eps_sat, guess=cache.last if cache is not None else None)
    if cache is not None:
        cache.update(solution)
    I_g = _resistive_current(solution.rho, E_star, v, params)
    return DqPair(I_g.real, I_g.imag), solution

def reduced_R_rhs(state, inputs: Inputs, params: ParameterSet,
                  mode: LimiterMode|str = LimiterMode.SMOOTH,
                  cache: RhoCache|None = None) -> np.ndarray:
    '''Time derivative of [δ, E*].'''
    delta, E_star = _values(state, 2)
    I_g, solution = solve_Ig_resistive(delta, E_star, inputs.V_DQ, params, mode, cache)
    P, Q = reduced_PQ(E_star, I_g, solution.rho, params)
    delta_dot, E_star_dot, _ = dvoc_rates(E_star, (P, Q), inputs.S_star, params)
    return np.array([delta_dot, E_star_dot])
# endregion

def reduced_outputs(model: str, state, inputs: Inputs, params: ParameterSet,
                    mode: LimiterMode|str = LimiterMode.SMOOTH,
                    cache: RhoCache|None = None) -> tuple[np.ndarray, tuple[float, float, float, float, float]]:
    '''
    Reconstruct the twelve full-model columns of a reduced state, plus
    (P, Q, ω, ρ, ‖I*‖) where I* is the unsaturated reference I_i/ρ.
    '''
    mode = _mode(mode)
    if model == 'reduced-L':
        delta, E_star, I_gd, I_gq = _values(state, 4)
        solution = _solve_rho(E_star, (I_gd, I_gq), params, mode, cache)
        I_g = DqPair(I_gd, I_gq)
    elif model == 'reduced-R':
        delta, E_star = _values(state, 2)
        I_g, solution = solve_Ig_resistive(delta, E_star, inputs.V_DQ, params, mode, cache)
    else:
        raise ValueError(f'unknown reduced model `{model}`')
    rho = solution.rho
    gains = gain_matrices(rho, params)
    point = manifold_states(E_star, I_g, rho, params, mode, gains=gains)
    P, Q = reduced_PQ(E_star, I_g, rho, params, gains=gains)
    _, _, omega = dvoc_rates(E_star, (P, Q), inputs.S_star, params)
    angle = AngleState.Wrapped(delta, omega)
    columns = np.array([angle.delta, E_star, *I_g, *point.I_i, *point.E, *point.Phi, *point.Gamma])
    return columns, (P, Q, angle.omega, rho, point.I_i.norm / rho)


__all__ = [
    'LimiterMode',
    'REDUCED_L_STATE_NAMES',
    'REDUCED_R_STATE_NAMES',
    'ReducedStateL',
    'ReducedStateR',
    'ManifoldPoint',
    'reduced_PQ',
    'manifold_states',
    'reduced_L_rhs',
    'solve_Ig_resistive',
    'reduced_R_rhs',
    'reduced_outputs',
]
