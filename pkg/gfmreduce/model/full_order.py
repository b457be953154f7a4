# -*- coding: utf-8 -*-
'''
Averaged 12th-order model of a grid-forming inverter under dispatchable
virtual oscillator control, connected to an infinite bus through an LCL filter.

States, in this order:
    [δ, E*, I_gd, I_gq, I_id, I_iq, E_d, E_q, Φ_d, Φ_q, Γ_d, Γ_q]
Time is in seconds, everything else per unit.
'''
import math

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .frames import AngleState, DqPair, rotate_dq
from .limiter import rho_smooth
from .params import ParameterSet
from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import StateError

_logger = get_logger(__name__)

FULL_STATE_NAMES = ('delta', 'E_star', 'Igd', 'Igq', 'Iid', 'Iiq',
                    'Ed', 'Eq', 'Phid', 'Phiq', 'Gammad', 'Gammaq')

STATE_GROUPS: dict[str, tuple[str, ...]] = {
    'delta': ('delta',),
    'E_star': ('E_star',),
    'I_g': ('Igd', 'Igq'),
    'I_i': ('Iid', 'Iiq'),
    'E': ('Ed', 'Eq'),
    'Phi': ('Phid', 'Phiq'),
    'Gamma': ('Gammad', 'Gammaq'),
}


@dataclass(frozen=True)
class FullState:
    delta: float
    E_star: float
    I_g: DqPair
    I_i: DqPair
    E: DqPair
    Phi: DqPair
    Gamma: DqPair

    def __post_init__(self):
        if not math.isfinite(self.delta) or not math.isfinite(self.E_star):
            raise StateError('state entries must be finite')
        if self.E_star <= 0.0:
            raise StateError(f'E_star must be positive, got {self.E_star}')

    @classmethod
    def FromArray(cls, x: Sequence[float]) -> 'FullState':
        x = [float(v) for v in x]
        if len(x) != 12:
            raise StateError(f'full state has 12 entries, got {len(x)}')
        return cls(x[0], x[1], DqPair(x[2], x[3]), DqPair(x[4], x[5]),
                   DqPair(x[6], x[7]), DqPair(x[8], x[9]), DqPair(x[10], x[11]))

    def to_array(self) -> np.ndarray:
        return np.array([self.delta, self.E_star, *self.I_g, *self.I_i, *self.E, *self.Phi, *self.Gamma])


@dataclass(frozen=True)
class Inputs:
    S_star: tuple[float, float]
    '''[P*, Q*]'''
    V_DQ: DqPair
    '''infinite-bus voltage in the DQ frame'''

    def __post_init__(self):
        if len(self.S_star) != 2 or not all(math.isfinite(v) for v in self.S_star):
            raise ValueError(f'S_star must be two finite numbers, got {self.S_star}')

    @classmethod
    def Of(cls, S_star: Sequence[float], V_DQ: Sequence[float]|DqPair) -> 'Inputs':
        return cls((float(S_star[0]), float(S_star[1])), DqPair.Of(V_DQ))


@dataclass(frozen=True)
class Outputs:
    S: tuple[float, float]
    angle: AngleState
    '''wrapped δ and the controller frequency ω'''
    rho: float
    I_i_ref: DqPair
    '''unsaturated current reference I*'''
    U_star: DqPair|None = None
    '''inverter terminal voltage reference, for logging'''

    @property
    def omega(self) -> float:
        return self.angle.omega


def _state_values(state) -> list[float]:
    if isinstance(state, FullState):
        return state.to_array().tolist()
    values = np.asarray(state, dtype=float).tolist()
    if len(values) != 12:
        raise StateError(f'full state has 12 entries, got {len(values)}')
    return values

def _check_E_star(E_star: float):
    if not E_star > 0.0:
        raise StateError(f'E_star must be positive, got {E_star}')

# region sub-expressions
def power_from_capacitor(E, I_g) -> tuple[float, float]:
    '''P = Eᵀ·I_g, Q = Eᵀ·T2(-π/2)·I_g'''
    E_d, E_q = (float(v) for v in E)
    I_d, I_q = (float(v) for v in I_g)
    return E_d * I_d + E_q * I_q, E_q * I_d - E_d * I_q

def _frequency_deviation(E_star: float, dP: float, dQ: float, params: ParameterSet) -> tuple[float, float]:
    '''(ω − ω_b, Ė*)'''
    a = params.psi - math.pi / 2.0
    c, s = math.cos(a), math.sin(a)
    along_d = c * dP + s * dQ
    along_q = -s * dP + c * dQ
    w_b = params.omega_b
    deviation = w_b * params.kappa_1 / E_star ** 2 * along_d
    E_star_dot = (w_b * params.kappa_1 / E_star * along_q
                  + w_b * params.kappa_2 * (params.E_b ** 2 - E_star ** 2) * E_star)
    return deviation, E_star_dot

def dvoc_rates(E_star: float, S: Sequence[float], S_star: Sequence[float],
               params: ParameterSet) -> tuple[float, float, float]:
    '''(δ̇, Ė*, ω) of the oscillator controller.'''
    _check_E_star(E_star)
    deviation, E_star_dot = _frequency_deviation(
        E_star, float(S_star[0]) - float(S[0]), float(S_star[1]) - float(S[1]), params)
    return deviation, E_star_dot, params.omega_b + deviation

def unsaturated_reference(state, omega: float, params: ParameterSet) -> DqPair:
    '''I* = K_Pv·e1·E* + K_Iv·Φ + I_g − (K_Pv·I + (ω/ω_b)·C·T2(π/2))·E'''
    _, E_star, I_gd, I_gq, _, _, E_d, E_q, Phi_d, Phi_q, _, _ = _state_values(state)
    return DqPair(*_reference(E_star, I_gd, I_gq, E_d, E_q, Phi_d, Phi_q, omega, params))

def _reference(E_star, I_gd, I_gq, E_d, E_q, Phi_d, Phi_q, omega, params: ParameterSet):
    w_c = omega / params.omega_b * params.C
    K_Pv, K_Iv = params.K_Pv, params.K_Iv
    return (K_Pv * (E_star - E_d) + K_Iv * Phi_d + I_gd - w_c * E_q,
            -K_Pv * E_q + K_Iv * Phi_q + I_gq + w_c * E_d)
# endregion

def full_rhs(state, inputs: Inputs, params: ParameterSet, omega: float|None = None) -> np.ndarray:
    '''
    Time derivative of the full state.

    `omega` replaces the controller frequency in every block when given; the
    manifold consistency check evaluates the fast rows at ω = ω_b this way.
    '''
    delta, E_star, I_gd, I_gq, I_id, I_iq, E_d, E_q, Phi_d, Phi_q, G_d, G_q = _state_values(state)
    _check_E_star(E_star)
    p = params
    w_b = p.omega_b

    P, Q = E_d * I_gd + E_q * I_gq, E_q * I_gd - E_d * I_gq
    deviation, E_star_dot = _frequency_deviation(E_star, inputs.S_star[0] - P, inputs.S_star[1] - Q, p)
    if omega is None:
        omega = w_b + deviation
    else:
        deviation = omega - w_b

    ref_d, ref_q = _reference(E_star, I_gd, I_gq, E_d, E_q, Phi_d, Phi_q, omega, p)
    rho = rho_smooth(math.hypot(ref_d, ref_q), p.I_max, p.eps_sat)
    V_d, V_q = rotate_dq(delta, inputs.V_DQ.d, inputs.V_DQ.q)

    g_gain = w_b * p.R_g / p.L_g
    I_gd_dot = omega * I_gq - g_gain * I_gd + w_b / p.L_g * (E_d - V_d)
    I_gq_dot = -omega * I_gd - g_gain * I_gq + w_b / p.L_g * (E_q - V_q)

    i_gain = w_b * (p.R_i + p.K_Pi) / p.L_i
    I_id_dot = -i_gain * I_id + w_b / p.L_i * (p.K_Pi * rho * ref_d + p.K_Ii * G_d)
    I_iq_dot = -i_gain * I_iq + w_b / p.L_i * (p.K_Pi * rho * ref_q + p.K_Ii * G_q)

    E_d_dot = omega * E_q + w_b / p.C * (I_id - I_gd)
    E_q_dot = -omega * E_d + w_b / p.C * (I_iq - I_gq)

    windup = p.K_b * (rho - 1.0)
    Phi_d_dot = w_b * (E_star - E_d) + w_b * windup * ref_d
    Phi_q_dot = -w_b * E_q + w_b * windup * ref_q

    G_d_dot = w_b * (rho * ref_d - I_id)
    G_q_dot = w_b * (rho * ref_q - I_iq)

    return np.array([deviation, E_star_dot, I_gd_dot, I_gq_dot, I_id_dot, I_iq_dot,
                     E_d_dot, E_q_dot, Phi_d_dot, Phi_q_dot, G_d_dot, G_q_dot])

def inverter_voltage_reference(state, inputs: Inputs, params: ParameterSet) -> DqPair:
    '''U* = (K_Pi/ω_b)·Γ̇ + K_Ii·Γ + E − (ω/ω_b)·L_i·T2(π/2)·I_i'''
    x = _state_values(state)
    dx = full_rhs(x, inputs, params)
    omega = params.omega_b + float(dx[0])
    w_l = omega / params.omega_b * params.L_i
    _, _, _, _, I_id, I_iq, E_d, E_q, _, _, G_d, G_q = x
    k = params.K_Pi / params.omega_b
    return DqPair(k * dx[10] + params.K_Ii * G_d + E_d - w_l * I_iq,
                  k * dx[11] + params.K_Ii * G_q + E_q + w_l * I_id)

def full_outputs(state, inputs: Inputs, params: ParameterSet, with_voltage_reference: bool = False) -> Outputs:
    x = _state_values(state)
    _check_E_star(x[1])
    S = power_from_capacitor(x[6:8], x[2:4])
    _, _, omega = dvoc_rates(x[1], S, inputs.S_star, params)
    ref = unsaturated_reference(x, omega, params)
    rho = rho_smooth(ref.norm, params.I_max, params.eps_sat)
    U_star = inverter_voltage_reference(x, inputs, params) if with_voltage_reference else None
    return Outputs(S=S, angle=AngleState.Wrapped(x[0], omega), rho=rho, I_i_ref=ref, U_star=U_star)


@dataclass(frozen=True)
class DesignCheck:
    frequency_hz: float
    voltage_pu: float
    frequency_target_hz: float
    voltage_target_pu: float
    frequency_ok: bool
    voltage_ok: bool

def full_load_design_check(params: ParameterSet,
                           frequency_target_hz: float = 59.5,
                           voltage_target_pu: float = 0.95,
                           frequency_tol_hz: float = 0.1,
                           voltage_tol_pu: float = 0.01) -> DesignCheck:
    '''
    Steady frequency and voltage magnitude at rated load (S = [1, 1], S* = [0, 0])
    against the droop design targets. A miss is logged, never raised.
    '''
    a = params.psi - math.pi / 2.0
    along_q = -math.sin(a) * -1.0 + math.cos(a) * -1.0
    # Ė* = 0  <=>  u² − E_b²·u − κ1·along_q/κ2 = 0 with u = E*²
    disc = params.E_b ** 4 + 4.0 * params.kappa_1 * along_q / params.kappa_2
    if disc < 0.0:
        voltage = math.nan
        omega = math.nan
    else:
        voltage = math.sqrt((params.E_b ** 2 + math.sqrt(disc)) / 2.0)
        _, _, omega = dvoc_rates(voltage, (1.0, 1.0), (0.0, 0.0), params)
    frequency = omega / (2.0 * math.pi)
    check = DesignCheck(
        frequency_hz=frequency, voltage_pu=voltage,
        frequency_target_hz=frequency_target_hz, voltage_target_pu=voltage_target_pu,
        frequency_ok=abs(frequency - frequency_target_hz) <= frequency_tol_hz,
        voltage_ok=abs(voltage - voltage_target_pu) <= voltage_tol_pu,
    )
    if not check.frequency_ok:
        _logger.warning(f'full-load frequency {frequency:.4f} Hz misses the {frequency_target_hz} Hz design target')
    if not check.voltage_ok:
        _logger.warning(f'full-load voltage {voltage:.4f} pu misses the {voltage_target_pu} pu design target')
    return check


__all__ = [
    'FULL_STATE_NAMES',
    'STATE_GROUPS',
    'FullState',
    'Inputs',
    'Outputs',
    'power_from_capacitor',
    'dvoc_rates',
    'unsaturated_reference',
    'full_rhs',
    'inverter_voltage_reference',
    'full_outputs',
    'DesignCheck',
    'full_load_design_check',
]
