# -*- coding: utf-8 -*-
'''
Per-unit parameter set of the inverter model and its base values.

Values are per unit on the bases S_r (rated three-phase power), E_r (rated
line-to-line RMS voltage) and ω_b (nominal angular frequency).
'''
import math

from pathlib import Path
from typing import Annotated, Any, Callable, Literal

from annotated_types import Ge, Gt, Lt
from pydantic import ConfigDict, ValidationError

from ..common_utils.config_utils import (TidyModel, first_error_field, describe_validation_error,
                                         load_json_document)
from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import ParameterError

_logger = get_logger(__name__)

Positive = Annotated[float, Gt(0)]


class ParameterSet(TidyModel):
    model_config = ConfigDict(frozen=True, extra='forbid', allow_inf_nan=False)

    # region controller
    psi: Annotated[float, Ge(0), Lt(2 * math.pi)]
    '''rad, rotation angle of the oscillator controller'''
    eps_sat: Annotated[float, Gt(0), Lt(1)]
    '''saturation-function parameter of the smooth limiter'''
    E_b: Positive
    '''nominal voltage magnitude (peak)'''
    I_max: Positive
    '''peak current limit'''
    kappa_1: Positive
    '''synchronization gain'''
    kappa_2: Positive
    '''voltage-amplitude control gain'''
    # endregion

    # region filter
    L_i: Positive
    '''inverter-side inductance'''
    L_g: Positive
    '''grid-side inductance, optionally including the line'''
    C: Positive
    '''filter capacitance'''
    R_i: Positive
    '''inverter-side resistance'''
    R_g: Positive
    '''grid-side resistance, optionally including the line'''
    # endregion

    # region inner loops
    K_b: Positive
    '''anti-windup gain'''
    K_Pi: Positive
    K_Ii: Positive
    K_Pv: Positive
    K_Iv: Positive
    omega_bw_i: Positive
    '''current-loop bandwidth'''
    omega_bw_v: Positive
    '''voltage-loop bandwidth'''
    # endregion

    # region bases
    omega_b: Positive
    '''rad/s'''
    S_r: Positive
    '''VA'''
    E_r: Positive
    '''V, line-to-line RMS'''
    # endregion

    def consistency_warnings(self) -> list[str]:
        '''Deviations from the loop design rules beyond 1%. Retuned gains are allowed.'''
        rules = (
            ('K_Pi', self.K_Pi, 'omega_bw_i*L_i', self.omega_bw_i * self.L_i),
            ('K_Ii', self.K_Ii, 'omega_bw_i*R_i', self.omega_bw_i * self.R_i),
            ('K_Pv', self.K_Pv, 'omega_bw_v*C', self.omega_bw_v * self.C),
            ('K_Iv', self.K_Iv, '2*K_Pv*omega_bw_v^2/omega_bw_i',
             2.0 * self.K_Pv * self.omega_bw_v ** 2 / self.omega_bw_i),
        )
        warnings = []
        for name, value, rule, expected in rules:
            if abs(value - expected) > 0.01 * abs(expected):
                warnings.append(f'{name}={value:g} differs from {rule}={expected:.6g} by more than 1%')
        return warnings

    def with_updates(self, **updates: Any) -> 'ParameterSet':
        '''Validated copy with some fields replaced.'''
        data = self.model_dump()
        data.update(updates)
        return parameters_from_mapping(data)


# region named sets
_TABLE1: dict[str, float] = dict(
    psi=math.pi / 4, eps_sat=0.1, E_b=1.0, I_max=1.2,
    L_i=0.0196, L_g=0.0196, C=0.1086, R_i=0.0139, R_g=0.0139,
    K_b=0.0347, K_Pi=0.9817, K_Ii=0.6944, kappa_1=0.0033,
    K_Pv=1.4476, K_Iv=10.2944, omega_bw_i=50.0, omega_bw_v=13.3333, kappa_2=0.0796,
    omega_b=2 * math.pi * 60, S_r=1500.0, E_r=208.0,
)

NAMED_SETS: dict[str, dict[str, float]] = {
    'table1': _TABLE1,
    'table1-line': {**_TABLE1, 'L_g': 0.037, 'R_g': 0.0313},
    'table1-inductive': {**_TABLE1, 'L_g': 0.037},
    'table1-resistive': {**_TABLE1, 'R_g': 0.0313},
}
'''
`table1` is the grid-side filter alone, `table1-line` adds the line to both L_g
and R_g, and the inductive/resistive sets add it to one of them only.
'''
# endregion

def named_parameters(name: str) -> ParameterSet:
    key = name.strip().lower()
    if key not in NAMED_SETS:
        raise ParameterError(f'Unknown parameter set `{name}`, expected one of {sorted(NAMED_SETS)}', field='named')
    return ParameterSet.model_validate(NAMED_SETS[key])

def parameters_from_mapping(data: dict[str, Any]) -> ParameterSet:
    try:
        params = ParameterSet.model_validate(data)
    except ValidationError as e:
        raise ParameterError(f'Invalid parameter set: {describe_validation_error(e)}',
                             field=first_error_field(e)) from e
    for warning in params.consistency_warnings():
        _logger.warning(warning)
    return params

def load_parameters(source: 'str|Path|dict[str, Any]|ParameterSet') -> ParameterSet:
    '''
    Build a ParameterSet from:
        - a named set (`"table1-inductive"`),
        - a flat mapping holding every field,
        - `{"named": <set>, "overrides": {...}}`,
        - a JSON file path or JSON text holding one of the above.
    '''
    if isinstance(source, ParameterSet):
        return source
    if isinstance(source, str) and source.strip().lower() in NAMED_SETS:
        return named_parameters(source)
    if not isinstance(source, dict):
        source = load_json_document(source, ParameterError)
        if isinstance(source, str):
            return named_parameters(source)
    if not isinstance(source, dict):
        raise ParameterError('A parameter document must be a JSON object or a named set')
    if 'named' in source:
        extra = set(source) - {'named', 'overrides'}
        if extra:
            raise ParameterError(f'Unknown keys next to `named`: {sorted(extra)}', field=sorted(extra)[0])
        base = named_parameters(str(source['named']))
        overrides = source.get('overrides') or {}
        if not isinstance(overrides, dict):
            raise ParameterError('`overrides` must be an object', field='overrides')
        data = base.model_dump()
        for key, value in overrides.items():
            field = ParameterSet.TidyConfigFieldName(key)
            if field is None:
                raise ParameterError(f'Unknown parameter `{key}`', field=key)
            data[field] = value
        return parameters_from_mapping(data)
    return parameters_from_mapping(source)


# region base values
_SQRT2_3 = math.sqrt(2.0) / math.sqrt(3.0)

BASE_VALUES: dict[str, Callable[[ParameterSet], float]] = {
    'voltage': lambda p: p.E_r * _SQRT2_3,
    'current': lambda p: p.S_r * _SQRT2_3 / p.E_r,
    'power': lambda p: p.S_r,
    'impedance': lambda p: p.E_r ** 2 / p.S_r,
    'inductance': lambda p: p.E_r ** 2 / (p.S_r * p.omega_b),
    'capacitance': lambda p: p.S_r / (p.E_r ** 2 * p.omega_b),
    'inverse_capacitance': lambda p: p.E_r ** 2 * p.omega_b / p.S_r,
    'admittance': lambda p: p.S_r / p.E_r ** 2,
    'inverse_inductance': lambda p: p.S_r * p.omega_b / p.E_r ** 2,
    'frequency': lambda p: p.omega_b,
    'kappa_2': lambda p: 3.0 * p.omega_b / (2.0 * p.E_r ** 2),
}
'''base expressions, SI value = pu value × base'''

FIELD_BASES: dict[str, str] = {
    'E_b': 'voltage', 'I_max': 'current',
    'L_i': 'inductance', 'L_g': 'inductance',
    'C': 'capacitance',
    'R_i': 'impedance', 'R_g': 'impedance', 'K_b': 'impedance', 'K_Pi': 'impedance',
    'K_Ii': 'inverse_capacitance', 'kappa_1': 'inverse_capacitance',
    'K_Pv': 'admittance', 'K_Iv': 'inverse_inductance',
    'omega_bw_i': 'frequency', 'omega_bw_v': 'frequency',
    'kappa_2': 'kappa_2',
}

BaseTag = Literal['voltage', 'current', 'power', 'impedance', 'inductance', 'capacitance',
                  'inverse_capacitance', 'admittance', 'inverse_inductance', 'frequency', 'kappa_2']
# endregion

def to_si(params: ParameterSet, tag: str, value: float|None = None) -> float:
    '''
    Convert a per-unit value to SI.

    `tag` is a base row (`'inductance'`, `'voltage'`, ...) or a parameter field
    name such as `'L_i'`; with a field name `value` defaults to the stored value.
    '''
    if tag in BASE_VALUES:
        base_tag = tag
    else:
        field = ParameterSet.TidyConfigFieldName(tag)
        if field is None or field not in FIELD_BASES:
            raise ParameterError(f'Unknown base tag `{tag}`', field=tag)
        base_tag = FIELD_BASES[field]
        if value is None:
            value = getattr(params, field)
    if value is None:
        raise ParameterError(f'A value is required for base tag `{tag}`', field=tag)
    return float(value) * BASE_VALUES[base_tag](params)


__all__ = [
    'ParameterSet',
    'NAMED_SETS',
    'named_parameters',
    'parameters_from_mapping',
    'load_parameters',
    'BASE_VALUES',
    'FIELD_BASES',
    'BaseTag',
    'to_si',
]
