# -*- coding: utf-8 -*-
'''
Reference frames and angle bookkeeping.

Three-phase quantities map to a dq frame rotating with the inverter angle θ,
and to a DQ frame rotating at the nominal frequency ω_b. The two frames differ
by δ = θ − ω_b·t, which is the angle that is stored as a state.
'''
import math

from dataclasses import dataclass
from typing import Iterable

import numpy as np

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])
I2 = np.eye(2)

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


@dataclass(frozen=True, slots=True)
class DqPair:
    d: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.d) and math.isfinite(self.q)):
            raise ValueError(f'DqPair entries must be finite, got ({self.d}, {self.q})')

    @classmethod
    def Of(cls, value: 'DqPair|Iterable[float]|np.ndarray') -> 'DqPair':
        if isinstance(value, DqPair):
            return value
        d, q = (float(v) for v in value)
        return cls(d, q)

    def as_array(self) -> np.ndarray:
        return np.array([self.d, self.q])

    @property
    def norm(self) -> float:
        return math.hypot(self.d, self.q)

    def __iter__(self):
        yield self.d
        yield self.q


@dataclass(frozen=True, slots=True)
class AngleState:
    delta: float
    '''rad, wrapped to (-π, π]'''
    omega: float
    '''rad/s'''

    def __post_init__(self):
        if not (-math.pi < self.delta <= math.pi):
            raise ValueError(f'delta must lie in (-pi, pi], got {self.delta}')

    @classmethod
    def Wrapped(cls, delta: float, omega: float) -> 'AngleState':
        return cls(wrap_angle(delta), omega)


def wrap_angle(alpha: float) -> float:
    '''Wrap an angle to (-π, π].'''
    wrapped = math.remainder(alpha, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped

def t2_rotation(alpha: float) -> np.ndarray:
    '''[[cos α, sin α], [-sin α, cos α]]'''
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, s], [-s, c]])

def t1_transform(alpha: float, f_abc: Iterable[float]) -> DqPair:
    '''Balanced three-phase set to its dq components at angle α.'''
    a, b, c = (float(v) for v in f_abc)
    d = (2.0 / 3.0) * (math.cos(alpha) * a
                       + math.cos(alpha - _TWO_THIRDS_PI) * b
                       + math.cos(alpha + _TWO_THIRDS_PI) * c)
    q = -(2.0 / 3.0) * (math.sin(alpha) * a
                        + math.sin(alpha - _TWO_THIRDS_PI) * b
                        + math.sin(alpha + _TWO_THIRDS_PI) * c)
    return DqPair(d, q)

def rotate_dq(alpha: float, d: float, q: float) -> tuple[float, float]:
    '''T2(α)·[d, q] on plain floats.'''
    c, s = math.cos(alpha), math.sin(alpha)
    return c * d + s * q, -s * d + c * q


J = np.array([[0.0, 1.0], [-1.0, 0.0]])
'''T2(π/2); J·e1 = -e2, J·e2 = e1'''


__all__ = [
    'E1', 'E2', 'I2', 'J',
    'DqPair', 'AngleState',
    'wrap_angle', 't2_rotation', 't1_transform', 'rotate_dq',
]
