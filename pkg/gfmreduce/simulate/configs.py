import math

from typing import Annotated, Literal

from annotated_types import Gt, Ge
from pydantic import ConfigDict, model_validator

from ..common_utils.config_utils import TidyModel
from ..common_utils.errors import ScheduleError
from ..model.full_order import Inputs

Positive = Annotated[float, Gt(0)]


class SolverConfig(TidyModel):
    model_config = ConfigDict(frozen=True, extra='forbid', allow_inf_nan=False)

    method: Literal['rk45-adaptive', 'rk4-fixed'] = 'rk45-adaptive'
    '''explicit Dormand-Prince with error control, or classic fixed-step RK4'''
    dt: Positive = 2e-5
    '''s, step of `rk4-fixed`'''
    rtol: Annotated[float, Ge(1e-12)] = 1e-6
    atol: Positive = 1e-8
    dt_min: Positive = 1e-12
    '''s, adaptive steps below this abort the run'''
    dt_max: Positive = 1e-3
    record_dt: Positive = 1e-3
    '''s, spacing of the recorded trace'''

    @model_validator(mode='after')
    def _check_steps(self):
        if self.dt_min > self.dt_max:
            raise ValueError(f'dt_min={self.dt_min} exceeds dt_max={self.dt_max}')
        return self

    @classmethod
    def Defaults(cls, model: str) -> 'SolverConfig':
        '''Default settings per model: the full model's current loop bounds its step.'''
        if model == 'full':
            return cls(rtol=1e-6, atol=1e-8, dt_max=1e-3)
        return cls(rtol=1e-6, atol=1e-8, dt_max=5e-3)


class Breakpoint(TidyModel):
    model_config = ConfigDict(frozen=True, extra='forbid', allow_inf_nan=False)

    t: Annotated[float, Ge(0)]
    '''s, inputs hold from here to the next breakpoint'''
    S_star: tuple[float, float]
    '''[P*, Q*] pu'''
    V_DQ: tuple[float, float] = (1.0, 0.0)
    '''infinite-bus voltage, pu'''

    def inputs(self) -> Inputs:
        return Inputs.Of(self.S_star, self.V_DQ)


class InputSchedule(TidyModel):
    '''Piecewise-constant inputs.'''

    model_config = ConfigDict(frozen=True, extra='forbid', allow_inf_nan=False)

    breakpoints: tuple[Breakpoint, ...]
    horizon: Positive
    '''s'''

    @model_validator(mode='after')
    def _check_order(self):
        if not self.breakpoints:
            raise ValueError('a schedule needs at least one breakpoint')
        if self.breakpoints[0].t != 0.0:
            raise ValueError(f'the first breakpoint must be at t=0, got {self.breakpoints[0].t}')
        for prev, cur in zip(self.breakpoints, self.breakpoints[1:]):
            if not cur.t > prev.t:
                raise ValueError(f'breakpoint times must increase strictly ({prev.t} then {cur.t})')
        if self.horizon < self.breakpoints[-1].t:
            raise ValueError(f'horizon {self.horizon} is before the last breakpoint {self.breakpoints[-1].t}')
        return self

    @classmethod
    def Constant(cls, S_star, V_DQ=(1.0, 0.0), horizon: float = 1.0) -> 'InputSchedule':
        return cls(breakpoints=(Breakpoint(t=0.0, S_star=tuple(S_star), V_DQ=tuple(V_DQ)),), horizon=horizon)

    def inputs_at(self, t: float) -> Inputs:
        '''Inputs in force at `t`; a breakpoint time already uses the new inputs.'''
        if t < 0.0 or t > self.horizon * (1 + 1e-12):
            raise ScheduleError(f't={t} is outside [0, {self.horizon}]')
        current = self.breakpoints[0]
        for bp in self.breakpoints[1:]:
            if bp.t <= t:
                current = bp
            else:
                break
        return current.inputs()

    def segments(self) -> list[tuple[float, float, Inputs]]:
        '''(t_start, t_end, inputs) for every interval of constant inputs, zero-length ones dropped.'''
        times = [bp.t for bp in self.breakpoints] + [self.horizon]
        segments = []
        for bp, t_end in zip(self.breakpoints, times[1:]):
            if t_end - bp.t > 1e-12 * max(1.0, self.horizon):
                segments.append((bp.t, t_end, bp.inputs()))
        return segments

    def with_horizon(self, horizon: float) -> 'InputSchedule':
        '''Same inputs, cut or extended to `horizon`.'''
        kept = tuple(bp for bp in self.breakpoints if bp.t < horizon or bp.t == 0.0)
        return InputSchedule(breakpoints=kept, horizon=horizon)

    def record_times(self, record_dt: float) -> list[float]:
        n = int(math.floor(self.horizon / record_dt + 1e-9)) + 1
        return [i * record_dt for i in range(n)]


__all__ = ['SolverConfig', 'Breakpoint', 'InputSchedule']
