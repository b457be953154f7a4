# -*- coding: utf-8 -*-
'''
Time integration over piecewise-constant input schedules.

Each schedule segment is integrated separately, so input jumps always fall on
step boundaries. Samples are taken on a uniform grid from the integrator's
dense output; outputs and manifold columns are rebuilt after the clock stops.
'''
import math
import time

from enum import Enum
from typing import Callable

import numpy as np

from scipy.integrate import RK45

from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import GFMReduceError, NonFiniteStateError, StateError, StepSizeError
from ..model.frames import wrap_angle
from ..model.full_order import FULL_STATE_NAMES, Inputs, full_outputs, full_rhs
from ..model.limiter import RhoCache
from ..model.params import ParameterSet
from ..model.reduced_order import (LimiterMode, REDUCED_L_STATE_NAMES, REDUCED_R_STATE_NAMES,
                                   reduced_L_rhs, reduced_R_rhs, reduced_outputs)
from .configs import InputSchedule, SolverConfig
from .trace import Trace

_logger = get_logger(__name__)


class ModelKind(str, Enum):
    FULL = 'full'
    REDUCED_L = 'reduced-L'
    REDUCED_R = 'reduced-R'

STATE_NAMES: dict[ModelKind, tuple[str, ...]] = {
    ModelKind.FULL: FULL_STATE_NAMES,
    ModelKind.REDUCED_L: REDUCED_L_STATE_NAMES,
    ModelKind.REDUCED_R: REDUCED_R_STATE_NAMES,
}


def model_rhs(model: ModelKind|str, inputs: Inputs, params: ParameterSet,
              mode: LimiterMode|str = LimiterMode.SMOOTH,
              cache: RhoCache|None = None) -> Callable[[np.ndarray], np.ndarray]:
    '''x -> ẋ of one model at fixed inputs.'''
    model = ModelKind(model)
    if model is ModelKind.FULL:
        return lambda x: full_rhs(x, inputs, params)
    if model is ModelKind.REDUCED_L:
        return lambda x: reduced_L_rhs(x, inputs, params, mode, cache)
    return lambda x: reduced_R_rhs(x, inputs, params, mode, cache)

def wrap_angles(a: np.ndarray) -> np.ndarray:
    '''Vectorized wrap to (-π, π].'''
    return math.pi - np.remainder(math.pi - a, 2 * math.pi)

# region steppers
def _time_tolerance(t: float) -> float:
    return 1e-9 * max(1.0, abs(t))

def _run_rk45(fun, t0: float, t1: float, x: np.ndarray, ts: np.ndarray, out: np.ndarray,
              cfg: SolverConfig) -> tuple[np.ndarray, int]:
    k, m = 0, len(ts)
    while k < m and ts[k] <= t0 + _time_tolerance(t0):
        out[k] = x
        k += 1
    solver = RK45(fun, t0, x, t1, max_step=cfg.dt_max, rtol=cfg.rtol, atol=cfg.atol)
    steps = 0
    while solver.status == 'running':
        message = solver.step()
        if solver.status == 'failed':
            raise StepSizeError(f'adaptive step failed: {message}', t=solver.t)
        steps += 1
        y = solver.y
        if not np.isfinite(y).all():
            raise NonFiniteStateError('non-finite state', t=solver.t)
        if solver.status == 'running' and solver.step_size is not None and solver.step_size < cfg.dt_min:
            raise StepSizeError(f'step size {solver.step_size:.3g} s fell below dt_min={cfg.dt_min:.3g} s', t=solver.t)
        dense = None
        tol = _time_tolerance(solver.t)
        while k < m and ts[k] <= solver.t + tol:
            if abs(ts[k] - solver.t) <= tol:
                out[k] = y
            else:
                if dense is None:
                    dense = solver.dense_output()
                out[k] = dense(ts[k])
            k += 1
    return solver.y.copy(), steps

def _hermite(x0, f0, x1, f1, h: float, s: float) -> np.ndarray:
    s2, s3 = s * s, s * s * s
    return ((2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * f0
            + (-2 * s3 + 3 * s2) * x1 + (s3 - s2) * h * f1)

def _run_rk4(fun, t0: float, t1: float, x: np.ndarray, ts: np.ndarray, out: np.ndarray,
             cfg: SolverConfig) -> tuple[np.ndarray, int]:
    k, m = 0, len(ts)
    while k < m and ts[k] <= t0 + _time_tolerance(t0):
        out[k] = x
        k += 1
    n_steps = max(1, math.ceil((t1 - t0) / cfg.dt - 1e-9))
    h = (t1 - t0) / n_steps
    f0 = fun(t0, x)
    for i in range(n_steps):
        t = t0 + i * h
        t_new = t1 if i == n_steps - 1 else t0 + (i + 1) * h
        k2 = fun(t + h / 2, x + h / 2 * f0)
        k3 = fun(t + h / 2, x + h / 2 * k2)
        k4 = fun(t_new, x + h * k3)
        x_new = x + h / 6 * (f0 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(x_new).all():
            raise NonFiniteStateError('non-finite state', t=t_new)
        f_new = fun(t_new, x_new)
        tol = _time_tolerance(t_new)
        while k < m and ts[k] <= t_new + tol:
            s = min(1.0, max(0.0, (ts[k] - t) / h))
            out[k] = x_new if abs(ts[k] - t_new) <= tol else _hermite(x, f0, x_new, f_new, h, s)
            k += 1
        x_new[0] = wrap_angle(float(x_new[0]))
        x, f0 = x_new, f_new
    return x.copy(), n_steps
# endregion

def _reconstruct(model: ModelKind, times: np.ndarray, states: np.ndarray, schedule: InputSchedule,
                 params: ParameterSet, mode: LimiterMode) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(times)
    columns = np.empty((n, 12))
    outputs = np.empty((n, 4))
    reference_norm = np.empty(n)
    cache = RhoCache()
    for i, (t, x) in enumerate(zip(times, states)):
        inputs = schedule.inputs_at(float(t))
        if model is ModelKind.FULL:
            out = full_outputs(x, inputs, params)
            columns[i] = x
            outputs[i] = (out.S[0], out.S[1], out.omega, out.rho)
            reference_norm[i] = out.I_i_ref.norm
        else:
            columns[i], (P, Q, omega, rho, ref) = reduced_outputs(model.value, x, inputs, params, mode, cache)
            outputs[i] = (P, Q, omega, rho)
            reference_norm[i] = ref
    return columns, outputs, reference_norm

def integrate(model: ModelKind|str,
              x0,
              schedule: InputSchedule,
              cfg: SolverConfig|None = None,
              params: ParameterSet|None = None,
              mode: LimiterMode|str = LimiterMode.SMOOTH) -> Trace:
    '''Integrate one model over a schedule and record it at `cfg.record_dt`.'''
    if params is None:
        raise ValueError('params is required')
    model = ModelKind(model)
    mode = LimiterMode(mode)
    cfg = cfg or SolverConfig.Defaults('full' if model is ModelKind.FULL else 'reduced')
    names = STATE_NAMES[model]
    x = np.array(x0, dtype=float).reshape(-1)
    if x.shape != (len(names),):
        raise StateError(f'{model.value} needs {len(names)} initial states, got {x.size}')
    if not np.isfinite(x).all():
        raise StateError('initial state is not finite')

    ts = np.array(schedule.record_times(cfg.record_dt))
    recorded = np.full((len(ts), len(names)), np.nan)
    segments = schedule.segments()
    stepper = _run_rk45 if cfg.method == 'rk45-adaptive' else _run_rk4
    cache = RhoCache()
    steps = 0

    started = time.perf_counter()
    for index, (t0, t1, inputs) in enumerate(segments):
        last = index == len(segments) - 1
        k0 = int(np.searchsorted(ts, t0 - _time_tolerance(t0)))
        k1 = len(ts) if last else int(np.searchsorted(ts, t1 - _time_tolerance(t1)))
        rhs = model_rhs(model, inputs, params, mode, cache)

        def fun(t, y, rhs=rhs):
            try:
                return rhs(y)
            except GFMReduceError as e:
                raise e.with_time(t)

        x[0] = wrap_angle(float(x[0]))
        x, segment_steps = stepper(fun, t0, t1, x, ts[k0:k1], recorded[k0:k1], cfg)
        steps += segment_steps
        _logger.verbose(f'{model.value}: segment [{t0:g}, {t1:g}] s took {segment_steps} steps')
    wall_time = time.perf_counter() - started

    if not np.isfinite(recorded).all():
        raise NonFiniteStateError('recorded trace has missing or non-finite samples', t=float(ts[-1]))
    recorded[:, 0] = wrap_angles(recorded[:, 0])
    columns, outputs, reference_norm = _reconstruct(model, ts, recorded, schedule, params, mode)
    _logger.debug(f'{model.value}: {steps} steps in {wall_time:.3f} s over {schedule.horizon:g} s')
    return Trace(
        model=model.value, state_names=names, times=ts, states=recorded, columns=columns,
        outputs=outputs, reference_norm=reference_norm, wall_time=wall_time, step_count=steps,
        omega_b=params.omega_b, I_max=params.I_max,
        metadata={'solver': cfg.model_dump(mode='json'), 'limiter_mode': mode.value},
    )


__all__ = ['ModelKind', 'STATE_NAMES', 'model_rhs', 'wrap_angles', 'integrate']
