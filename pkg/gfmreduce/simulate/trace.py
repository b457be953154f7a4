# -*- coding: utf-8 -*-
'''Recorded trajectories, error metrics and the frequency-band monitor.'''
import math

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from ..common_utils.constants import ASSUMPTION1_EPS
from ..common_utils.errors import TraceMismatchError
from ..common_utils.file_utils import atomic_write_text, dump_json
from ..model.full_order import FULL_STATE_NAMES

OUTPUT_NAMES = ('P', 'Q', 'omega', 'rho')
CSV_COLUMNS = ('t', *FULL_STATE_NAMES, *OUTPUT_NAMES)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Trace:
    '''
    Uniformly sampled trajectory.

    `states` holds the model's own states, `columns` the twelve full-model
    columns (reconstructed on the manifold for reduced models).
    '''
    model: str
    state_names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    columns: np.ndarray
    outputs: np.ndarray
    '''P, Q, ω, ρ per sample'''
    reference_norm: np.ndarray
    '''‖I*‖ per sample, the unsaturated current reference'''
    wall_time: float
    step_count: int
    omega_b: float
    I_max: float
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ('times', 'states', 'columns', 'outputs', 'reference_norm'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = len(self.times)
        if any(len(getattr(self, name)) != n for name in ('states', 'columns', 'outputs', 'reference_norm')):
            raise TraceMismatchError('trace arrays have different sample counts')

    def __len__(self) -> int:
        return len(self.times)

    @property
    def record_dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def signal(self, name: str) -> np.ndarray:
        '''One column by name: a state, an output, or a derived norm.'''
        if name == 't':
            return self.times
        if name in OUTPUT_NAMES:
            return self.outputs[:, OUTPUT_NAMES.index(name)]
        if name in FULL_STATE_NAMES:
            return self.columns[:, FULL_STATE_NAMES.index(name)]
        derived = {
            'Ig_norm': (2, 3), 'Ii_norm': (4, 5), 'E_norm': (6, 7),
        }
        if name in derived:
            i, j = derived[name]
            return np.hypot(self.columns[:, i], self.columns[:, j])
        if name == 'S_norm':
            return np.hypot(self.outputs[:, 0], self.outputs[:, 1])
        if name == 'reference_norm':
            return self.reference_norm
        if name == 'limited_reference_norm':
            return self.outputs[:, 3] * self.reference_norm
        raise KeyError(f'unknown signal `{name}`')

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.columns).all() and np.isfinite(self.outputs).all())

    def to_frame(self) -> pd.DataFrame:
        data = np.column_stack([self.times, self.columns, self.outputs])
        return pd.DataFrame(data, columns=list(CSV_COLUMNS))

    def write_csv(self, path: str|Path) -> Path:
        text = self.to_frame().to_csv(index=False, float_format='%.17g', lineterminator='\n')
        return atomic_write_text(path, text)

    def write_metadata(self, path: str|Path, **extra) -> Path:
        meta = {
            'model': self.model,
            'state_names': list(self.state_names),
            'samples': len(self),
            'record_dt': self.record_dt,
            'wall_time': self.wall_time,
            'step_count': self.step_count,
            **self.metadata,
            **extra,
        }
        return dump_json(path, meta)


@dataclass(frozen=True)
class Violation:
    t: float
    omega: float
    relative_deviation: float


def _delta_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.remainder(a - b + math.pi, 2 * math.pi) - math.pi

def rmse(a: Trace, b: Trace, signals: Iterable[str] = ('P', 'Q', 'E_norm', 'Ig_norm')) -> dict[str, float]:
    '''Root mean square difference per signal; angle differences are wrapped.'''
    if len(a) != len(b) or not np.allclose(a.times, b.times, rtol=0.0, atol=1e-9):
        raise TraceMismatchError(f'time grids differ ({len(a)} vs {len(b)} samples)')
    result = {}
    for name in signals:
        x, y = a.signal(name), b.signal(name)
        diff = _delta_difference(x, y) if name == 'delta' else x - y
        result[name] = float(np.sqrt(np.mean(diff ** 2)))
    return result

def assumption1_monitor(trace: Trace, eps: float = ASSUMPTION1_EPS) -> list[Violation]:
    '''Samples whose frequency leaves the band |ω − ω_b|/ω_b ≤ eps.'''
    omega = trace.signal('omega')
    deviation = np.abs(omega - trace.omega_b) / trace.omega_b
    return [Violation(t=float(trace.times[i]), omega=float(omega[i]), relative_deviation=float(deviation[i]))
            for i in np.flatnonzero(deviation > eps)]

def segment_end_indices(trace: Trace, boundaries: Sequence[float]) -> list[int]:
    '''Index of the last sample strictly before each boundary, and the final sample.'''
    indices = []
    for t in boundaries:
        i = int(np.searchsorted(trace.times, t - 1e-9)) - 1
        if i >= 0:
            indices.append(i)
    indices.append(len(trace) - 1)
    return sorted(set(indices))


__all__ = [
    'OUTPUT_NAMES',
    'CSV_COLUMNS',
    'Trace',
    'Violation',
    'rmse',
    'assumption1_monitor',
    'segment_end_indices',
]
