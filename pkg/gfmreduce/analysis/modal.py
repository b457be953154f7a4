# -*- coding: utf-8 -*-
'''
Linear modal analysis: finite-difference Jacobians, eigenvalues,
participation factors and the slow/fast split of the states.

Participation of state i in mode j is |r_ij|·|l_ji|, normalized so each mode's
column sums to 1; left eigenvectors are the rows of the inverse right
eigenvector matrix. Reports also carry the column-max-normalized factors,
which the state classification uses.
'''
import math

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd
import scipy.linalg

from ..common_utils.constants import (CLASSIFICATION_TIE, EIGENVECTOR_CONDITION_LIMIT, JACOBIAN_STEP,
                                      SLOW_FAST_CUTOFF)
from ..common_utils.errors import NearDefectiveError, NonFiniteStateError
from ..common_utils.file_utils import atomic_write_text, dump_json


def jacobian_fd(rhs: Callable, x0, u0=None, step: float = JACOBIAN_STEP) -> np.ndarray:
    '''
    Central-difference Jacobian of `rhs(x)` (or `rhs(x, u0)` when `u0` is given).
    Column i uses the step max(step, step·|x0_i|).
    '''
    f = rhs if u0 is None else (lambda x: rhs(x, u0))
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    columns = []
    for i in range(n):
        h = max(step, step * abs(x0[i]))
        xp, xm = x0.copy(), x0.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = np.asarray(f(xp), dtype=float), np.asarray(f(xm), dtype=float)
        if not (np.isfinite(fp).all() and np.isfinite(fm).all()):
            raise NonFiniteStateError(f'non-finite derivative while perturbing state {i}')
        columns.append((fp - fm) / (xp[i] - xm[i]))
    return np.column_stack(columns)


@dataclass(frozen=True, eq=False)
class ModalReport:
    jacobian: np.ndarray|None
    eigenvalues: np.ndarray
    pf: np.ndarray
    '''state × mode, columns sum to 1'''
    pf_max_normalized: np.ndarray
    '''state × mode, column maxima are 1'''
    labels: tuple[str, ...]
    '''`slow` or `fast` per eigenvalue'''
    cutoff: float
    state_names: tuple[str, ...]
    equilibrium: np.ndarray|None = None

    def fast_mask(self) -> np.ndarray:
        return np.array([label == 'fast' for label in self.labels], dtype=bool)

    def dominant_eigenvalue(self, states: Sequence[str]) -> complex:
        '''Eigenvalue with the largest summed participation of `states`.'''
        rows = [self.state_names.index(s) for s in states]
        return complex(self.eigenvalues[int(np.argmax(self.pf[rows].sum(axis=0)))])

    def to_dict(self) -> dict:
        return {
            'cutoff': self.cutoff,
            'state_names': list(self.state_names),
            'eigenvalues': [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            'labels': list(self.labels),
            'pf': self.pf,
            'pf_max_normalized': self.pf_max_normalized,
            'jacobian': self.jacobian,
            'equilibrium': self.equilibrium,
        }

    def to_frame(self) -> pd.DataFrame:
        headers = [f'{v.real:.1f}{v.imag:+.1f}j ({label})' for v, label in zip(self.eigenvalues, self.labels)]
        return pd.DataFrame(self.pf_max_normalized, index=list(self.state_names), columns=headers)

    def to_table(self) -> str:
        '''Aligned text: participation (max-normalized) per state and eigenvalue.'''
        cutoff = 'inf' if math.isinf(self.cutoff) else f'{self.cutoff:g}'
        lines = [f'# fast modes (shaded region): Re(lambda) < -{cutoff} rad/s',
                 self.to_frame().to_string(float_format=lambda v: f'{v:.3f}')]
        return '\n'.join(lines) + '\n'

    def write(self, out_dir: str|Path, stem: str = 'modal') -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        json_path = dump_json(out_dir / f'{stem}.json', self.to_dict())
        table_path = atomic_write_text(out_dir / f'{stem}.txt', self.to_table())
        return json_path, table_path


@dataclass(frozen=True)
class StatePartition:
    slow: tuple[str, ...]
    fast: tuple[str, ...]
    ambiguous: tuple[str, ...]
    cutoff: float

    def describe(self) -> str:
        text = f'slow = {{{", ".join(self.slow)}}} | fast = {{{", ".join(self.fast)}}}'
        if self.ambiguous:
            text += f' | ambiguous = {{{", ".join(self.ambiguous)}}}'
        return text

    def to_dict(self) -> dict:
        return {'slow': list(self.slow), 'fast': list(self.fast),
                'ambiguous': list(self.ambiguous), 'cutoff': self.cutoff}


def _labels(eigenvalues: np.ndarray, cutoff: float) -> tuple[str, ...]:
    return tuple('fast' if v.real < -cutoff else 'slow' for v in eigenvalues)

def participation_matrix(A, cutoff: float = SLOW_FAST_CUTOFF,
                         state_names: Sequence[str]|None = None) -> ModalReport:
    '''Eigenvalues and participation factors of A, ordered from the slowest mode.'''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eigenvalues, R = scipy.linalg.eig(A)
    condition = float(np.linalg.cond(R))
    if not math.isfinite(condition) or condition > EIGENVECTOR_CONDITION_LIMIT:
        raise NearDefectiveError(f'eigenvector matrix is near defective (condition {condition:.3g})',
                                 condition=condition)
    order = np.lexsort((eigenvalues.imag, -eigenvalues.real))
    eigenvalues, R = eigenvalues[order], R[:, order]
    L = np.linalg.inv(R)
    weights = np.abs(R) * np.abs(L).T
    pf = weights / weights.sum(axis=0, keepdims=True)
    pf_max = pf / pf.max(axis=0, keepdims=True)
    names = tuple(state_names) if state_names is not None else tuple(f'x{i}' for i in range(n))
    return ModalReport(jacobian=np.ascontiguousarray(A), eigenvalues=eigenvalues, pf=pf, pf_max_normalized=pf_max,
                       labels=_labels(eigenvalues, cutoff), cutoff=cutoff, state_names=names)

def classify_states(report: ModalReport, cutoff: float|None = None) -> StatePartition:
    '''
    A state is fast when its largest normalized participation in fast modes
    exceeds the largest in slow modes. Near-ties are reported as ambiguous.
    '''
    cutoff = report.cutoff if cutoff is None else cutoff
    fast_modes = np.array([v.real < -cutoff for v in report.eigenvalues], dtype=bool)
    slow, fast, ambiguous = [], [], []
    for i, name in enumerate(report.state_names):
        row = report.pf_max_normalized[i]
        fast_max = float(row[fast_modes].max(initial=0.0))
        slow_max = float(row[~fast_modes].max(initial=0.0))
        if abs(fast_max - slow_max) <= CLASSIFICATION_TIE:
            ambiguous.append(name)
        elif fast_max > slow_max:
            fast.append(name)
        else:
            slow.append(name)
    return StatePartition(slow=tuple(slow), fast=tuple(fast), ambiguous=tuple(ambiguous), cutoff=cutoff)


__all__ = ['jacobian_fd', 'ModalReport', 'StatePartition', 'participation_matrix', 'classify_states']
