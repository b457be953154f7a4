# -*- coding: utf-8 -*-
'''
Scenario execution: single runs, full-vs-reduced comparisons, modal reports
and limiter sweeps. Everything here writes batch artifacts; nothing plots.
'''
import math

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd

from pydantic import BaseModel

from ..analysis.equilibrium import find_equilibrium, modal_analysis
from ..analysis.modal import ModalReport, StatePartition, classify_states
from ..common_utils.concurrent_utils import map_in_background
from ..common_utils.constants import ASSUMPTION1_EPS, SLOW_FAST_CUTOFF, tidy_dir
from ..common_utils.debug_utils import get_logger
from ..common_utils.errors import GFMReduceError, InvariantBreach, ParameterError
from ..common_utils.file_utils import atomic_write_text, dump_json
from ..model.full_order import Inputs
from ..model.limiter import rho_exact_min, rho_smooth
from ..model.params import ParameterSet
from ..model.reduced_order import LimiterMode
from ..simulate.engine import STATE_NAMES, ModelKind, integrate
from ..simulate.trace import Trace, Violation, assumption1_monitor, rmse, segment_end_indices
from .configs import Scenario

_logger = get_logger(__name__)

CAP_TOLERANCE = 1e-6
COMPARED_SIGNALS = ('P', 'Q', 'E_norm', 'Ig_norm')


# region single runs
def model_kind(scenario: Scenario, model: Literal['full', 'reduced']|str) -> ModelKind:
    '''`reduced` resolves to the reduced model matching the scenario's line type.'''
    if model == 'reduced':
        return ModelKind(scenario.reduced_model)
    return ModelKind(model)

def initial_state(scenario: Scenario, model: ModelKind, params: ParameterSet) -> np.ndarray:
    '''
    Explicit initial states are full-model vectors; reduced models take their
    slow components. `equilibrium` solves at the t=0 inputs.
    '''
    if scenario.initial_state == 'equilibrium':
        return find_equilibrium(model, scenario.schedule.inputs_at(0.0), params, scenario.limiter_mode)
    x = np.array(scenario.initial_state, dtype=float)
    return x[:len(STATE_NAMES[model])]

def simulate(scenario: Scenario, model: Literal['full', 'reduced']|str,
             params: ParameterSet|None = None) -> Trace:
    '''Integrate one model of a scenario, no files written.'''
    kind = model_kind(scenario, model)
    params = params or scenario.resolve_parameters()
    x0 = initial_state(scenario, kind, params)
    cfg = scenario.solver_for(kind.value)
    trace = integrate(kind, x0, scenario.schedule, cfg, params, scenario.limiter_mode)
    return trace

def invariant_breaches(trace: Trace, tol: float = CAP_TOLERANCE) -> list[str]:
    '''Limiter cap and finiteness checks on a recorded trace.'''
    breaches = []
    if not trace.all_finite():
        breaches.append('trace has non-finite samples')
    full = trace.model == ModelKind.FULL.value
    if not full and trace.metadata.get('limiter_mode') == LimiterMode.NONE.value:
        return breaches
    checks = [('limited current reference', 'limited_reference_norm')]
    if not full:
        checks.append(('manifold inverter current', 'Ii_norm'))
    for label, name in checks:
        values = trace.signal(name)
        worst = float(np.max(values)) if len(values) else 0.0
        if worst > trace.I_max * (1.0 + tol):
            i = int(np.argmax(values))
            breaches.append(f'{label} {worst:.9g} exceeds I_max={trace.I_max:g} at t={trace.times[i]:.6g} s')
    return breaches


@dataclass
class RunResult:
    trace: Trace
    csv_path: Path|None = None
    meta_path: Path|None = None
    violations: list[Violation] = field(default_factory=list)
    breaches: list[str] = field(default_factory=list)

    def summary(self) -> str:
        t = self.trace
        lines = [f'model        {t.model}',
                 f'samples      {len(t)} (dt {t.record_dt:g} s)',
                 f'wall time    {t.wall_time:.3f} s, {t.step_count} steps',
                 'final state  ' + ', '.join(f'{n}={v:.6g}' for n, v in zip(t.state_names, t.final_state()))]
        if self.violations:
            first = self.violations[0]
            lines.append(f'frequency    {len(self.violations)} samples outside the ±{ASSUMPTION1_EPS:.3%} band, '
                         f'first at t={first.t:.6g} s ({first.omega / (2 * math.pi):.4f} Hz)')
        else:
            lines.append('frequency    within band')
        lines.extend(f'BREACH       {b}' for b in self.breaches)
        if self.csv_path is not None:
            lines.append(f'written      {self.csv_path}')
        return '\n'.join(lines)


def _report_violations(trace: Trace) -> list[Violation]:
    violations = assumption1_monitor(trace)
    if violations:
        worst = max(v.relative_deviation for v in violations)
        _logger.warning(f'{trace.model}: frequency left the ±{ASSUMPTION1_EPS:.3%} band at {len(violations)} '
                        f'samples, from t={violations[0].t:.6g} s, worst {worst:.3%}')
    return violations

def export_trace(trace: Trace, scenario: Scenario, out_dir: str|Path,
                 violations: Sequence[Violation], breaches: Sequence[str]) -> tuple[Path, Path]:
    '''`<name>_<model>.csv` and its JSON sidecar (solver, wall time, violations, breaches).'''
    out_dir = tidy_dir(out_dir)
    stem = f'{scenario.name}_{trace.model}'
    csv_path = trace.write_csv(out_dir / f'{stem}.csv')
    meta_path = trace.write_metadata(
        out_dir / f'{stem}.json', scenario=scenario.name, line_type=scenario.line_type,
        assumption1_violations=len(violations),
        first_violation_t=violations[0].t if violations else None,
        breaches=list(breaches),
    )
    _logger.success(f'{stem}: wrote {csv_path.name} and {meta_path.name}')
    return csv_path, meta_path

def run(scenario: Scenario, model: Literal['full', 'reduced']|str = 'full',
        out_dir: str|Path|None = None, strict: bool = True) -> RunResult:
    '''
    Simulate and write `<name>_<model>.csv` with its JSON sidecar.
    With `strict`, an invariant breach raises after the files are written.
    '''
    trace = simulate(scenario, model)
    violations = _report_violations(trace)
    breaches = invariant_breaches(trace)
    result = RunResult(trace=trace, violations=violations, breaches=breaches)
    if out_dir is not None:
        result.csv_path, result.meta_path = export_trace(trace, scenario, out_dir, violations, breaches)
    if breaches and strict:
        raise InvariantBreach('; '.join(breaches))
    return result
# endregion

# region comparison
class ComparisonReport(BaseModel):
    scenario: str
    reduced_model: str
    rmse: dict[str, float]
    '''reduced vs full, per signal'''
    steady_state_deltas: dict[str, float]
    '''largest |reduced − full| of each slow state at the ends of the schedule segments'''
    wall_time_full: float
    wall_time_reduced: float
    speedup: float
    assumption1_violations: int
    '''samples of the reduced run outside the frequency band'''
    first_violation_t: float|None = None
    breaches: dict[str, list[str]] = {}
    '''invariant breaches per model, see `invariant_breaches`'''

    @property
    def has_breaches(self) -> bool:
        return any(self.breaches.values())

    def to_table(self) -> str:
        frame = pd.DataFrame({'rmse': pd.Series(self.rmse), 'steady_state_delta': pd.Series(self.steady_state_deltas)})
        lines = [f'scenario {self.scenario}: full vs {self.reduced_model}',
                 frame.to_string(float_format=lambda v: f'{v:.3e}', na_rep='-'),
                 f'wall time full {self.wall_time_full:.3f} s, reduced {self.wall_time_reduced:.3f} s, '
                 f'speedup {self.speedup:.1f}x']
        if self.assumption1_violations:
            lines.append(f'frequency band left at {self.assumption1_violations} samples, '
                         f'first at t={self.first_violation_t:.6g} s')
        else:
            lines.append('frequency within band')
        for model, found in self.breaches.items():
            lines.extend(f'BREACH {model}: {b}' for b in found)
        return '\n'.join(lines)


def steady_state_deltas(full: Trace, reduced: Trace, boundaries: Sequence[float]) -> dict[str, float]:
    indices = segment_end_indices(full, boundaries)
    deltas = {}
    for name in reduced.state_names:
        a, b = full.signal(name)[indices], reduced.signal(name)[indices]
        diff = np.abs(np.remainder(a - b + math.pi, 2 * math.pi) - math.pi) if name == 'delta' else np.abs(a - b)
        deltas[name] = float(np.max(diff))
    return deltas

def compare_traces(scenario: Scenario, full: Trace, reduced: Trace) -> ComparisonReport:
    violations = assumption1_monitor(reduced)
    boundaries = [b.t for b in scenario.schedule.breakpoints[1:]]
    return ComparisonReport(
        scenario=scenario.name,
        reduced_model=reduced.model,
        rmse=rmse(reduced, full, COMPARED_SIGNALS),
        steady_state_deltas=steady_state_deltas(full, reduced, boundaries),
        wall_time_full=full.wall_time,
        wall_time_reduced=reduced.wall_time,
        speedup=full.wall_time / reduced.wall_time if reduced.wall_time > 0 else math.inf,
        assumption1_violations=len(violations),
        first_violation_t=violations[0].t if violations else None,
        breaches={trace.model: invariant_breaches(trace) for trace in (full, reduced)},
    )

def compare(scenario: Scenario, out_dir: str|Path|None = None, parallel: bool = False) -> ComparisonReport:
    '''
    Run the full and the matching reduced model on the same record grid.
    Parallel runs share the CPU, so their wall times are only indicative.
    '''
    params = scenario.resolve_parameters()
    full_cfg = scenario.solver_for('full')
    reduced_cfg = scenario.solver_for(scenario.reduced_model)
    if reduced_cfg.record_dt != full_cfg.record_dt:
        reduced_cfg = reduced_cfg.model_copy(update={'record_dt': full_cfg.record_dt})
    scenario = scenario.model_copy(update={'reduced_solver': reduced_cfg})
    full, reduced = map_in_background(lambda m: simulate(scenario, m, params), ['full', 'reduced'], parallel=parallel)
    report = compare_traces(scenario, full, reduced)
    if out_dir is not None:
        out_dir = tidy_dir(out_dir)
        for trace in (full, reduced):
            export_trace(trace, scenario, out_dir, assumption1_monitor(trace), report.breaches[trace.model])
        report_path = dump_json(out_dir / f'{scenario.name}_comparison.json', report.model_dump(mode='json'))
        _logger.success(f'{scenario.name}: wrote {report_path.name}')
    return report
# endregion

# region modal
def modal(scenario: Scenario, at: float|Literal['t0'] = 't0', cutoff: float = SLOW_FAST_CUTOFF,
          out_dir: str|Path|None = None) -> tuple[ModalReport, StatePartition]:
    '''Full-model participation report at the equilibrium of the inputs active at `at`.'''
    t = 0.0 if at == 't0' else float(at)
    params = scenario.resolve_parameters()
    report = modal_analysis(ModelKind.FULL, scenario.schedule.inputs_at(t), params, cutoff=cutoff)
    partition = classify_states(report, cutoff)
    if out_dir is not None:
        json_path, _ = report.write(tidy_dir(out_dir), stem=f'{scenario.name}_modal')
        _logger.success(f'{scenario.name}: wrote {json_path.name}')
    return report, partition

def modal_sweep(scenario: Scenario, P_values: Sequence[float], Q_values: Sequence[float],
                cutoff: float = SLOW_FAST_CUTOFF, parallel: bool = True) -> pd.DataFrame:
    '''
    Slow/fast partition of the full model over a grid of power setpoints at
    the scenario's t=0 grid voltage. Points without an equilibrium are kept
    with their error message.
    '''
    params = scenario.resolve_parameters()
    V_DQ = scenario.schedule.inputs_at(0.0).V_DQ

    def evaluate(S_star: tuple[float, float]) -> dict:
        row = {'P_star': S_star[0], 'Q_star': S_star[1]}
        try:
            report = modal_analysis(ModelKind.FULL, Inputs.Of(S_star, V_DQ), params, cutoff=cutoff)
        except GFMReduceError as e:
            return {**row, 'slow': '', 'fast': '', 'ambiguous': '', 'gamma_eigenvalue': math.nan, 'error': str(e)}
        partition = classify_states(report, cutoff)
        return {**row,
                'slow': ' '.join(partition.slow),
                'fast': ' '.join(partition.fast),
                'ambiguous': ' '.join(partition.ambiguous),
                'gamma_eigenvalue': float(report.dominant_eigenvalue(('Gammad', 'Gammaq')).real),
                'error': ''}

    grid = [(float(P), float(Q)) for P in P_values for Q in Q_values]
    return pd.DataFrame(map_in_background(evaluate, grid, parallel=parallel))
# endregion

def limiter_sweep(I_max: float, eps_list: Sequence[float], norm_min: float, norm_max: float,
                  n: int = 200) -> pd.DataFrame:
    '''
    Exact and smooth saturation factors over log-spaced reference norms, one
    block of rows per ε. The grid always contains I_max when it lies in range.
    '''
    if not (I_max > 0 and norm_min > 0 and norm_max > norm_min and n >= 2 and all(e > 0 for e in eps_list)):
        raise ParameterError('limiter sweep needs positive I_max and ε, 0 < norm_min < norm_max and n ≥ 2')
    norms = np.geomspace(norm_min, norm_max, n)
    if norm_min <= I_max <= norm_max:
        norms = np.union1d(norms, [I_max])
    exact = np.array([rho_exact_min(x, I_max) for x in norms])
    blocks = []
    for eps in eps_list:
        smooth = rho_smooth(norms, I_max, eps)
        blocks.append(pd.DataFrame({'eps_sat': eps, 'ref_norm': norms, 'exact': exact,
                                    'smooth': smooth, 'gap': exact - smooth}))
    return pd.concat(blocks, ignore_index=True)

def write_frame(frame: pd.DataFrame, path: str|Path) -> Path:
    return atomic_write_text(path, frame.to_csv(index=False, float_format='%.17g', lineterminator='\n'))


__all__ = [
    'CAP_TOLERANCE',
    'model_kind',
    'initial_state',
    'simulate',
    'invariant_breaches',
    'RunResult',
    'export_trace',
    'run',
    'ComparisonReport',
    'steady_state_deltas',
    'compare_traces',
    'compare',
    'modal',
    'modal_sweep',
    'limiter_sweep',
    'write_frame',
]
