'''
Segment-wise integration, traces, error metrics and the frequency-band monitor.
'''
import math

import numpy as np
import pytest

from gfmreduce.analysis.equilibrium import find_equilibrium
from gfmreduce.common_utils.constants import ASSUMPTION1_EPS
from gfmreduce.common_utils.errors import ScheduleError, StateError, TraceMismatchError
from gfmreduce.simulate.configs import Breakpoint, InputSchedule, SolverConfig
from gfmreduce.simulate.engine import integrate, model_rhs
from gfmreduce.simulate.trace import CSV_COLUMNS, Trace, assumption1_monitor, rmse, segment_end_indices

OMEGA_B = 2 * math.pi * 60


def _synthetic(n: int = 11, P_offset: float = 0.0, omega=None) -> Trace:
    times = np.linspace(0.0, 1.0, n)
    states = np.column_stack([np.zeros(n), np.ones(n), np.full(n, 0.5), np.zeros(n)])
    columns = np.zeros((n, 12))
    columns[:, :4] = states
    outputs = np.zeros((n, 4))
    outputs[:, 0] = np.sin(times) + P_offset
    outputs[:, 2] = OMEGA_B if omega is None else omega
    outputs[:, 3] = 1.0
    return Trace(model='reduced-L', state_names=('delta', 'E_star', 'Igd', 'Igq'), times=times, states=states,
                 columns=columns, outputs=outputs, reference_norm=np.full(n, 0.5), wall_time=0.0, step_count=0,
                 omega_b=OMEGA_B, I_max=1.2)


class TestSchedule:

    def test_segments_and_lookup(self):
        schedule = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=(0.1, 0.0)),
                                              Breakpoint(t=1.0, S_star=(0.5, 0.2), V_DQ=(0.9, 0.0))),
                                 horizon=2.0)
        assert [(a, b) for a, b, _ in schedule.segments()] == [(0.0, 1.0), (1.0, 2.0)]
        assert schedule.inputs_at(0.999).S_star == (0.1, 0.0)
        assert schedule.inputs_at(1.0).V_DQ.d == 0.9
        with pytest.raises(ScheduleError):
            schedule.inputs_at(2.5)

    def test_invalid_schedules(self):
        with pytest.raises(ValueError):
            InputSchedule(breakpoints=(Breakpoint(t=0.5, S_star=(0.0, 0.0)),), horizon=1.0)
        with pytest.raises(ValueError):
            InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=(0.0, 0.0)),
                                       Breakpoint(t=0.0, S_star=(1.0, 0.0))), horizon=1.0)
        with pytest.raises(ValueError):
            InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=(0.0, 0.0)),
                                       Breakpoint(t=2.0, S_star=(1.0, 0.0))), horizon=1.0)

    def test_solver_config_bounds(self):
        with pytest.raises(ValueError):
            SolverConfig(rtol=1e-13)
        with pytest.raises(ValueError):
            SolverConfig(dt=0.0)
        assert SolverConfig.Defaults('full').dt_max == 1e-3
        assert SolverConfig.Defaults('reduced').dt_max == 5e-3

    def test_record_times(self):
        times = InputSchedule.Constant((0.0, 0.0), horizon=1.0).record_times(1e-3)
        assert len(times) == 1001
        assert times[-1] == pytest.approx(1.0)


class TestIntegrate:

    def test_reduced_equilibrium_persists(self, params, light_inputs):
        x_eq = find_equilibrium('reduced-L', light_inputs, params)
        schedule = InputSchedule.Constant(light_inputs.S_star, tuple(light_inputs.V_DQ), horizon=1.0)
        trace = integrate('reduced-L', x_eq, schedule, params=params)
        assert np.abs(trace.states - x_eq).max() < 1e-8
        assert len(trace) == 1001
        assert trace.all_finite()

    def test_full_equilibrium_persists(self, params, light_inputs):
        x_eq = find_equilibrium('full', light_inputs, params)
        schedule = InputSchedule.Constant(light_inputs.S_star, tuple(light_inputs.V_DQ), horizon=0.05)
        cfg = SolverConfig(method='rk4-fixed', dt=2e-5)
        trace = integrate('full', x_eq, schedule, cfg, params)
        assert np.abs(trace.states - x_eq).max() < 1e-8
        assert trace.step_count == 2500

    def test_restart_at_breakpoint(self, params, light_inputs):
        x_eq = find_equilibrium('reduced-L', light_inputs, params)
        step = (0.5, 0.2)
        cfg = SolverConfig(method='rk4-fixed', dt=1e-4)
        whole = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=step),), horizon=0.2)
        split = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=step), Breakpoint(t=0.1, S_star=step)),
                              horizon=0.2)
        a = integrate('reduced-L', x_eq, whole, cfg, params)
        b = integrate('reduced-L', x_eq, split, cfg, params)
        np.testing.assert_allclose(a.states, b.states, rtol=0, atol=1e-9)

    def test_repeat_runs_are_identical(self, params, light_inputs):
        x0 = find_equilibrium('reduced-L', light_inputs, params)
        schedule = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=light_inputs.S_star),
                                              Breakpoint(t=0.2, S_star=(0.6, 0.2))), horizon=0.5)
        a = integrate('reduced-L', x0, schedule, params=params)
        b = integrate('reduced-L', x0, schedule, params=params)
        np.testing.assert_array_equal(a.states, b.states)
        assert rmse(a, b) == {'P': 0.0, 'Q': 0.0, 'E_norm': 0.0, 'Ig_norm': 0.0}

    def test_self_convergence(self, params, light_inputs):
        x0 = find_equilibrium('reduced-L', light_inputs, params)
        schedule = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=light_inputs.S_star),
                                              Breakpoint(t=0.5, S_star=(0.8, 0.3))), horizon=2.0)
        coarse = integrate('reduced-L', x0, schedule, SolverConfig(rtol=1e-6, atol=1e-8, dt_max=5e-3), params)
        fine = integrate('reduced-L', x0, schedule, SolverConfig(rtol=1e-9, atol=1e-11, dt_max=5e-3), params)
        assert np.abs(coarse.final_state() - fine.final_state()).max() < 1e-5

    def test_adaptive_and_fixed_agree(self, params, light_inputs):
        x0 = find_equilibrium('reduced-L', light_inputs, params)
        schedule = InputSchedule(breakpoints=(Breakpoint(t=0.0, S_star=(0.8, 0.3)),), horizon=0.3)
        adaptive = integrate('reduced-L', x0, schedule, SolverConfig(rtol=1e-9, atol=1e-11), params)
        fixed = integrate('reduced-L', x0, schedule, SolverConfig(method='rk4-fixed', dt=2e-5), params)
        assert np.abs(adaptive.final_state() - fixed.final_state()).max() < 1e-6

    def test_reduced_trace_has_reconstructed_columns(self, params_resistive, light_inputs):
        x0 = find_equilibrium('reduced-R', light_inputs, params_resistive)
        schedule = InputSchedule.Constant(light_inputs.S_star, horizon=0.1)
        trace = integrate('reduced-R', x0, schedule, params=params_resistive)
        assert trace.states.shape == (101, 2)
        assert trace.columns.shape == (101, 12)
        assert trace.to_frame().columns.tolist() == list(CSV_COLUMNS)
        np.testing.assert_allclose(trace.signal('omega'), params_resistive.omega_b, rtol=1e-9)

    def test_wrong_initial_dimension(self, params, light_inputs):
        schedule = InputSchedule.Constant(light_inputs.S_star, horizon=0.1)
        with pytest.raises(StateError):
            integrate('full', np.ones(4), schedule, params=params)

    def test_rhs_closure(self, params, light_inputs):
        x_eq = find_equilibrium('reduced-L', light_inputs, params)
        assert np.linalg.norm(model_rhs('reduced-L', light_inputs, params)(x_eq)) < 1e-8


class TestTraceMetrics:

    def test_rmse_of_identical_traces(self):
        assert rmse(_synthetic(), _synthetic(), ('P',)) == {'P': 0.0}

    def test_rmse_of_constant_offset(self):
        assert rmse(_synthetic(), _synthetic(P_offset=0.25), ('P',))['P'] == pytest.approx(0.25)

    def test_rmse_wraps_angles(self):
        a = _synthetic()
        columns = a.columns.copy()
        columns[:, 0] = 2 * math.pi
        b = Trace(**{**a.__dict__, 'columns': columns})
        assert rmse(a, b, ('delta',))['delta'] == pytest.approx(0.0, abs=1e-12)

    def test_grid_mismatch(self):
        with pytest.raises(TraceMismatchError):
            rmse(_synthetic(11), _synthetic(12))

    def test_trace_is_read_only(self):
        trace = _synthetic()
        with pytest.raises(ValueError):
            trace.states[0, 0] = 1.0

    def test_csv_export(self, tmp_path):
        path = _synthetic().write_csv(tmp_path / 'trace.csv')
        lines = path.read_text().splitlines()
        assert lines[0] == ','.join(CSV_COLUMNS)
        assert len(lines) == 12

    def test_segment_ends(self):
        assert segment_end_indices(_synthetic(), [0.5]) == [4, 10]


class TestFrequencyBand:

    def test_nominal_frequency_has_no_violations(self):
        assert assumption1_monitor(_synthetic()) == []

    def test_band_edges(self):
        eps = ASSUMPTION1_EPS
        assert OMEGA_B * (1 - eps) / (2 * math.pi) == pytest.approx(59.77, abs=5e-3)
        assert OMEGA_B * (1 + eps) / (2 * math.pi) == pytest.approx(60.23, abs=5e-3)

    def test_single_excursion(self):
        omega = np.full(11, OMEGA_B)
        omega[6] = 2 * math.pi * 61
        violations = assumption1_monitor(_synthetic(omega=omega))
        assert len(violations) == 1
        assert violations[0].t == pytest.approx(0.6)
        assert violations[0].omega == pytest.approx(2 * math.pi * 61)
