'''
Scenario documents, batch runs and the command line.
'''
import math

import numpy as np
import orjson
import pandas as pd
import pytest

from gfmreduce.common_utils.errors import ParameterError, ScenarioError
from gfmreduce.model.reduced_order import reduced_L_rhs
from gfmreduce.scenario import (Scenario, bundled_scenarios, compare, initial_state, limiter_sweep, modal_sweep,
                                model_kind, resolve_scenario, run, simulate)
from gfmreduce.scripts.gfmreduce_cli import main
from gfmreduce.simulate.trace import rmse

BUNDLED = {'default-inductive', 'default-resistive', 'modal-inductive', 'modal-resistive',
           'limiter-inactive', 'limiter-engaged'}


def _document(**overrides) -> dict:
    doc = {
        'name': 'case',
        'line_type': 'inductive',
        'schedule': {'breakpoints': [{'t': 0.0, 'S_star': [0.3, 0.1]}], 'horizon': 0.2},
    }
    doc.update(overrides)
    return doc


class TestScenarioDocuments:

    def test_bundled_set(self):
        assert set(bundled_scenarios()) == BUNDLED
        for name in BUNDLED:
            assert resolve_scenario(name).name == name

    def test_round_trip(self):
        scenario = resolve_scenario('default-inductive')
        assert Scenario.Parse(scenario.dumps()) == scenario

    def test_generic_table_follows_line_type(self):
        inductive = Scenario.Parse(_document()).resolve_parameters()
        resistive = Scenario.Parse(_document(line_type='resistive')).resolve_parameters()
        assert inductive.L_g > resistive.L_g
        assert resistive.R_g > inductive.R_g
        assert Scenario.Parse(_document(line_type='resistive')).reduced_model == 'reduced-R'

    def test_loose_keys(self):
        doc = _document(**{'Limiter-Mode': 'none'})
        doc['Line-Type'] = doc.pop('line_type')
        scenario = Scenario.Parse(doc)
        assert scenario.line_type == 'inductive'
        assert scenario.limiter_mode.value == 'none'

    def test_invalid_json_reports_position(self):
        with pytest.raises(ScenarioError) as info:
            Scenario.Parse('{\n  "name": "case",\n  "schedule": \n}')
        assert info.value.line is not None
        assert info.value.exit_code == 2

    def test_unknown_key(self):
        with pytest.raises(ScenarioError) as info:
            Scenario.Parse(_document(horizon_seconds=3.0))
        assert 'horizon_seconds' in str(info.value)

    def test_explicit_state_length(self):
        with pytest.raises(ScenarioError):
            Scenario.Parse(_document(initial_state=[0.0, 1.0]))

    def test_missing_scenario(self):
        with pytest.raises(ScenarioError):
            resolve_scenario('no-such-scenario')

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / 'case.json'
        path.write_bytes(Scenario.Parse(_document()).dumps())
        assert resolve_scenario(str(path)).schedule.horizon == 0.2

    def test_horizon_override(self):
        scenario = resolve_scenario('default-inductive').with_horizon(3.0)
        assert scenario.schedule.horizon == 3.0
        assert [b.t for b in scenario.schedule.breakpoints] == [0.0, 2.0]


class TestRuns:

    def test_initial_equilibrium(self):
        scenario = resolve_scenario('limiter-inactive')
        params = scenario.resolve_parameters()
        kind = model_kind(scenario, 'reduced')
        x0 = initial_state(scenario, kind, params)
        assert np.linalg.norm(reduced_L_rhs(x0, scenario.schedule.inputs_at(0.0), params)) < 1e-8

    def test_explicit_initial_state_is_sliced(self):
        x = (0.05, 1.0, 0.3, 0.1, 0.3, 0.1, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        scenario = Scenario.Parse(_document(initial_state=list(x)))
        params = scenario.resolve_parameters()
        np.testing.assert_array_equal(initial_state(scenario, model_kind(scenario, 'reduced'), params), x[:4])

    def test_identical_runs_give_zero_error(self):
        scenario = resolve_scenario('limiter-inactive').with_horizon(0.5)
        a, b = simulate(scenario, 'reduced'), simulate(scenario, 'reduced')
        assert all(v == 0.0 for v in rmse(a, b).values())

    def test_reduced_run_writes_files(self, tmp_path):
        scenario = resolve_scenario('limiter-inactive').with_horizon(0.5)
        result = run(scenario, 'reduced', out_dir=tmp_path)
        assert result.csv_path.name == 'limiter-inactive_reduced-L.csv'
        assert result.breaches == []
        frame = pd.read_csv(result.csv_path)
        assert len(frame) == 501
        meta = orjson.loads(result.meta_path.read_bytes())
        assert meta['scenario'] == 'limiter-inactive'
        assert meta['state_names'] == ['delta', 'E_star', 'Igd', 'Igq']

    def test_limiter_engaged_reduced(self):
        result = run(resolve_scenario('limiter-engaged'), 'reduced')
        trace = result.trace
        assert result.breaches == []
        assert trace.signal('rho').min() < 0.9
        assert trace.signal('Ii_norm').max() <= trace.I_max * (1 + 1e-6)
        assert trace.signal('reference_norm').max() >= 2.0 * trace.I_max
        assert trace.signal('limited_reference_norm').max() <= trace.I_max * (1 + 1e-6)

    @pytest.mark.slow
    def test_limiter_engaged_full(self):
        result = run(resolve_scenario('limiter-engaged'), 'full')
        trace = result.trace
        assert trace.signal('limited_reference_norm').max() <= trace.I_max * (1 + 1e-6)
        assert trace.signal('rho').min() < 0.9
        assert trace.signal('reference_norm').max() >= 2.0 * trace.I_max
        assert result.breaches == []

    def test_comparison_writes_both_sidecars(self, tmp_path):
        report = compare(resolve_scenario('limiter-inactive').with_horizon(0.2), out_dir=tmp_path)
        assert report.breaches == {'full': [], 'reduced-L': []}
        assert not report.has_breaches
        for model in ('full', 'reduced-L'):
            assert (tmp_path / f'limiter-inactive_{model}.csv').is_file()
            meta = orjson.loads((tmp_path / f'limiter-inactive_{model}.json').read_bytes())
            assert meta['model'] == model
            assert meta['scenario'] == 'limiter-inactive'
            assert {'solver', 'wall_time', 'breaches', 'assumption1_violations'} <= meta.keys()

    @pytest.mark.slow
    def test_default_comparison(self, tmp_path):
        report = compare(resolve_scenario('default-inductive'), out_dir=tmp_path)
        assert max(report.rmse.values()) < 0.05
        assert report.speedup >= 5.0
        assert (tmp_path / 'default-inductive_comparison.json').is_file()

    @pytest.mark.slow
    def test_inactive_limiter_steady_states_agree(self):
        report = compare(resolve_scenario('limiter-inactive'))
        assert max(report.steady_state_deltas.values()) < 1e-4


class TestModalSweep:

    def test_small_grid(self):
        frame = modal_sweep(resolve_scenario('modal-inductive'), [0.5, 1.0], [0.2], parallel=False)
        assert frame.columns.tolist() == ['P_star', 'Q_star', 'slow', 'fast', 'ambiguous', 'gamma_eigenvalue', 'error']
        assert len(frame) == 2
        assert (frame.error == '').all()
        for slow in frame.slow:
            assert 'delta' in slow.split() and 'E_star' in slow.split()
        assert (frame.gamma_eigenvalue < 0.0).all()


class TestLimiterSweep:

    def test_grid_contains_the_knee(self):
        frame = limiter_sweep(1.2, [0.1, 0.2], 0.1, 10.0, 50)
        knee = frame[(frame.eps_sat == 0.1) & np.isclose(frame.ref_norm, 1.2)]
        assert len(knee) == 1
        assert knee.smooth.iloc[0] == pytest.approx(1.0 - 0.1 * math.log(2.0), abs=1e-15)
        assert knee.exact.iloc[0] == pytest.approx(1.0)
        assert len(frame) == 2 * 51

    def test_gap_within_bounds(self):
        frame = limiter_sweep(1.2, [0.1, 0.2, 0.3, 0.4], 0.01, 100.0, 400)
        assert (frame.gap >= -1e-12).all()
        assert (frame.gap <= frame.eps_sat * math.log(2.0) + 1e-12).all()

    def test_bad_range(self):
        with pytest.raises(ParameterError):
            limiter_sweep(1.2, [0.1], 10.0, 1.0)


class TestCommandLine:

    def test_run_reduced(self, tmp_path, capsys):
        code = main(['run', '--scenario', 'limiter-inactive', '--model', 'reduced',
                     '--horizon', '0.5', '--out', str(tmp_path)])
        assert code == 0
        assert 'reduced-L' in capsys.readouterr().out
        frame = pd.read_csv(tmp_path / 'limiter-inactive_reduced-L.csv')
        assert frame.columns.tolist()[0] == 't'
        assert len(frame.columns) == 17

    def test_run_resistive_sidecar(self, tmp_path):
        code = main(['run', '--scenario', 'default-resistive', '--model', 'reduced',
                     '--horizon', '1.0', '--out', str(tmp_path)])
        assert code == 0
        meta = orjson.loads((tmp_path / 'default-resistive_reduced-R.json').read_bytes())
        assert meta['state_names'] == ['delta', 'E_star']

    def test_missing_scenario(self, tmp_path, capsys):
        assert main(['run', '--scenario', 'no-such-scenario', '--out', str(tmp_path)]) == 2
        assert capsys.readouterr().err.startswith('Error:')

    def test_modal(self, tmp_path, capsys):
        assert main(['modal', '--scenario', 'modal-inductive', '--out', str(tmp_path)]) == 0
        last = capsys.readouterr().out.strip().splitlines()[-1]
        slow = last.split('|')[0]
        for name in ('delta', 'E_star', 'Igd', 'Igq'):
            assert name in slow
        assert (tmp_path / 'modal-inductive_modal.json').is_file()

    def test_modal_huge_cutoff(self, tmp_path, capsys):
        assert main(['modal', '--scenario', 'modal-resistive', '--cutoff', '1e9', '--out', str(tmp_path)]) == 0
        assert 'fast = {}' in capsys.readouterr().out

    def test_limiter_sweep(self, tmp_path):
        assert main(['limiter-sweep', '--eps', '0.1', '--points', '20', '--out', str(tmp_path)]) == 0
        frame = pd.read_csv(tmp_path / 'limiter_sweep.csv')
        knee = frame[np.isclose(frame.ref_norm, 1.2)]
        assert knee.smooth.iloc[0] == pytest.approx(1.0 - 0.1 * math.log(2.0), abs=1e-15)

    def test_params_show(self, capsys):
        assert main(['params', 'show', 'table1-resistive']) == 0
        out = capsys.readouterr().out
        assert 'I_max' in out and 'omega_b' in out

    def test_params_show_scenario(self, capsys):
        assert main(['params', 'show', '--scenario', 'default-inductive']) == 0

    def test_check(self, tmp_path, capsys):
        assert main(['check', '--seed', '1', '--out', str(tmp_path)]) == 0
        data = orjson.loads((tmp_path / 'check.json').read_bytes())
        assert data['seed'] == 1
        assert all(r['passed'] for r in data['results'])

    def test_compare_exits_on_breach(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setattr('gfmreduce.scenario.runner.invariant_breaches', lambda trace, tol=0.0: ['forced'])
        code = main(['compare', '--scenario', 'limiter-inactive', '--horizon', '0.2', '--out', str(tmp_path)])
        assert code == 7
        assert 'BREACH' in capsys.readouterr().out
        meta = orjson.loads((tmp_path / 'limiter-inactive_reduced-L.json').read_bytes())
        assert meta['breaches'] == ['forced']

    def test_compare_clean(self, tmp_path):
        assert main(['compare', '--scenario', 'limiter-inactive', '--horizon', '0.2', '--out', str(tmp_path)]) == 0

    @pytest.mark.parametrize('argv', [['--seed', '3', 'check'], ['check', '--seed', '3']])
    def test_seed_before_or_after_command(self, argv, tmp_path):
        assert main([*argv, '--out', str(tmp_path)]) == 0
        assert orjson.loads((tmp_path / 'check.json').read_bytes())['seed'] == 3

    def test_seed_in_top_level_help(self, capsys):
        with pytest.raises(SystemExit):
            main(['--help'])
        assert '--seed' in capsys.readouterr().out
