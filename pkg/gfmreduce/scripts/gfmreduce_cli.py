import sys
import argparse

from pathlib import Path

try:
    from gfmreduce.analysis.properties import run_property_suites
    from gfmreduce.common_utils.constants import GFMREDUCE_SEED, OUTPUT_DIR, SLOW_FAST_CUTOFF, tidy_dir
    from gfmreduce.common_utils.debug_utils import get_logger, setup_logging
    from gfmreduce.common_utils.errors import GFMReduceError
    from gfmreduce.common_utils.file_utils import dump_json
    from gfmreduce.model.params import FIELD_BASES, ParameterSet, load_parameters, to_si
    from gfmreduce.scenario import (bundled_scenarios, compare, limiter_sweep, modal, modal_sweep,
                                    resolve_scenario, run, write_frame)
except ImportError:
    gfmreduce_path = Path(__file__).parent.parent.parent
    if str(gfmreduce_path) not in sys.path:
        sys.path.append(str(gfmreduce_path))
    from gfmreduce.analysis.properties import run_property_suites
    from gfmreduce.common_utils.constants import GFMREDUCE_SEED, OUTPUT_DIR, SLOW_FAST_CUTOFF, tidy_dir
    from gfmreduce.common_utils.debug_utils import get_logger, setup_logging
    from gfmreduce.common_utils.errors import GFMReduceError
    from gfmreduce.common_utils.file_utils import dump_json
    from gfmreduce.model.params import FIELD_BASES, ParameterSet, load_parameters, to_si
    from gfmreduce.scenario import (bundled_scenarios, compare, limiter_sweep, modal, modal_sweep,
                                    resolve_scenario, run, write_frame)

import pandas as pd

_logger = get_logger('gfmreduce.cli')

EXIT_CODES = '''exit codes:
  0  success
  1  unexpected error
  2  invalid input (parameters, scenario file, schedule)
  3  singular gain matrices
  4  solver failure (saturation-factor root, step size, non-finite state)
  5  no equilibrium found
  6  near-defective eigenvector matrix
  7  invariant breach (limiter cap exceeded, failed property suite)
'''


SEED_HELP = 'seed of the randomized property suites, defaults to GFMREDUCE_SEED'


def _load_scenario(args):
    scenario = resolve_scenario(args.scenario)
    if getattr(args, 'horizon', None) is not None:
        scenario = scenario.with_horizon(args.horizon)
    return scenario

def _out_dir(args) -> Path:
    return tidy_dir(args.out or OUTPUT_DIR)

def _at(value: str):
    return 't0' if value == 't0' else float(value)

# region subcommands
def cmd_run(args) -> int:
    scenario = _load_scenario(args)
    result = run(scenario, args.model, out_dir=_out_dir(args), strict=False)
    print(result.summary())
    return 7 if result.breaches else 0

def cmd_compare(args) -> int:
    scenario = _load_scenario(args)
    report = compare(scenario, out_dir=_out_dir(args), parallel=args.parallel)
    print(report.to_table())
    return 7 if report.has_breaches else 0

def cmd_modal(args) -> int:
    scenario = _load_scenario(args)
    report, partition = modal(scenario, at=args.at, cutoff=args.cutoff, out_dir=_out_dir(args))
    print(report.to_table(), end='')
    print(partition.describe())
    return 0

def cmd_modal_sweep(args) -> int:
    scenario = _load_scenario(args)
    frame = modal_sweep(scenario, args.p_star, args.q_star, cutoff=args.cutoff)
    path = write_frame(frame, _out_dir(args) / f'{scenario.name}_modal_sweep.csv')
    print(frame.to_string(index=False))
    _logger.success(f'wrote {path}')
    return 0

def cmd_limiter_sweep(args) -> int:
    frame = limiter_sweep(args.i_max, args.eps, args.norm_min, args.norm_max, args.points)
    path = write_frame(frame, _out_dir(args) / 'limiter_sweep.csv')
    _logger.success(f'wrote {len(frame)} rows to {path}')
    return 0

def cmd_params_show(args) -> int:
    params = load_parameters(args.source) if args.source else resolve_scenario(args.scenario).resolve_parameters()
    rows = []
    for name in ParameterSet.model_fields:
        value = getattr(params, name)
        base = FIELD_BASES.get(name)
        rows.append({'parameter': name, 'pu': value, 'base': base or '-',
                     'si': to_si(params, name) if base else float('nan')})
    print(pd.DataFrame(rows).to_string(index=False, na_rep='-', float_format=lambda v: f'{v:.6g}'))
    for warning in params.consistency_warnings():
        print(f'warning: {warning}')
    return 0

def cmd_check(args) -> int:
    params = load_parameters(args.params)
    seed = GFMREDUCE_SEED if args.seed is None else args.seed
    results = run_property_suites(params, seed=seed)
    for result in results:
        print(result.describe())
    if args.out:
        dump_json(tidy_dir(args.out) / 'check.json', {'seed': seed, 'results': [r.to_dict() for r in results]})
    return 0 if all(r.passed for r in results) else 7
# endregion

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gfmreduce',
        description='Full- and reduced-order simulation of a grid-forming inverter on an infinite bus.',
        epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--log-level', default=None, help='VERBOSE, DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--seed', type=int, default=None, help=SEED_HELP)
    sub = parser.add_subparsers(dest='command', required=True)

    scenario_help = f'scenario file or bundled name ({", ".join(bundled_scenarios())})'

    def scenario_command(name: str, help: str, horizon: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument('--scenario', required=True, help=scenario_help)
        p.add_argument('--out', type=str, default=None, help='output directory')
        if horizon:
            p.add_argument('--horizon', type=float, default=None, help='override the schedule horizon, s')
        return p

    p = scenario_command('run', 'simulate one model and write its trace')
    p.add_argument('--model', choices=('full', 'reduced'), default='full')
    p.set_defaults(func=cmd_run)

    p = scenario_command('compare', 'run full and reduced models and report their differences')
    p.add_argument('--parallel', action='store_true', help='run both models at once (wall times less reliable)')
    p.set_defaults(func=cmd_compare)

    p = scenario_command('modal', 'participation factors of the full model at an equilibrium', horizon=False)
    p.add_argument('--at', type=_at, default='t0', help='time whose inputs define the equilibrium, or t0')
    p.add_argument('--cutoff', type=float, default=SLOW_FAST_CUTOFF, help='slow/fast cutoff, rad/s')
    p.set_defaults(func=cmd_modal)

    p = scenario_command('modal-sweep', 'slow/fast partition over a grid of power setpoints', horizon=False)
    p.add_argument('--p-star', type=float, nargs='+', default=[0.0, 0.5, 1.0, 1.5, 2.0])
    p.add_argument('--q-star', type=float, nargs='+', default=[0.0, 0.5, 1.0, 1.5, 2.0])
    p.add_argument('--cutoff', type=float, default=SLOW_FAST_CUTOFF, help='slow/fast cutoff, rad/s')
    p.set_defaults(func=cmd_modal_sweep)

    p = sub.add_parser('limiter-sweep', help='exact and smooth saturation factors over a norm grid')
    p.add_argument('--i-max', type=float, default=1.2)
    p.add_argument('--eps', type=float, nargs='+', default=[0.1, 0.2, 0.3, 0.4])
    p.add_argument('--norm-min', type=float, default=0.1)
    p.add_argument('--norm-max', type=float, default=10.0)
    p.add_argument('--points', type=int, default=200)
    p.add_argument('--out', type=str, default=None, help='output directory')
    p.set_defaults(func=cmd_limiter_sweep)

    p = sub.add_parser('params', help='parameter sets')
    params_sub = p.add_subparsers(dest='params_command', required=True)
    show = params_sub.add_parser('show', help='print a parameter set in per unit and SI')
    group = show.add_mutually_exclusive_group()
    group.add_argument('source', nargs='?', default=None, help='named set, JSON file or JSON text')
    group.add_argument('--scenario', default=None, help=scenario_help)
    show.set_defaults(func=cmd_params_show)

    p = sub.add_parser('check', help='randomized property suites of the limiter, gains, manifold and Jacobian')
    p.add_argument('--seed', type=int, default=argparse.SUPPRESS, help=SEED_HELP)
    p.add_argument('--params', default='table1-inductive', help='named set, JSON file or JSON text')
    p.add_argument('--out', type=str, default=None, help='also write check.json here')
    p.set_defaults(func=cmd_check)
    return parser

def main(argv: list[str]|None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    if args.command == 'params' and args.source is None and args.scenario is None:
        args.source = 'table1'
    try:
        return args.func(args)
    except GFMReduceError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        _logger.exception(e)
        print(f"Error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
