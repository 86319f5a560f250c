"""
Command-line entry point `istiefel-opt`.

Subcommands:
- run        one solver run on a benchmark problem, writes history.csv and summary.json
- verify     the geometry property checks; exit code 1 when any check fails
- compare    a metric × retraction grid from a JSON config, writes comparison.csv
- plot       convergence-history figure (HTML) for one or more run directories
- dashboard  serve the run browser
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config.logging import setup_logging
from config.settings import settings
from istiefel.bench.reporting import history_figure, load_history, write_history_figure
from istiefel.bench.runner import GridSpec, RunSpec, compare, load_run_spec, run_experiment
from istiefel.bench.verify import CHECKS, verify
from istiefel.core.errors import InvalidParameterError, IStiefelError
from istiefel.core.optimizer import RunStatus

setup_logging()
logger = logging.getLogger(__name__)

SOLVER_OPTIONS = ('beta', 'delta', 'gamma0', 'gamma_min', 'gamma_max', 'alpha', 'rstop', 'max_iter', 'max_backtracks')
DIMENSION_OPTIONS = ('n', 'k', 'p', 'm', 'k_p', 'k_m', 'rank_deficit')


def _num(value: float | None, spec: str) -> str:
    return 'n/a' if value is None else format(value, spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='istiefel-opt',
        description='Riemannian optimization on the indefinite Stiefel manifold.',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run the solver on a benchmark problem')
    run.add_argument('--config', type=Path, help='JSON RunSpec; command-line options override it')
    run.add_argument('--problem', choices=['trace', 'procrustes'])
    run.add_argument('--metric', choices=['eucl', 'gcan'])
    run.add_argument('--gamma3', choices=['A', 'B'])
    run.add_argument('--retraction', choices=['qgeo'])
    run.add_argument('--rho', type=float)
    for dim in DIMENSION_OPTIONS:
        run.add_argument(f'--{dim.replace("_", "-")}', dest=dim, type=int)
    run.add_argument('--seed', type=int)
    for name in SOLVER_OPTIONS:
        kind = int if name in ('max_iter', 'max_backtracks') else float
        run.add_argument(f'--{name.replace("_", "-")}', dest=name, type=kind)
    run.add_argument('--out', type=Path, help='output directory (default: under the runs root)')
    run.add_argument('--no-timing', action='store_true', help='write 0 in the elapsed column')
    run.add_argument('--save-point', action='store_true', help='also write the final iterate')

    ver = sub.add_parser('verify', help='run the property checks')
    ver.add_argument('--seed', type=int, default=0)
    ver.add_argument('--instances', type=int, default=20)
    ver.add_argument('--only', nargs='+', choices=sorted(CHECKS))

    cmp_ = sub.add_parser('compare', help='run a metric × retraction grid')
    cmp_.add_argument('--grid', type=Path, required=True, help='JSON GridSpec')
    cmp_.add_argument('--out', type=Path)
    cmp_.add_argument('--workers', type=int)

    plot = sub.add_parser('plot', help='write the convergence figure of run directories')
    plot.add_argument('--runs', type=Path, nargs='+', required=True)
    plot.add_argument('--out', type=Path, default=None)

    sub.add_parser('dashboard', help='serve the run browser')
    return parser


def _run_spec(args: argparse.Namespace) -> RunSpec:
    base = json.loads(args.config.read_text()) if args.config else {}
    for key in ('problem', 'metric', 'gamma3', 'retraction', 'rho', 'seed', 'out', *DIMENSION_OPTIONS):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    solver = dict(base.get('solver', {}))
    solver.update({name: getattr(args, name) for name in SOLVER_OPTIONS if getattr(args, name) is not None})
    base['solver'] = solver
    if args.no_timing:
        base['timing'] = False
    if args.save_point:
        base['save_point'] = True

    try:
        rs = RunSpec.model_validate(base)
    except ValidationError as e:
        raise InvalidParameterError(f'invalid run configuration: {e}') from e
    if rs.out is None:
        rs = rs.model_copy(update={'out': Path(settings.runs_dir) / f'{rs.problem}-{rs.label}-seed{rs.seed}'})
    return rs


def cmd_run(args: argparse.Namespace) -> int:
    experiment = run_experiment(_run_spec(args))
    s = experiment.summary
    print(
        f'{s.status}: obj={_num(s.obj, ".6e")} grad={_num(s.grad, ".3e")} feas={s.feas:.3e} '
        f'iter={s.iter} eval={s.eval} cpu={s.cpu:.2f}s -> {experiment.out_dir}'
    )
    failed = {RunStatus.FAILED, RunStatus.LINE_SEARCH_FAILURE}
    return 1 if experiment.result.status in failed else 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = verify(seed=args.seed, instances=args.instances, only=args.only)
    for res in results:
        print(f'{"PASS" if res.passed else "FAIL"}  {res.name:<28} worst={res.worst:.3e} tol={res.tolerance:.1e}')
    return 0 if all(res.passed for res in results) else 1


def cmd_compare(args: argparse.Namespace) -> int:
    grid = load_run_spec(args.grid, GridSpec)
    if args.out is not None:
        grid = grid.model_copy(update={'out': args.out})
    elif grid.out is None:
        grid = grid.model_copy(update={'out': Path(settings.runs_dir) / f'compare-{grid.problem}-seed{grid.seed}'})
    rows = compare(grid, workers=args.workers)
    for row in rows:
        print(
            f'{row["combination"]:<16} obj={_num(row["obj"], ".6e")} grad={_num(row["grad"], ".3e")} feas={row["feas"]:.3e} '
            f'iter={row["iter"]} eval={row["eval"]} cpu={row["cpu"]:.2f}s solves={row["lyapunov_solves"]}'
        )
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    histories = {run.name: load_history(run / 'history.csv') for run in args.runs}
    out = args.out or Path(settings.runs_dir) / 'convergence.html'
    write_history_figure(history_figure(histories), out)
    return 0


def cmd_dashboard(args: argparse.Namespace) -> int:
    from istiefel.api.dashboard import app

    logger.info('Dashboard starting...')
    app.run(
        host=settings.dashboard_host,
        port=settings.dashboard_port,
        debug=settings.env == 'development' and settings.debug,
    )
    return 0


COMMANDS = {
    'run': cmd_run,
    'verify': cmd_verify,
    'compare': cmd_compare,
    'plot': cmd_plot,
    'dashboard': cmd_dashboard,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (IStiefelError, OSError, ValueError) as e:
        logger.error(f'{args.command} failed: {e}')
        return 2


if __name__ == '__main__':
    sys.exit(main())
