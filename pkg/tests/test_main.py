import json

import pytest

from istiefel import main as cli
from istiefel.bench.verify import CheckResult


@pytest.fixture
def runs_dir(monkeypatch, runs_settings):
    monkeypatch.setattr(cli, 'settings', runs_settings)
    return runs_settings.runs_dir


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])


def test_parser_run_options():
    args = cli.build_parser().parse_args(['run', '--problem', 'procrustes', '--max-iter', '5', '--k-p', '2'])
    assert args.problem == 'procrustes'
    assert args.max_iter == 5
    assert args.k_p == 2
    assert args.alpha is None


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / 'run'
    code = cli.main(['run', '--problem', 'trace', '--n', '12', '--k', '4', '--max-iter', '50', '--out', str(out), '--no-timing'])
    assert code == 0
    assert (out / 'history.csv').exists()
    summary = json.loads((out / 'summary.json').read_text())
    assert summary['config']['timing'] is False
    assert str(out) in capsys.readouterr().out


def test_run_default_output_directory(runs_dir):
    code = cli.main(['run', '--problem', 'procrustes', '--n', '6', '--metric', 'eucl', '--max-iter', '5', '--seed', '4'])
    assert code == 0
    assert (runs_dir / 'procrustes-eucl+qgeo-seed4' / 'summary.json').exists()


def test_run_config_file_with_overrides(tmp_path):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps({'problem': 'trace', 'n': 12, 'k': 4, 'solver': {'max_iter': 3, 'alpha': 0.0}}))
    out = tmp_path / 'run'
    assert cli.main(['run', '--config', str(config), '--max-iter', '4', '--out', str(out)]) == 0
    summary = json.loads((out / 'summary.json').read_text())
    assert summary['config']['solver']['max_iter'] == 4
    assert summary['config']['solver']['alpha'] == 0.0
    assert summary['iter'] <= 4


def test_run_invalid_configuration_returns_2(tmp_path):
    assert cli.main(['run', '--problem', 'procrustes', '--n', '6', '--k', '5', '--out', str(tmp_path)]) == 2
    assert cli.main(['run', '--problem', 'trace', '--n', '12', '--k', '4', '--delta', '3', '--out', str(tmp_path)]) == 2


def test_run_failed_status_returns_1(tmp_path, mocker):
    experiment = mocker.Mock()
    experiment.result.status = cli.RunStatus.LINE_SEARCH_FAILURE
    experiment.summary.status = 'LineSearchFailure'
    experiment.summary.obj = experiment.summary.grad = experiment.summary.feas = experiment.summary.cpu = 0.0
    experiment.summary.iter = experiment.summary.eval = 0
    mocker.patch.object(cli, 'run_experiment', return_value=experiment)
    assert cli.main(['run', '--out', str(tmp_path)]) == 1


def test_verify_exit_codes(mocker, capsys):
    mocker.patch.object(cli, 'verify', return_value=[CheckResult('kernel oracles', 1e-3, 1.0, 2)])
    assert cli.main(['verify', '--instances', '2']) == 0
    assert 'PASS' in capsys.readouterr().out

    mocker.patch.object(cli, 'verify', return_value=[CheckResult('kernel oracles', 2.0, 1.0, 2)])
    assert cli.main(['verify']) == 1
    assert 'FAIL' in capsys.readouterr().out


def test_verify_runs_selected_checks(capsys):
    assert cli.main(['verify', '--instances', '2', '--only', 'kernels']) == 0
    assert 'kernel oracles' in capsys.readouterr().out


def test_compare_writes_table(tmp_path):
    grid = tmp_path / 'grid.json'
    grid.write_text(json.dumps({'problem': 'procrustes', 'n': 6, 'solver': {'max_iter': 10}}))
    out = tmp_path / 'cmp'
    assert cli.main(['compare', '--grid', str(grid), '--out', str(out), '--workers', '1']) == 0
    lines = (out / 'comparison.csv').read_text().splitlines()
    assert lines[0].startswith('combination,obj,grad,feas,iter,eval,cpu')
    assert len(lines) == 3


def test_compare_missing_grid_returns_2(tmp_path):
    assert cli.main(['compare', '--grid', str(tmp_path / 'missing.json')]) == 2


def test_plot_writes_figure(tmp_path, populated_runs):
    out = tmp_path / 'fig.html'
    runs = [str(populated_runs / 'trace-gcan'), str(populated_runs / 'compare' / 'eucl+qgeo')]
    assert cli.main(['plot', '--runs', *runs, '--out', str(out)]) == 0
    assert out.exists()


def test_dashboard_command_runs_the_app(mocker):
    from istiefel.api import dashboard

    run = mocker.patch.object(dashboard.app, 'run')
    assert cli.main(['dashboard']) == 0
    run.assert_called_once()
    assert run.call_args.kwargs['port'] == cli.settings.dashboard_port
