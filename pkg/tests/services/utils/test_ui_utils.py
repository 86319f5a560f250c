import dash_bootstrap_components as dbc
from dash import html

from istiefel.bench.reporting import RunSummary
from istiefel.services.utils import ui_utils as ui


def make_summary(status='Converged'):
    return RunSummary(status=status, obj=1.5, grad=2e-6, feas=3e-15, iter=12, eval=20, cpu=0.5, lyapunov_solves=0)


def test_status_badge_colors():
    assert ui.status_badge('Converged').color == 'success'
    assert ui.status_badge('MaxIter').color == 'warning'
    assert ui.status_badge('LineSearchFailure').color == 'danger'
    assert ui.status_badge('Unknown').color == 'secondary'


def test_summary_table_empty():
    result = ui.summary_table({})
    assert isinstance(result, html.P)
    assert result.children == 'No run selected.'


def test_summary_table_skips_unreadable_runs():
    assert isinstance(ui.summary_table({'broken': None}), html.P)


def test_summary_table_rows():
    table = ui.summary_table({'a': make_summary(), 'b': make_summary('MaxIter'), 'broken': None})
    assert isinstance(table, dbc.Table)
    header, body = table.children
    assert [th.children for th in header.children.children] == list(ui.SUMMARY_COLUMNS)
    assert len(body.children) == 2
    first = body.children[0].children
    assert first[0].children == 'a'
    assert first[2].children == '1.500e+00'
    assert first[5].children == '12'


def test_card_style_is_shared():
    assert ui.card_style['borderRadius'] == '12px'


def test_summary_table_shows_missing_values():
    summary = make_summary('Failed').model_copy(update={'obj': None, 'grad': None})
    first = ui.summary_table({'a': summary}).children[1].children[0].children
    assert first[2].children == 'n/a'
    assert first[3].children == 'n/a'
