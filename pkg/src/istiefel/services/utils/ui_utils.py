"""
This module is used to centralize utilities for the user interface.

Features:
- Shared card style
- Summary table of selected runs with the obj/grad/feas/iter/eval/cpu columns
- Status badges

Dependencies:
- Dash and dash-bootstrap-components for the html outputs
"""

import dash_bootstrap_components as dbc
from dash import html

from istiefel.bench.reporting import RunSummary

card_style = {
    'backgroundColor': '#e9f5ff',  # custom light blue
    'color': '#333333',
    'borderRadius': '12px',
    'boxShadow': '0 4px 12px rgba(0, 0, 0, 0.08)',
    'padding': '20px',
    'marginBottom': '20px',
}

SUMMARY_COLUMNS = ('run', 'status', 'obj', 'grad', 'feas', 'iter', 'eval', 'cpu', 'lyapunov_solves')

STATUS_COLORS = {
    'Converged': 'success',
    'MaxIter': 'warning',
    'LineSearchFailure': 'danger',
    'Failed': 'danger',
}


def status_badge(status: str) -> dbc.Badge:
    return dbc.Badge(status, color=STATUS_COLORS.get(status, 'secondary'), className='ms-1')


def _cell(value) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, float):
        return f'{value:.3e}'
    return str(value)


def summary_table(summaries: dict[str, RunSummary | None]) -> dbc.Table | html.P:
    """Table with one row per run; unreadable runs are skipped."""
    rows = []
    for run, summary in summaries.items():
        if summary is None:
            continue
        values = summary.model_dump()
        cells = [html.Td(run), html.Td(status_badge(summary.status))]
        cells += [html.Td(_cell(values[col])) for col in SUMMARY_COLUMNS[2:]]
        rows.append(html.Tr(cells))

    if not rows:
        return html.P('No run selected.', className='text-muted')

    header = html.Thead(html.Tr([html.Th(col) for col in SUMMARY_COLUMNS]))
    return dbc.Table([header, html.Tbody(rows)], bordered=True, hover=True, size='sm', responsive=True)
