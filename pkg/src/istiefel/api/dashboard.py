"""
iStiefelOpt run browser

This module sets up a Flask server integrated with a Dash application to
browse the benchmark runs written by `istiefel-opt run` and `compare`.

Features:
- Run selector listing every directory with a `summary.json` under the runs root
- Summary table with the obj, grad, feas, iter, eval and cpu columns
- Convergence-history figure (f − f_best and gradient norm, log scale)
- Healthcheck endpoint for monitoring

Dependencies:
- Flask for the server
- Dash and dash-bootstrap-components for the web UI
- plotly for the figures

Configuration:
- The runs root is `settings.runs_dir`; host and port come from `config.settings`

Usage:
Run `istiefel-opt dashboard` (or `python -m istiefel.main dashboard`).
"""

import logging

import dash_bootstrap_components as dbc
from dash import Dash, dcc, html
from dash.dependencies import Input, Output
from flask import Flask

from config.logging import setup_logging
from config.settings import settings
from istiefel.bench.reporting import history_figure
from istiefel.services.utils.file_utils import (
    get_history,
    get_summary,
    invalidate_runs_cache,
    list_runs,
)
from istiefel.services.utils.ui_utils import card_style, summary_table

setup_logging()
logger = logging.getLogger(__name__)

# --- Flask server setup ---
server = Flask(__name__)


# --- Healthcheck route ---
@server.route('/health')
def health_check():
    """Simple healthcheck endpoint."""
    return 'OK', 200


# --- Dash app setup ---
app = Dash(
    __name__,
    server=server,
    url_base_pathname='/',
    suppress_callback_exceptions=True,
    external_stylesheets=[dbc.themes.BOOTSTRAP],
    meta_tags=[{'name': 'viewport', 'content': 'width=device-width, initial-scale=1'}],
)
app.title = 'iStiefelOpt runs'

app.layout = html.Div(
    [
        html.Nav(
            html.Div(html.Span('iStiefelOpt', className='navbar-brand'), className='container'),
            className='navbar navbar-dark bg-dark',
        ),
        html.Div(
            [
                html.Br(),
                html.Div(
                    [
                        html.H4('Runs', className='fw-bold'),
                        html.P(f'Browsing {settings.runs_dir}', className='text-muted'),
                        dcc.Dropdown(id='run-selector', multi=True, placeholder='Select runs...'),
                        html.Button('Refresh', id='refresh-runs', className='btn btn-secondary btn-sm mt-2'),
                    ],
                    style=card_style,
                ),
                html.Div(id='summary-table', style=card_style),
                html.Div(dcc.Graph(id='history-graph'), style=card_style),
            ],
            className='container',
        ),
    ],
    style={'background-color': '#e9ecef', 'minHeight': '100vh'},
)


def run_options(n_clicks=None):
    """Dropdown options for every run found under the runs root."""
    if n_clicks:
        invalidate_runs_cache()
    return [{'label': run, 'value': run} for run in list_runs()]


def render_runs(selected):
    """Summary table and convergence figure for the selected runs."""
    selected = selected or []
    table = summary_table({run: get_summary(run) for run in selected})
    figure = history_figure({run: get_history(run) for run in selected})
    return table, figure


@app.callback(Output('run-selector', 'options'), Input('refresh-runs', 'n_clicks'))
def update_run_options(n_clicks):
    return run_options(n_clicks)


@app.callback(
    Output('summary-table', 'children'),
    Output('history-graph', 'figure'),
    Input('run-selector', 'value'),
)
def update_selection(selected):
    logger.debug(f'selected runs: {selected}')
    return render_runs(selected)
