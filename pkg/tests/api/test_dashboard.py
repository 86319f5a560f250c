import pytest
from dash import html

from istiefel.api import dashboard
from istiefel.services.utils import file_utils


@pytest.fixture
def client():
    # Flask test client for the server
    dashboard.server.config['TESTING'] = True
    with dashboard.server.test_client() as client:
        yield client


@pytest.fixture
def runs_root(monkeypatch, populated_runs, runs_settings):
    monkeypatch.setattr(file_utils, 'settings', runs_settings.model_copy(update={'runs_dir': populated_runs}))
    return populated_runs


def test_health_check(client):
    response = client.get('/health')
    assert response.status_code == 200
    assert response.data == b'OK'


def test_index_serves_the_app(client):
    response = client.get('/')
    assert response.status_code == 200


def test_layout_components():
    ids = {'run-selector', 'refresh-runs', 'summary-table', 'history-graph'}
    found = set()

    def walk(component):
        if getattr(component, 'id', None) in ids:
            found.add(component.id)
        children = getattr(component, 'children', None)
        if isinstance(children, list):
            for child in children:
                walk(child)
        elif children is not None and not isinstance(children, str):
            walk(children)

    walk(dashboard.app.layout)
    assert found == ids


def test_run_options(runs_root):
    options = dashboard.run_options()
    assert {'label': 'trace-gcan', 'value': 'trace-gcan'} in options
    assert len(options) == 3


def test_run_options_refresh_invalidates_cache(runs_root, mocker):
    invalidate = mocker.spy(dashboard, 'invalidate_runs_cache')
    dashboard.run_options(n_clicks=None)
    assert invalidate.call_count == 0
    dashboard.run_options(n_clicks=1)
    assert invalidate.call_count == 1


def test_render_runs_nothing_selected(runs_root):
    table, figure = dashboard.render_runs(None)
    assert isinstance(table, html.P)
    assert len(figure.data) == 0


def test_render_runs(runs_root):
    table, figure = dashboard.render_runs(['trace-gcan', 'compare/eucl+qgeo', 'broken'])
    body = table.children[1]
    assert len(body.children) == 2
    assert len(figure.data) == 4
