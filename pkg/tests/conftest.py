import numpy as np
import pytest

from config.settings import settings
from istiefel.bench.problems import gen_procrustes_problem, gen_random_instance, gen_trace_problem
from istiefel.core.metrics import clear_mx_cache
from istiefel.services.utils.file_utils import invalidate_runs_cache


@pytest.fixture(autouse=True)
def clear_caches():
    clear_mx_cache()
    invalidate_runs_cache()
    yield
    clear_mx_cache()
    invalidate_runs_cache()


@pytest.fixture
def instance():
    """Small random (spec, point) with a mixed-signature J."""
    return gen_random_instance(8, 3, 1, seed=7)


@pytest.fixture(params=[(6, 2, 0), (8, 3, 1), (10, 4, 2)], ids=['k2-pos', 'k3-mixed', 'k4-mixed'])
def instances(request):
    n, k, k_neg = request.param
    return gen_random_instance(n, k, k_neg, seed=11 * n + k)


@pytest.fixture
def small_trace():
    return gen_trace_problem(n=12, k=4, p=9, m=3, k_p=2, k_m=2, seed=0)


@pytest.fixture
def small_procrustes():
    return gen_procrustes_problem(n=8, p=6, m=2, rank_deficit=2, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def runs_settings(tmp_path):
    """Settings copy whose runs root is a temporary directory."""
    return settings.model_copy(update={'runs_dir': tmp_path / 'runs'})


@pytest.fixture
def populated_runs(tmp_path):
    """Runs root holding two complete runs, one nested grid run and one broken run."""
    from istiefel.bench.reporting import RunSummary, write_history, write_summary
    from istiefel.core.optimizer import IterationRecord

    root = tmp_path / 'runs'
    history = [
        IterationRecord(j, 2.0 / (j + 1), 1.0 / (j + 1), 1e-15, 0.5, j + 1, 2.0, 1.0, 1e-3, 0, 0, 0.0)
        for j in range(3)
    ]
    for name, status in (('trace-gcan', 'Converged'), ('compare/eucl+qgeo', 'MaxIter')):
        summary = RunSummary(
            status=status, obj=2.0 / 3, grad=1.0 / 3, feas=1e-15, iter=2, eval=3, cpu=0.1, lyapunov_solves=0
        )
        write_summary(summary, root / name / 'summary.json')
        write_history(history, root / name / 'history.csv')
    (root / 'broken').mkdir()
    (root / 'broken' / 'summary.json').write_text('{not json')
    return root
