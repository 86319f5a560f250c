"""
This module is used to discover and load benchmark runs for the dashboard.

Features:
- List run directories (any folder holding a `summary.json`) under the runs root
- Load summaries and histories with short-lived in-memory caches, for listed runs only
- Invalidate the caches after new runs are written

Dependencies:
- cachetools for the TTL caches

Configuration:
- The runs root defaults to `settings.runs_dir`

Usage:
Import from the dashboard to populate dropdowns, tables and figures.
"""

import logging
from pathlib import Path

from cachetools import TTLCache, cached
from cachetools.keys import hashkey

from config.logging import setup_logging
from config.settings import settings
from istiefel.bench.reporting import RunSummary, load_history, load_summary

# Cache up to 256 distinct lookups for 30 seconds; runs appear while the UI is open
_runs_cache = TTLCache(maxsize=256, ttl=30)

setup_logging()
logger = logging.getLogger(__name__)


def runs_root(root: str | Path | None = None) -> Path:
    return Path(root) if root is not None else Path(settings.runs_dir)


@cached(_runs_cache, key=lambda root: hashkey('list_runs', str(root)))
def _cached_list_runs(root: Path) -> tuple[str, ...]:
    if not root.is_dir():
        return ()
    return tuple(sorted(str(p.parent.relative_to(root)) for p in root.rglob('summary.json')))


def list_runs(root: str | Path | None = None) -> list[str]:
    """Run directories relative to the runs root, sorted."""
    root = runs_root(root)
    runs = list(_cached_list_runs(root))
    logger.debug(f'{len(runs)} runs found under {root}')
    return runs


@cached(_runs_cache, key=lambda root, run: hashkey('summary', str(root), run))
def _cached_summary(root: Path, run: str) -> RunSummary | None:
    path = root / run / 'summary.json'
    try:
        return load_summary(path)
    except (OSError, ValueError) as e:
        logger.warning(f'cannot read {path}: {e}')
        return None


@cached(_runs_cache, key=lambda root, run: hashkey('history', str(root), run))
def _cached_history(root: Path, run: str) -> tuple[dict, ...]:
    path = root / run / 'history.csv'
    try:
        return tuple(load_history(path))
    except (OSError, ValueError, KeyError) as e:
        logger.warning(f'cannot read {path}: {e}')
        return ()


def _known_run(run: str, root: Path) -> bool:
    if run in _cached_list_runs(root):
        return True
    logger.warning(f'ignoring unknown run {run!r} under {root}')
    return False


def get_summary(run: str, root: str | Path | None = None) -> RunSummary | None:
    """Summary of a listed run; None for anything `list_runs` does not return."""
    root = runs_root(root)
    if not _known_run(run, root):
        return None
    return _cached_summary(root, run)


def get_history(run: str, root: str | Path | None = None) -> list[dict]:
    root = runs_root(root)
    if not _known_run(run, root):
        return []
    return list(_cached_history(root, run))


def invalidate_runs_cache():
    """Clear every cached listing, summary and history."""
    _runs_cache.clear()
