"""Access to the ``AUTOBLOCK`` settings dict with built-in defaults."""
from pathlib import Path

from django.conf import settings

DEFAULTS = {
    'ADAPTATION_INTERVAL': 200,
    'DEFAULT_ITERATIONS': 10_000,
    'CUT_GRID': [round(0.1 * k, 1) for k in range(11)],
    'DISCARD_FRACTION': 0.5,
    'MAX_OUTER_ITERATIONS': 10,
    'REPORT_DIR': Path('.'),
}


def autoblock_setting(name):
    if name not in DEFAULTS:
        raise KeyError(f'Unknown AUTOBLOCK setting: {name}')
    configured = getattr(settings, 'AUTOBLOCK', {}) or {}
    return configured.get(name, DEFAULTS[name])


def resolve_output(path):
    """Resolve a command output path; relative paths land in REPORT_DIR."""
    path = Path(path)
    if path.is_absolute():
        return path
    return Path(autoblock_setting('REPORT_DIR')) / path
