"""Shipped example models: a driving domain, a barrier-screening demo graph,
and a minimal forced-swerve prohibition scenario."""

from pathlib import Path

_HERE = Path(__file__).parent


def fixture_path(name: str) -> Path:
    """Absolute path of a shipped fixture file, e.g. 'driving_tasks.json'."""
    path = _HERE / name
    if not path.is_file():
        raise FileNotFoundError(f"no such fixture: {name}")
    return path
