"""Bundled power-grid voltage-control example models."""

from pathlib import Path

FIXTURE_DIR = Path(__file__).resolve().parent


def fixture_path(name: str) -> Path:
    """Path to a bundled model file: 'workflow', 'system', or 'attacker'."""
    path = FIXTURE_DIR / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
