"""Load configuration from .env and the process environment."""
from __future__ import annotations

import os
from pathlib import Path

# Load .env from project root (parent of causal_horizon/) so scripts work from any cwd
_env_path = Path(__file__).resolve().parent.parent / ".env"
if _env_path.is_file():
    from dotenv import load_dotenv
    load_dotenv(_env_path, override=False)


def _get(key: str) -> str:
    return os.environ.get(key, "").strip()


def _get_int(key: str, default: int) -> int:
    raw = _get(key)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{key} must be an integer, got {raw!r}") from None


def output_dir() -> str:
    """CAUSAL_HORIZON_OUT: overrides --out when set."""
    return _get("CAUSAL_HORIZON_OUT")


def default_workers() -> int:
    n = _get_int("CAUSAL_HORIZON_WORKERS", 1)
    if n < 1:
        raise ValueError("CAUSAL_HORIZON_WORKERS must be >= 1")
    return n


def default_seed() -> int:
    return _get_int("CAUSAL_HORIZON_SEED", 0)


def log_level() -> str:
    """CAUSAL_HORIZON_LOG_LEVEL: standard logging level name (default WARNING)."""
    return (_get("CAUSAL_HORIZON_LOG_LEVEL") or "WARNING").upper()
