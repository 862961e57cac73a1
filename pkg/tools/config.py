# tools/config.py
import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from geometry.kempty import STRIP_RULES

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    """Environment-backed settings; CLI flags override them via `with_overrides`."""
    log_level: str = "WARNING"
    workers: int = 1
    strip_rule: str = "apex"
    report_dir: str = "."

    def __post_init__(self):
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"LATTICE_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {self.log_level!r}")
        if self.workers < 1:
            raise ValueError(f"LATTICE_WORKERS must be a positive integer, got {self.workers}")
        if self.strip_rule not in STRIP_RULES:
            raise ValueError(f"LATTICE_STRIP_RULE must be one of {', '.join(STRIP_RULES)}, got {self.strip_rule!r}")

    def with_overrides(self, **overrides) -> "Settings":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def load_settings(dotenv_path: Optional[str] = None) -> Settings:
    """
    Read LATTICE_* variables, after loading a .env file if one is present.

    Args:
        dotenv_path: explicit .env file; python-dotenv searches upwards when omitted

    Returns:
        Settings
    """
    load_dotenv(dotenv_path)
    return Settings(
        log_level=os.getenv("LATTICE_LOG_LEVEL", "WARNING").strip().upper(),
        workers=_int_env("LATTICE_WORKERS", 1),
        strip_rule=os.getenv("LATTICE_STRIP_RULE", "apex").strip().lower(),
        report_dir=os.getenv("LATTICE_REPORT_DIR", "."),
    )


def configure_logging(settings: Settings) -> None:
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
