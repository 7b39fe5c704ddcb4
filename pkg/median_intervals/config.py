"""
Median Intervals - Configuration
================================

This module provides:
1. Fixed constants shared across modules (word mask, file magic)
2. Settings dataclass with the tunable knobs
3. Environment overrides (CFMG_THREADS, CFMG_BASE_SIZE, CFMG_ORACLE_LIMIT)

Usage:
    from median_intervals.config import Settings
    settings = Settings.from_env()
"""

import logging
import os
from dataclasses import dataclass, replace
from typing import Mapping, Optional

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
MAGIC = b"CFMG1"
FORMAT_VERSION = 1

DEFAULT_BASE_SIZE = 32
DEFAULT_ORACLE_LIMIT = 2000
DEFAULT_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class Settings:
    """
    Tunable knobs for construction, verification and the CLI

    Attributes:
        base_size: Fibers with at most this many vertices are answered by BFS
        oracle_limit: Largest n the brute-force verifiers accept without force
        threads: Worker count for query batches
        max_attempts: Rejection budget of the random generator families
        fingerprint_seed: Seed for per-vertex fingerprint tokens
    """

    base_size: int = DEFAULT_BASE_SIZE
    oracle_limit: int = DEFAULT_ORACLE_LIMIT
    threads: int = 1
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    fingerprint_seed: int = 0

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        """
        Build settings from environment variables

        Args:
            environ: Mapping to read from (defaults to os.environ)

        Returns:
            Settings with valid overrides applied
        """
        env = os.environ if environ is None else environ
        return cls(
            base_size=_positive_int(env, "CFMG_BASE_SIZE", DEFAULT_BASE_SIZE),
            oracle_limit=_positive_int(env, "CFMG_ORACLE_LIMIT", DEFAULT_ORACLE_LIMIT),
            threads=_positive_int(env, "CFMG_THREADS", 1),
        )

    def with_overrides(self, **changes) -> "Settings":
        """Return a copy with the non-None keyword values replaced"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _positive_int(env: Mapping[str, str], name: str, default: int) -> int:
    raw = env.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        logger.warning(f"WARNING: ignoring {name}={raw!r}, using {default}")
        return default
    return value
