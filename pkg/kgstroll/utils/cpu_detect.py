# kgstroll/utils/cpu_detect.py
# Worker-pool sizing that respects container CPU quotas.
#
# os.cpu_count() reports host CPUs inside Docker/K8s; the cgroup quota
# (v2 cpu.max, then v1 cfs quota/period) is the real budget for
# walk extraction and training threads.

from __future__ import annotations

import math
import os
from pathlib import Path

from loguru import logger

__all__ = ["available_cpus", "resolve_workers"]

_CPU_MAX = Path("/sys/fs/cgroup/cpu.max")
_CFS_QUOTA = Path("/sys/fs/cgroup/cpu/cpu.cfs_quota_us")
_CFS_PERIOD = Path("/sys/fs/cgroup/cpu/cpu.cfs_period_us")


def _quota_v2() -> float | None:
    """cpu.max holds "<quota> <period>" or "max <period>"."""
    try:
        fields = _CPU_MAX.read_text().split()
    except OSError:
        return None
    if len(fields) != 2 or fields[0] == "max":
        return None
    try:
        quota, period = int(fields[0]), int(fields[1])
    except ValueError:
        return None
    return quota / period if period > 0 else None


def _quota_v1() -> float | None:
    try:
        quota = int(_CFS_QUOTA.read_text())
        period = int(_CFS_PERIOD.read_text())
    except (OSError, ValueError):
        return None
    # -1 = unlimited
    return quota / period if quota > 0 and period > 0 else None


def available_cpus() -> int:
    """CPUs this process may use (cgroup v2, cgroup v1, host count); always >= 1."""
    for source, reader in (("cgroup-v2", _quota_v2), ("cgroup-v1", _quota_v1)):
        quota = reader()
        if quota is not None:
            cpus = max(1, math.floor(quota))
            logger.debug(f"event=cpu_detect source={source} quota={quota:.2f} cpus={cpus}")
            return cpus
    cpus = os.cpu_count() or 1
    logger.debug(f"event=cpu_detect source=host cpus={cpus}")
    return cpus


def resolve_workers(requested: int) -> int:
    """Map a worker request to a pool width: 0 = auto, otherwise as given."""
    if requested < 0:
        raise ValueError(f"workers must be >= 0, got {requested}")
    return available_cpus() if requested == 0 else requested
