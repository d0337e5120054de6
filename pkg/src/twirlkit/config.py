"""Numerical tolerances shared by every module.

A single record holds all thresholds so that test harnesses can tighten or
relax them in one place. ``TWIRLKIT_TOL_OVERRIDE`` may carry a JSON object
whose keys are field names of :class:`Tolerances`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-12
    eig_residual: float = 1e-9
    rank_drop: float = 1e-10
    unit_circle: float = 1e-10
    dedup: float = 1e-8
    subspace: float = 1e-8
    null_space: float = 1e-9
    angle: float = 1e-9
    state: float = 1e-12
    psd: float = 1e-10
    max_side: int = 10_000


def _from_env() -> Tolerances:
    raw = os.environ.get("TWIRLKIT_TOL_OVERRIDE")
    if not raw:
        return Tolerances()
    data = json.loads(raw)
    known = {f.name for f in fields(Tolerances)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
    return replace(Tolerances(), **data)


TOL = _from_env()


def set_tolerances(**overrides) -> Tolerances:
    """Replace the module-wide tolerance record; returns the previous one."""
    global TOL
    old = TOL
    TOL = replace(TOL, **overrides)
    return old


def get_tolerances() -> Tolerances:
    return TOL
