"""JSON serialisation of ensembles and construction specs.

Ensemble files::

    {"dim": 2, "items": [{"p": 0.5, "u": [[[re, im], ...], ...]}, ...]}

``dim`` is the size of each stored matrix. Stored matrices may be single-qudit
blocks (lifted to u (x) u on load) or full bipartite operators.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .channels import ChannelError, UnitaryEnsemble, factor_collective
from .qudit import AParams, ConstructionSpec, build_ensemble


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(data: Any) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _read_items(data: dict) -> tuple[int, list[float], list[np.ndarray]]:
    if not isinstance(data, dict) or "items" not in data:
        raise InputError("ensemble JSON needs an 'items' list")
    items = data["items"]
    if not isinstance(items, list) or not items:
        raise InputError("'items' must be a non-empty list")
    probs, mats = [], []
    for k, it in enumerate(items):
        if not isinstance(it, dict) or "p" not in it or "u" not in it:
            raise InputError(f"item {k} needs keys 'p' and 'u'")
        probs.append(float(it["p"]))
        mats.append(matrix_from_json(it["u"]))
    dim = int(data.get("dim", mats[0].shape[0]))
    if any(m.shape != (dim, dim) for m in mats):
        raise InputError(f"all matrices must be {dim}x{dim}")
    return dim, probs, mats


def single_blocks(data: dict) -> tuple[list[float], list[np.ndarray]]:
    """Probabilities and single-qudit unitaries, factoring u (x) u members.

    Follows the same rule as :func:`ensemble_from_json`: matrices are taken
    as full operators only if every one of them factors.
    """
    dim, probs, mats = _read_items(data)
    d = math.isqrt(dim)
    if d >= 2 and d * d == dim:
        factors = [factor_collective(m) for m in mats]
        if all(f is not None for f in factors):
            return probs, factors
    return probs, mats


def load_ensemble(path: str | Path, lift: bool | None = None) -> UnitaryEnsemble:
    """Read an ensemble file.

    ``lift=None`` decides automatically: square-dimension files whose members
    all factor as u (x) u are taken as full operators, anything else is lifted.
    """
    return ensemble_from_json(load_json(path), lift)


def ensemble_from_json(data: dict, lift: bool | None = None) -> UnitaryEnsemble:
    dim, probs, mats = _read_items(data)
    if lift is None:
        d = math.isqrt(dim)
        full = d >= 2 and d * d == dim and all(factor_collective(m) is not None for m in mats)
        lift = not full
    try:
        if lift:
            return UnitaryEnsemble.collective(mats, probs)
        return UnitaryEnsemble(tuple(probs), tuple(mats))
    except ChannelError as exc:
        raise InputError(str(exc)) from None


def ensemble_to_json(e: UnitaryEnsemble, singles: bool = False) -> dict:
    """Serialise; with ``singles`` the u of each u (x) u member is stored instead."""
    mats = list(e.unitaries)
    if singles:
        mats = [factor_collective(u) for u in mats]
        if any(m is None for m in mats):
            raise ChannelError("ensemble is not collective")
    return {
        "dim": int(mats[0].shape[0]),
        "items": [{"p": float(p), "u": matrix_to_json(u)} for p, u in zip(e.probs, mats)],
    }


def singles_to_json(singles, probs=None) -> dict:
    singles = [np.asarray(u, dtype=np.complex128) for u in singles]
    probs = [1.0 / len(singles)] * len(singles) if probs is None else list(probs)
    return {
        "dim": int(singles[0].shape[0]),
        "items": [{"p": float(p), "u": matrix_to_json(u)} for p, u in zip(probs, singles)],
    }


def save_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1))


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def is_construction(data: dict) -> bool:
    return isinstance(data, dict) and "d" in data and "items" not in data


def spec_to_json(spec: ConstructionSpec) -> dict:
    out = {
        "d": spec.d,
        "variant": spec.variant.value,
        "A": {
            "phi": spec.A.phi,
            "alpha": [spec.A.alpha.real, spec.A.alpha.imag],
            "beta": [spec.A.beta.real, spec.A.beta.imag],
        },
        "v_subspace": list(spec.v_subspace),
    }
    if spec.probs is not None:
        out["probs"] = list(spec.probs)
    if spec.words is not None:
        out["words"] = list(spec.words)
    return out


def spec_from_json(data: dict) -> ConstructionSpec:
    try:
        kw: dict[str, Any] = {"d": int(data["d"])}
        if "variant" in data:
            kw["variant"] = data["variant"]
        if "A" in data:
            a = data["A"]
            kw["A"] = AParams(float(a["phi"]), complex(*a["alpha"]), complex(*a["beta"]))
        if "v_subspace" in data:
            kw["v_subspace"] = tuple(int(i) for i in data["v_subspace"])
        if "probs" in data:
            kw["probs"] = tuple(float(p) for p in data["probs"])
        if "words" in data:
            kw["words"] = tuple(str(w) for w in data["words"])
        return ConstructionSpec(**kw)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad construction spec: {exc!r}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_any(path: str | Path) -> UnitaryEnsemble:
    """Ensemble file or construction spec, whichever ``path`` holds."""
    data = load_json(path)
    if is_construction(data):
        try:
            return build_ensemble(spec_from_json(data))
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return ensemble_from_json(data)

