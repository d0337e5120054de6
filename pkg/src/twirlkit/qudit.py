"""Generic twirling ensembles for two qudits of any dimension d >= 2.

Three single-qudit generators are used: a diagonal phase gate ``h`` with
pairwise distinct phases pi * 2**(k - d), the cyclic shift ``u`` and a gate
``v`` acting as a 2x2 unitary ``A`` on two basis states and as the identity
elsewhere. Basis labels are 1-based in the public API.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channels import UnitaryEnsemble
from .linalg import as_matrix, haar_unitary


class ConstructionError(ValueError):
    pass


class Variant(str, enum.Enum):
    THREE_OP = "three_op"
    TWO_OP_ODD_D = "two_op"
    CUSTOM = "custom"


DEFAULT_PHI_A = np.pi / 7
DEFAULT_ALPHA = 0.8 + 0.1j


@dataclass(frozen=True)
class AParams:
    """A = e^{i phi} [[alpha, beta], [-conj(beta), conj(alpha)]]."""

    phi: float = DEFAULT_PHI_A
    alpha: complex = DEFAULT_ALPHA
    beta: complex = complex(np.sqrt(1 - abs(DEFAULT_ALPHA) ** 2))

    @classmethod
    def from_angles(cls, phi: float, a: float, b: float, c: float) -> "AParams":
        """alpha = cos(a) e^{ib}, beta = sin(a) e^{ic}."""
        return cls(phi, np.cos(a) * np.exp(1j * b), np.sin(a) * np.exp(1j * c))

    @classmethod
    def random(cls, rng: np.random.Generator | int | None = None) -> "AParams":
        rng = np.random.default_rng(rng)
        w = haar_unitary(2, rng)
        w = w / np.sqrt(np.linalg.det(w))
        return cls(float(rng.uniform(0, 2 * np.pi)), complex(w[0, 0]), complex(w[0, 1]))

    def angles(self) -> tuple[float, float, float, float]:
        a = float(np.arctan2(abs(self.beta), abs(self.alpha)))
        return self.phi, a, float(np.angle(self.alpha)), float(np.angle(self.beta))

    def matrix(self) -> np.ndarray:
        al, be = self.alpha, self.beta
        return np.exp(1j * self.phi) * np.array([[al, be], [-np.conj(be), np.conj(al)]])


@dataclass(frozen=True)
class ConstructionSpec:
    d: int
    A: AParams = field(default_factory=AParams)
    variant: Variant = Variant.THREE_OP
    v_subspace: tuple[int, int] = (1, 2)
    probs: tuple[float, ...] | None = None
    words: tuple[str, ...] | None = None
    custom: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ConstructionError("qudit dimension must be at least 2")
        object.__setattr__(self, "variant", Variant(self.variant))
        i, j = self.v_subspace
        if i == j or not (1 <= i <= self.d and 1 <= j <= self.d):
            raise ConstructionError(f"invalid v_subspace {self.v_subspace} for d={self.d}")
        if abs(abs(self.A.alpha) ** 2 + abs(self.A.beta) ** 2 - 1) > 1e-12:
            raise ConstructionError("|alpha|^2 + |beta|^2 must equal 1")
        if self.probs is not None:
            object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    def with_(self, **kw) -> "ConstructionSpec":
        return replace(self, **kw)


def build_h(d: int) -> np.ndarray:
    if d < 2:
        raise ConstructionError("d must be at least 2")
    if d > 62:
        raise ConstructionError("d > 62: phases pi * 2**(k-d) underflow double precision")
    k = np.arange(1, d + 1)
    return np.diag(np.exp(1j * np.pi * 2.0 ** (k - d)))


def build_u(d: int) -> np.ndarray:
    if d < 2:
        raise ConstructionError("d must be at least 2")
    u = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        u[(k + 1) % d, k] = 1.0
    return u


def build_v(spec: ConstructionSpec) -> np.ndarray:
    a = spec.A
    tol = 1e-12
    if abs(a.alpha) < tol or abs(a.beta) < tol:
        raise ConstructionError("A must have no vanishing entries")
    v = np.eye(spec.d, dtype=np.complex128)
    i, j = spec.v_subspace[0] - 1, spec.v_subspace[1] - 1
    block = a.matrix()
    idx = [i, j]
    v[np.ix_(idx, idx)] = block
    return v


def generators(spec: ConstructionSpec) -> dict[str, np.ndarray]:
    return {"h": build_h(spec.d), "u": build_u(spec.d), "v": build_v(spec)}


def evaluate_word(word: str, gens: dict[str, np.ndarray]) -> np.ndarray:
    """Matrix product of generator letters, left to right ("uv" = u @ v)."""
    if not word:
        raise ConstructionError("empty word")
    out = None
    for ch in word:
        if ch not in gens:
            raise ConstructionError(f"unknown generator {ch!r} in word {word!r}")
        out = gens[ch] if out is None else out @ gens[ch]
    return out


def _probs(spec: ConstructionSpec, m: int) -> tuple[float, ...]:
    if spec.probs is None:
        return tuple([1.0 / m] * m)
    if len(spec.probs) != m:
        raise ConstructionError(f"variant needs {m} probabilities, got {len(spec.probs)}")
    return spec.probs


def build_ensemble(spec: ConstructionSpec) -> UnitaryEnsemble:
    """Collective ensemble {u_i (x) u_i} for the requested variant.

    The two-member variant is proven for odd d only; for even d it is built
    anyway and flagged ``conjectural``.
    """
    if spec.variant is Variant.THREE_OP:
        g = generators(spec)
        singles = [g["h"], g["u"], g["v"]]
        return UnitaryEnsemble.collective(singles, _probs(spec, 3))
    if spec.variant is Variant.TWO_OP_ODD_D:
        g = generators(spec)
        singles = [g["h"], g["u"] @ g["v"]]
        return UnitaryEnsemble.collective(singles, _probs(spec, 2), conjectural=spec.d % 2 == 0)
    if spec.words:
        return build_group_variant(spec, list(spec.words))
    if not spec.custom:
        raise ConstructionError("custom variant needs either words or single-qudit unitaries")
    singles = [as_matrix(u) for u in spec.custom]
    return UnitaryEnsemble.collective(singles, _probs(spec, len(singles)))


def build_group_variant(spec: ConstructionSpec, words: Sequence[str]) -> UnitaryEnsemble:
    if not words:
        raise ConstructionError("need at least one word")
    gens = generators(spec)
    singles = [evaluate_word(w, gens) for w in words]
    probs = spec.probs if spec.probs is not None and len(spec.probs) == len(words) else None
    return UnitaryEnsemble.collective(singles, probs)
