"""States, random unitary operations and the exact two-qudit twirl.

Vectorisation convention: column stacking, ``vec(|i><j|) = |j> (x) |i>``.
Under it the conjugation ``rho -> U rho U^dagger`` has matrix
``conj(U) (x) U``. Every superoperator in the package uses this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import config
from .linalg import LinalgError, as_matrix, is_unitary, kron


class ChannelError(ValueError):
    pass


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if dim is None:
        dim = math.isqrt(v.size)
    return v.reshape(dim, dim, order="F")


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.mat)
        if m.shape[0] != m.shape[1]:
            raise ChannelError(f"density matrix must be square, got {m.shape}")
        object.__setattr__(self, "mat", m)
        tol = config.TOL
        scale = max(1.0, np.sqrt(m.shape[0]))
        if np.linalg.norm(m - m.conj().T) > tol.state * scale:
            raise ChannelError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol.state * scale:
            raise ChannelError(f"density matrix trace {np.trace(m).real:.6g} != 1")
        if np.min(np.linalg.eigvalsh(m)) < -tol.psd:
            raise ChannelError("density matrix has negative eigenvalues")

    @classmethod
    def relaxed(cls, mat) -> "DensityMatrix":
        """Build without validation, for intermediate arithmetic."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mat", np.asarray(mat, dtype=np.complex128))
        return obj

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class UnitaryEnsemble:
    """Probability-weighted unitaries defining R(rho) = sum p_i U_i rho U_i^dagger."""

    probs: tuple[float, ...]
    unitaries: tuple[np.ndarray, ...]
    conjectural: bool = field(default=False, compare=False)

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        us = tuple(as_matrix(u) for u in self.unitaries)
        if not us:
            raise ChannelError("ensemble needs at least one item")
        if len(probs) != len(us):
            raise ChannelError(f"{len(probs)} probabilities for {len(us)} unitaries")
        dim = us[0].shape[0]
        for u in us:
            if u.shape != (dim, dim):
                raise ChannelError("all unitaries must be square and of equal size")
            if not is_unitary(u):
                raise ChannelError("ensemble member is not unitary")
        if any(not (0.0 < p <= 1.0) for p in probs):
            raise ChannelError("probabilities must lie in (0, 1]")
        if abs(sum(probs) - 1.0) > 1e-12 * max(1, len(probs)):
            raise ChannelError(f"probabilities sum to {sum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "unitaries", us)

    @classmethod
    def uniform(cls, unitaries: Sequence[np.ndarray]) -> "UnitaryEnsemble":
        m = len(unitaries)
        return cls(tuple([1.0 / m] * m), tuple(unitaries))

    @classmethod
    def collective(cls, singles: Sequence[np.ndarray], probs: Sequence[float] | None = None,
                   conjectural: bool = False) -> "UnitaryEnsemble":
        """Lift single-qudit unitaries u to u (x) u."""
        singles = [as_matrix(u) for u in singles]
        if probs is None:
            probs = [1.0 / len(singles)] * len(singles)
        return cls(tuple(probs), tuple(kron(u, u) for u in singles), conjectural=conjectural)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def __len__(self) -> int:
        return len(self.unitaries)

    def with_probs(self, probs: Sequence[float]) -> "UnitaryEnsemble":
        return UnitaryEnsemble(tuple(probs), self.unitaries, conjectural=self.conjectural)


@dataclass(frozen=True)
class Superoperator:
    mat: np.ndarray

    @property
    def hdim(self) -> int:
        return math.isqrt(self.mat.shape[0])

    def apply(self, rho) -> np.ndarray:
        x = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvec(self.mat @ vec(x), x.shape[0])


@dataclass(frozen=True)
class WernerParams:
    d: int
    eta: float

    def __post_init__(self):
        if self.d < 2:
            raise ChannelError("Werner states need d >= 2")
        if not (0.0 <= self.eta <= 1.0):
            raise ChannelError("eta must lie in [0, 1]")


def apply_ruo(e: UnitaryEnsemble, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != e.dim:
        raise ChannelError(f"state dimension {rho.dim} != ensemble dimension {e.dim}")
    out = sum(p * (u @ rho.mat @ u.conj().T) for p, u in zip(e.probs, e.unitaries))
    return DensityMatrix(out)


def build_superoperator(e: UnitaryEnsemble) -> Superoperator:
    n = e.dim * e.dim
    if n > config.TOL.max_side:
        raise LinalgError("matrix too large")
    mat = np.zeros((n, n), dtype=np.complex128)
    for p, u in zip(e.probs, e.unitaries):
        mat += p * np.kron(u.conj(), u)
    return Superoperator(mat)


def flip_operator(d: int) -> np.ndarray:
    if d < 2:
        raise ChannelError("flip operator needs d >= 2")
    f = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def sym_asym_projectors(d: int) -> tuple[np.ndarray, np.ndarray]:
    f = flip_operator(d)
    eye = np.eye(d * d, dtype=np.complex128)
    return (eye + f) / 2, (eye - f) / 2


def singlet(d: int = 2) -> np.ndarray:
    """(|1>|0> - |0>|1>)/sqrt(2) as a column vector; for d > 2 in the {0,1} block."""
    v = np.zeros(d * d, dtype=np.complex128)
    v[1 * d + 0] = 1 / np.sqrt(2)
    v[0 * d + 1] = -1 / np.sqrt(2)
    return v


def werner_state(w: WernerParams) -> DensityMatrix:
    d = w.d
    ps, pa = sym_asym_projectors(d)
    rho = w.eta * 2 / (d * (d + 1)) * ps + (1 - w.eta) * 2 / (d * (d - 1)) * pa
    return DensityMatrix(rho)


def _bipartite_dim(n: int) -> int:
    d = math.isqrt(n)
    if d * d != n or d < 2:
        raise ChannelError("not bipartite")
    return d


def twirl_project(rho) -> np.ndarray | DensityMatrix:
    """Closed-form U(d) x U(d) twirl: HS projection onto span{P_sym, P_asym}.

    Accepts a :class:`DensityMatrix` (returns one) or any square operator.
    """
    is_state = isinstance(rho, DensityMatrix)
    x = rho.mat if is_state else np.asarray(rho, dtype=np.complex128)
    d = _bipartite_dim(x.shape[0])
    ps, pa = sym_asym_projectors(d)
    rs, ra = d * (d + 1) // 2, d * (d - 1) // 2
    out = np.trace(ps @ x) / rs * ps + np.trace(pa @ x) / ra * pa
    return DensityMatrix(out) if is_state else out


def twirl_superoperator(d: int) -> np.ndarray:
    """Matrix of :func:`twirl_project` in the column-stacking convention."""
    ps, pa = sym_asym_projectors(d)
    rs, ra = d * (d + 1) // 2, d * (d - 1) // 2
    vs, va = vec(ps), vec(pa)
    return np.outer(vs, vs.conj()) / rs + np.outer(va, va.conj()) / ra


def hs_distance_to_twirl(s: Superoperator, n: int) -> float:
    """Frobenius distance ||S^n - T|| between an iterated map and the twirl.

    When S and T commute with S T = T (always so for u (x) u ensembles) the
    difference is formed as (S - T)^n (I - T), which avoids cancellation once
    the distance drops far below one.
    """
    if n < 0:
        raise ChannelError("iteration count must be non-negative")
    d = _bipartite_dim(s.hdim)
    t = twirl_superoperator(d)
    eye = np.eye(t.shape[0], dtype=np.complex128)
    if n == 0:
        return float(np.linalg.norm(eye - t))
    if _absorbs_twirl(s.mat, t):
        return float(np.linalg.norm(np.linalg.matrix_power(s.mat - t, n) @ (eye - t)))
    return float(np.linalg.norm(np.linalg.matrix_power(s.mat, n) - t))


def _absorbs_twirl(s: np.ndarray, t: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.linalg.norm(s @ t - t) < tol and np.linalg.norm(t @ s - t) < tol)


def random_density_matrix(dim: int, rng: np.random.Generator | int | None = None,
                          rank: int | None = None) -> DensityMatrix:
    """Random state from a Ginibre matrix G: rho = G G^dagger / Tr(G G^dagger)."""
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def factor_collective(big: np.ndarray, tol: float = 1e-10) -> np.ndarray | None:
    """Return u with big = u (x) u, or None if no such factor exists.

    The realignment R[(i,j),(k,l)] = u[i,j] u[k,l] is rank one; its leading
    singular vector gives u up to a scalar fixed by a least-squares fit.
    """
    big = np.asarray(big, dtype=np.complex128)
    d = math.isqrt(big.shape[0])
    if d * d != big.shape[0] or big.shape[0] != big.shape[1]:
        return None
    # big[(i,k),(j,l)] = u[i,j] u[k,l]  ->  realigned[(i,j),(k,l)]
    realigned = big.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    uu, _, _ = np.linalg.svd(realigned)
    u0 = uu[:, 0].reshape(d, d)
    k0 = np.kron(u0, u0)
    c2 = np.vdot(k0, big) / np.vdot(k0, k0)
    u = np.sqrt(c2) * u0
    if np.linalg.norm(np.kron(u, u) - big) > tol * max(1.0, np.linalg.norm(big)):
        return None
    return u
