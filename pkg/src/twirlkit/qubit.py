"""Algebraic classification of two-qubit collective ensembles.

Each single-qubit unitary is projected to SU(2). One member (the pivot) is
diagonalised, ``u_pivot = diag(e^{i phi}, e^{-i phi})``, and every other
member is written in that basis as

    [[e^{i theta} cos(gamma), -e^{-i mu} sin(gamma)],
     [e^{i mu} sin(gamma),     e^{-i theta} cos(gamma)]].

Whether iterating the lifted RUO reproduces the two-qubit twirl then depends
only on membership of these angles in a few special sets.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import config
from .channels import UnitaryEnsemble
from .linalg import as_matrix, is_unitary

HALF_PI = np.pi / 2
TWO_PI = 2 * np.pi


class DegeneratePivotError(ValueError):
    pass


class Rule(str, enum.Enum):
    TWO_OP_BULLET1 = "TwoOp-Bullet1"
    TWO_OP_BULLET2 = "TwoOp-Bullet2"
    MULTI_TRACE_NONZERO = "MultiOp-TraceNonzero"
    MULTI_ALL_TRACELESS = "MultiOp-AllTraceless"
    NONE = "None"


@dataclass
class QubitParams:
    pivot_index: int
    phi: float
    others: dict[int, tuple[float, float, float]]  # j -> (theta, mu, gamma)
    basis: np.ndarray = field(repr=False, default_factory=lambda: np.eye(2, dtype=complex))

    def pivot_matrix(self) -> np.ndarray:
        d = np.diag([np.exp(1j * self.phi), np.exp(-1j * self.phi)])
        return self.basis @ d @ self.basis.conj().T

    def member_matrix(self, j: int) -> np.ndarray:
        if j == self.pivot_index:
            return self.pivot_matrix()
        theta, mu, gamma = self.others[j]
        return self.basis @ general_form(theta, mu, gamma) @ self.basis.conj().T

    def to_json(self) -> dict:
        return {
            "pivot_index": self.pivot_index,
            "phi": self.phi,
            "others": {
                str(j): {"theta": t, "mu": m, "gamma": g} for j, (t, m, g) in self.others.items()
            },
        }


@dataclass
class TwirlVerdict:
    converges: bool
    rule_fired: Rule
    witness: dict = field(default_factory=dict)
    params: QubitParams | None = None

    def to_json(self) -> dict:
        out = {
            "converges": self.converges,
            "rule_fired": self.rule_fired.value,
            "witness": self.witness,
        }
        if self.params is not None:
            out["angles"] = self.params.to_json()
        return out


def diagonal_form(phi: float) -> np.ndarray:
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def general_form(theta: float, mu: float, gamma: float) -> np.ndarray:
    c, s = np.cos(gamma), np.sin(gamma)
    return np.array(
        [
            [np.exp(1j * theta) * c, -np.exp(-1j * mu) * s],
            [np.exp(1j * mu) * s, np.exp(-1j * theta) * c],
        ]
    )


def to_su2(u) -> np.ndarray:
    """Divide by the principal square root of the determinant."""
    u = as_matrix(u)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 unitary, got shape {u.shape}")
    return u / np.sqrt(np.linalg.det(u))


def near_any(angle: float, targets: Sequence[float], period: float = TWO_PI,
             tol: float | None = None) -> bool:
    """Angle membership in ``targets`` modulo ``period`` with wrap-around."""
    tol = config.TOL.angle if tol is None else tol
    for t in targets:
        delta = np.mod(angle - t + period / 2, period) - period / 2
        if abs(delta) <= tol:
            return True
    return False


def rotation_angle(u_su2: np.ndarray) -> float:
    """phi in [0, pi] with eigenvalues exp(+-i phi)."""
    # u = cos(phi) 1 + i sin(phi) n.sigma; atan2 stays accurate near phi = 0, pi
    cos_phi = np.real(np.trace(u_su2)) / 2
    sin_phi = np.linalg.norm(u_su2 - u_su2.conj().T) / (2 * np.sqrt(2))
    return float(np.arctan2(sin_phi, cos_phi))


def _is_scalar(u_su2: np.ndarray) -> bool:
    phi = rotation_angle(u_su2)
    return near_any(phi, [0.0], period=np.pi)


def _is_traceless(u_su2: np.ndarray) -> bool:
    return near_any(rotation_angle(u_su2), [HALF_PI])


def _pivot_basis(p: np.ndarray) -> tuple[float, np.ndarray]:
    """Eigenbasis W in SU(2) with W^dagger p W = diag(e^{i phi}, e^{-i phi}), phi in (0, pi)."""
    phi = rotation_angle(p)
    if near_any(phi, [0.0], period=np.pi):
        raise DegeneratePivotError("degenerate pivot")
    lam = np.exp(1j * phi)
    # null vector of (p - lam I) from its rows, take the better conditioned one
    m = p - lam * np.eye(2)
    row = m[0] if np.linalg.norm(m[0]) >= np.linalg.norm(m[1]) else m[1]
    w1 = np.array([-row[1], row[0]])
    w1 = w1 / np.linalg.norm(w1)
    k = int(np.argmax(np.abs(w1)))
    w1 = w1 * np.exp(-1j * np.angle(w1[k]))
    w2 = np.array([-np.conj(w1[1]), np.conj(w1[0])])
    return phi, np.column_stack([w1, w2])


def _angles_of(m: np.ndarray) -> tuple[float, float, float]:
    a, lower = m[0, 0], m[1, 0]
    gamma = float(np.arctan2(abs(lower), abs(a)))
    tol = config.TOL.angle
    theta = float(np.mod(np.angle(a), TWO_PI)) if abs(a) > tol else 0.0
    mu = float(np.mod(np.angle(lower), TWO_PI)) if abs(lower) > tol else 0.0
    return theta, mu, gamma


def canonicalize(us: Sequence[np.ndarray], pivot: int = 0) -> QubitParams:
    us = [as_matrix(u) for u in us]
    if not us:
        raise ValueError("need at least one unitary")
    if not 0 <= pivot < len(us):
        raise IndexError(f"pivot {pivot} out of range")
    for u in us:
        if u.shape != (2, 2) or not is_unitary(u):
            raise ValueError("inputs must be 2x2 unitaries")
    su = [to_su2(u) for u in us]
    phi, w = _pivot_basis(su[pivot])
    others = {}
    for j, u in enumerate(su):
        if j == pivot:
            continue
        others[j] = _angles_of(w.conj().T @ u @ w)
    return QubitParams(pivot_index=pivot, phi=phi, others=others, basis=w)


def _gamma_generic(gamma: float) -> bool:
    return not near_any(gamma, [0.0, HALF_PI], period=np.pi)


def classify_two(params: QubitParams) -> TwirlVerdict:
    """Two-member criterion; mu is never consulted."""
    if len(params.others) != 1:
        raise ValueError(f"classify_two needs exactly one non-pivot member, got {len(params.others)}")
    (j, (theta, mu, gamma)), = params.others.items()
    phi = params.phi
    pivot_traceless = near_any(phi, [HALF_PI, 3 * HALF_PI])
    witness = {"phi": phi, "theta": theta, "gamma": gamma}
    if pivot_traceless:
        theta_ok = not near_any(theta, [0.0, HALF_PI, np.pi, 3 * HALF_PI])
        if _gamma_generic(gamma) and theta_ok:
            return TwirlVerdict(True, Rule.TWO_OP_BULLET1, witness, params)
    elif _gamma_generic(gamma):
        return TwirlVerdict(True, Rule.TWO_OP_BULLET2, witness, params)
    return TwirlVerdict(False, Rule.NONE, witness, params)


def classify_multi(us: Sequence[np.ndarray]) -> TwirlVerdict:
    """General criterion for any number of members (at least two).

    Members equal to +-1 after SU(2) projection act trivially on the lifted
    state and are skipped. If a non-trivial member has non-zero trace, every
    such member is tried as pivot.
    """
    us = [as_matrix(u) for u in us]
    if len(us) < 2:
        raise ValueError("classify_multi needs at least two unitaries")
    su = [to_su2(u) for u in us]
    active = [i for i, u in enumerate(su) if not _is_scalar(u)]
    if len(active) < 2:
        return TwirlVerdict(False, Rule.NONE, {"active": active})
    reduced = [su[i] for i in active]
    traced = [k for k, u in enumerate(reduced) if not _is_traceless(u)]

    if traced:
        last = None
        for k0 in traced:
            params = canonicalize(reduced, k0)
            for k, (_, _, gamma) in params.others.items():
                if _gamma_generic(gamma):
                    witness = {"pivot": active[k0], "j": active[k], "gamma": gamma}
                    return TwirlVerdict(True, Rule.MULTI_TRACE_NONZERO, witness,
                                        _relabel(params, active))
            last = params
        return TwirlVerdict(False, Rule.NONE, {"pivots_tried": [active[k] for k in traced]},
                            _relabel(last, active))

    params = canonicalize(reduced, 0)
    pair = _traceless_pair(params.others)
    out_params = _relabel(params, active)
    if pair is not None:
        j, k = pair
        witness = {"pivot": active[0], "j": active[j], "k1": active[j], "k2": active[k]}
        return TwirlVerdict(True, Rule.MULTI_ALL_TRACELESS, witness, out_params)
    tilted = any(_gamma_generic(g) for _, _, g in params.others.values())
    return TwirlVerdict(False, Rule.NONE, {"pivot": active[0], "gamma_ok": tilted,
                                           "mu_pair": False}, out_params)


def _traceless_pair(others: dict[int, tuple[float, float, float]]) -> tuple[int, int] | None:
    """Find (j, k) certifying convergence when every member is traceless.

    All members are then pi-rotations; relative to the pivot axis a member is
    aligned (gamma = 0), tilted, or horizontal (gamma = pi/2). The group has
    an invariant axis unless some tilted j and another member k have mu
    differing by something other than a multiple of pi (k tilted) or of pi/2
    (k horizontal).
    """
    tilted = [k for k, (_, _, g) in others.items() if _gamma_generic(g)]
    horizontal = [k for k, (_, _, g) in others.items() if near_any(g, [HALF_PI], period=np.pi)]
    for j in tilted:
        mu_j = others[j][1]
        for k in tilted + horizontal:
            if k == j:
                continue
            period = np.pi if k in tilted else HALF_PI
            if not near_any(others[k][1] - mu_j, [0.0], period=period):
                return j, k
    return None


def _relabel(params: QubitParams | None, active: list[int]) -> QubitParams | None:
    if params is None:
        return None
    return QubitParams(
        pivot_index=active[params.pivot_index],
        phi=params.phi,
        others={active[k]: v for k, v in params.others.items()},
        basis=params.basis,
    )


def minimal_subset(us: Sequence[np.ndarray]) -> list[int]:
    """Smallest-first search for a convergent subset of at most four members."""
    if not classify_multi(us).converges:
        raise ValueError("input ensemble does not converge to the twirl")
    n = len(us)
    for size in (2, 3, 4):
        for idx in itertools.combinations(range(n), size):
            if classify_multi([us[i] for i in idx]).converges:
                return list(idx)
    raise RuntimeError("no convergent subset of size <= 4 found")


def cross_validate(us: Sequence[np.ndarray], probs: Sequence[float] | None = None) -> bool:
    """Classifier verdict equals the spectral verdict on the lifted ensemble."""
    from .attractors import check_convergence_to_twirl

    e = UnitaryEnsemble.collective(us, probs)
    return classify_multi(us).converges == check_convergence_to_twirl(e).converges_to_twirl


def fig1_m_set() -> list[np.ndarray]:
    """Reference set M1, M2, M3: phi = pi/4, then (theta, mu, gamma) = (pi/4, 0, pi/4), (0, pi/4, pi/4)."""
    return [
        diagonal_form(np.pi / 4),
        general_form(np.pi / 4, 0.0, np.pi / 4),
        general_form(0.0, np.pi / 4, np.pi / 4),
    ]


def fig1_n_set() -> list[np.ndarray]:
    """A four-member set with Tr(N1) != 0 and every gamma in {0, pi/2}.

    Any set with this property avoids the twirl; these matrices are one
    choice of it.
    """
    return [
        diagonal_form(np.pi / 4),
        general_form(np.pi / 3, 0.0, 0.0),
        general_form(0.0, 0.0, HALF_PI),
        general_form(0.0, np.pi / 5, HALF_PI),
    ]
