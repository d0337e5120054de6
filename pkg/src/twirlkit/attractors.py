"""Asymptotic spectrum, attractor spaces and the twirl convergence test.

Two independent routes to the attractor space are provided. The spectral
route diagonalises the superoperator; the algebraic route solves the
intertwining equations ``U_i X = lam X U_i`` for all ensemble members at
once. They share no code beyond basic linear algebra, so each checks the
other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .channels import (
    ChannelError,
    DensityMatrix,
    Superoperator,
    UnitaryEnsemble,
    build_superoperator,
    factor_collective,
    sym_asym_projectors,
    unvec,
    vec,
)
from .linalg import eig, eigvals, gram_schmidt_hs, null_space, orthonormal_columns, subspace_distance


@dataclass
class AttractorReport:
    asymptotic_spectrum: list[complex]
    attractor_bases: dict[complex, list[np.ndarray]]
    fixed_point_dim: int
    converges_to_twirl: bool = False
    stationary: bool = False
    subdominant_modulus: float = 0.0
    twirl_subspace_distance: float | None = None
    hdim: int = 0

    def fixed_space(self) -> list[np.ndarray]:
        for lam, basis in self.attractor_bases.items():
            if abs(lam - 1) < config.TOL.dedup:
                return basis
        return []

    def to_json(self) -> dict:
        return {
            "hdim": self.hdim,
            "asymptotic_spectrum": [[lam.real, lam.imag] for lam in self.asymptotic_spectrum],
            "attractor_bases": [
                {
                    "lambda": [lam.real, lam.imag],
                    "basis": [_matrix_json(x) for x in basis],
                }
                for lam, basis in self.attractor_bases.items()
            ],
            "fixed_point_dim": self.fixed_point_dim,
            "stationary": self.stationary,
            "converges_to_twirl": self.converges_to_twirl,
            "subdominant_modulus": self.subdominant_modulus,
        }


def _matrix_json(x: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(x)]


@dataclass
class AsymptoticState:
    terms: list[tuple[complex, list[complex], list[np.ndarray]]] = field(default_factory=list)

    def evaluate(self, n: int) -> np.ndarray:
        out = None
        for lam, coeffs, basis in self.terms:
            for c, x in zip(coeffs, basis):
                term = (lam ** n) * c * x
                out = term if out is None else out + term
        return out


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of values lying within ``tol`` of each other (single linkage)."""
    groups: list[list[int]] = []
    for i in np.argsort(np.angle(values)):
        for g in groups:
            if any(abs(values[i] - values[j]) < tol for j in g):
                g.append(int(i))
                break
        else:
            groups.append([int(i)])
    return groups


def _clamp(lam: complex) -> complex:
    r = abs(lam)
    return lam / r if r > 1.0 else lam


def _peripheral(values: np.ndarray) -> np.ndarray:
    return np.abs(values) >= 1.0 - config.TOL.unit_circle


def asymptotic_spectrum(s: Superoperator) -> list[complex]:
    """Unit-modulus eigenvalues of ``s``, deduplicated."""
    w = eigvals(s.mat)
    per = w[_peripheral(w)]
    out = []
    for g in _cluster(per, config.TOL.dedup):
        out.append(_clamp(complex(np.mean(per[g]))))
    return out


def subdominant_modulus(s: Superoperator | np.ndarray) -> float:
    """Largest eigenvalue modulus once the unit-modulus block is removed."""
    mat = s.mat if isinstance(s, Superoperator) else s
    w = np.abs(eigvals(mat))
    rest = w[w < 1.0 - config.TOL.unit_circle]
    return float(rest.max()) if rest.size else 0.0


def attractor_space_eig(s: Superoperator) -> AttractorReport:
    """Attractor space from the eigendecomposition of the superoperator."""
    dec = eig(s.mat)
    w, v = dec.eigenvalues, dec.eigenvectors
    n = s.hdim
    peripheral = np.flatnonzero(_peripheral(w))
    bases: dict[complex, list[np.ndarray]] = {}
    spectrum: list[complex] = []
    for g in _cluster(w[peripheral], config.TOL.dedup):
        idx = peripheral[g]
        lam = _clamp(complex(np.mean(w[idx])))
        q = orthonormal_columns(v[:, idx])
        spectrum.append(lam)
        bases[lam] = [unvec(q[:, k], n) for k in range(q.shape[1])]
    rest = np.abs(np.delete(w, peripheral))
    fixed = sum(len(b) for lam, b in bases.items() if abs(lam - 1) < config.TOL.dedup)
    stationary = len(spectrum) > 0 and all(abs(lam - 1) < config.TOL.dedup for lam in spectrum)
    return AttractorReport(
        asymptotic_spectrum=spectrum,
        attractor_bases=bases,
        fixed_point_dim=fixed,
        stationary=stationary,
        subdominant_modulus=float(rest.max()) if rest.size else 0.0,
        hdim=n,
    )


def attractor_space_linear(e: UnitaryEnsemble, lam: complex) -> list[np.ndarray]:
    """Joint solutions of ``U_i X = lam X U_i`` as an HS-orthonormal list.

    In column-stacking form each equation reads
    ``(1 (x) U_i - lam U_i^T (x) 1) vec(X) = 0``; the constraints of all members
    are stacked and the null space extracted by thresholded SVD.
    """
    if abs(abs(lam) - 1.0) > 1e-8:
        raise ChannelError("attractor equations need |lambda| = 1")
    n = e.dim
    eye = np.eye(n, dtype=np.complex128)
    blocks = [np.kron(eye, u) - lam * np.kron(u.T, eye) for u in e.unitaries]
    ns = null_space(np.vstack(blocks))
    return [unvec(ns[:, k], n) for k in range(ns.shape[1])]


def candidate_eigenvalues(e: UnitaryEnsemble, tol: float | None = None) -> list[complex]:
    """Intersection over members of the phase-product sets {a * conj(b)}.

    Every unit-modulus eigenvalue of the RUO lies in this finite set.
    """
    tol = config.TOL.dedup if tol is None else tol
    common: np.ndarray | None = None
    for u in e.unitaries:
        w = eigvals(u)
        w = w / np.abs(w)
        prods = np.angle(np.outer(w, w.conj()).ravel())
        prods = _unique_angles(prods, tol)
        if common is None:
            common = prods
        else:
            common = common[_angles_member(common, prods, tol)]
        if common.size == 0:
            break
    return [complex(np.exp(1j * a)) for a in (common if common is not None else [])]


def _unique_angles(a: np.ndarray, tol: float) -> np.ndarray:
    a = np.sort(np.mod(a, 2 * np.pi))
    keep = [a[0]]
    for x in a[1:]:
        if x - keep[-1] > tol:
            keep.append(x)
    if len(keep) > 1 and (keep[0] + 2 * np.pi - keep[-1]) <= tol:
        keep.pop()
    return np.array(keep)


def _angles_member(query: np.ndarray, ref: np.ndarray, tol: float) -> np.ndarray:
    """Mask of ``query`` angles within ``tol`` (on the circle) of some ``ref`` angle."""
    ref = np.sort(np.mod(ref, 2 * np.pi))
    q = np.mod(query, 2 * np.pi)
    pos = np.searchsorted(ref, q)
    lo = ref[(pos - 1) % ref.size]
    hi = ref[pos % ref.size]
    dist = lambda a, b: np.abs(np.angle(np.exp(1j * (a - b))))  # noqa: E731
    return np.minimum(dist(q, lo), dist(q, hi)) <= tol


def stationarity_sufficient(e: UnitaryEnsemble) -> bool:
    """True when the phase-product intersection contains nothing but 1.

    The condition reads the product set pairwise, {a conj(b) : a, b in sigma(U_i)};
    read literally as {|a|^2} it would hold for every ensemble.
    """
    cands = candidate_eigenvalues(e)
    return all(abs(c - 1) < config.TOL.dedup for c in cands)


def asymptotic_state(report: AttractorReport, rho: DensityMatrix | np.ndarray) -> AsymptoticState:
    """Coefficients (X, rho)_HS of ``rho`` on each attractor basis element."""
    x = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if x.shape != (report.hdim, report.hdim):
        raise ChannelError(f"state of size {x.shape} does not match report dimension {report.hdim}")
    terms = []
    for lam, basis in report.attractor_bases.items():
        coeffs = [complex(np.vdot(b, x)) for b in basis]
        terms.append((lam, coeffs, basis))
    return AsymptoticState(terms)


def is_collective(e: UnitaryEnsemble) -> bool:
    return all(factor_collective(u) is not None for u in e.unitaries)


def twirl_span(d: int) -> list[np.ndarray]:
    ps, pa = sym_asym_projectors(d)
    return gram_schmidt_hs([ps, pa])


def check_convergence_to_twirl(e: UnitaryEnsemble) -> AttractorReport:
    """Decide whether iterating the RUO converges to the U(d) x U(d) twirl.

    Holds iff the only unit-modulus eigenvalue is 1 and the fixed space
    equals span{P_sym, P_asym}.
    """
    n = e.dim
    d = int(round(np.sqrt(n)))
    if d * d != n or d < 2:
        raise ChannelError("not bipartite")
    if not is_collective(e):
        raise ChannelError("not a collective ensemble")
    report = attractor_space_eig(build_superoperator(e))
    dist = subspace_distance(report.fixed_space(), twirl_span(d))
    report.twirl_subspace_distance = dist
    report.converges_to_twirl = bool(
        report.stationary
        and report.fixed_point_dim == 2
        and dist < subspace_tolerance(report.subdominant_modulus)
    )
    return report


def subspace_tolerance(subdominant: float) -> float:
    """Projector-distance threshold for a computed unit-eigenvalue eigenspace.

    Dense eigenvectors are accurate to about eps / gap, so when the next
    eigenvalue lies within ~1e-6 of the circle the fixed threshold is widened
    accordingly.
    """
    gap = max(1.0 - subdominant, np.finfo(float).eps)
    return max(config.TOL.subspace, 100 * np.finfo(float).eps / gap)


def attractor_residual(e: UnitaryEnsemble, report: AttractorReport) -> float:
    """Worst violation of ``U_i X = lam X U_i`` over the reported basis."""
    worst = 0.0
    for lam, basis in report.attractor_bases.items():
        for x in basis:
            for u in e.unitaries:
                worst = max(worst, float(np.linalg.norm(u @ x - lam * x @ u)))
    return worst


def iterate_vec(s: Superoperator, rho: np.ndarray, n: int) -> np.ndarray:
    """S^n applied to rho by repeated multiplication."""
    v = vec(rho)
    for _ in range(n):
        v = s.mat @ v
    return unvec(v, rho.shape[0])
