"""Iterated-RUO simulation, rate fitting and rate optimisation.

The optimisation objective is the subdominant eigenvalue modulus of the
superoperator: the exact asymptotic contraction per iteration. Candidate
points that lose convergence to the twirl score 1, the worst possible value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import config
from .attractors import check_convergence_to_twirl, subdominant_modulus
from .channels import (
    ChannelError,
    Superoperator,
    UnitaryEnsemble,
    build_superoperator,
    flip_operator,
    sym_asym_projectors,
    twirl_superoperator,
)
from .linalg import eigvals, haar_unitary, orthonormal_columns
from .qudit import AParams, ConstructionSpec, ConstructionError, Variant, build_ensemble

log = logging.getLogger(__name__)

UNDERFLOW = 1e-14
PROB_FLOOR = 1e-3


@dataclass
class ConvergenceTrace:
    n_values: list[int]
    distances: list[float]
    fitted_rate: float
    fit_r2: float
    subdominant_modulus: float
    fit_window: tuple[int, int] = (0, 0)

    def rows(self):
        return zip(self.n_values, self.distances)


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_objective: float
    n_restarts: int
    history: list[tuple[np.ndarray, float]] = field(default_factory=list)
    best_probs: tuple[float, ...] = ()
    best_A: AParams | None = None
    start_objectives: list[float] = field(default_factory=list)

    def to_json(self, verbose: bool = False) -> dict:
        out = {
            "best_params": [float(x) for x in self.best_params],
            "best_objective": self.best_objective,
            "best_probs": list(self.best_probs),
            "n_restarts": self.n_restarts,
        }
        if self.best_A is not None:
            out["best_A"] = {
                "phi": self.best_A.phi,
                "alpha": [self.best_A.alpha.real, self.best_A.alpha.imag],
                "beta": [self.best_A.beta.real, self.best_A.beta.imag],
            }
        if verbose:
            out["history"] = [
                {"params": [float(x) for x in p], "objective": float(v)} for p, v in self.history
            ]
        return out


def _twirl_dim(e: UnitaryEnsemble) -> int:
    d = int(round(np.sqrt(e.dim)))
    if d * d != e.dim:
        raise ChannelError("not bipartite")
    return d


def distance_series(s: Superoperator, n_max: int) -> list[float]:
    """||S^n - T||_F for n = 0..n_max by repeated multiplication.

    For u (x) u ensembles S T = T S = T, hence S^n - T = (S - T)^n (I - T);
    iterating with S - T keeps full relative precision far below 1e-16.
    Otherwise S^n is accumulated directly.
    """
    t = twirl_superoperator(int(round(np.sqrt(s.hdim))))
    eye = np.eye(t.shape[0], dtype=np.complex128)
    absorbs = np.linalg.norm(s.mat @ t - t) < 1e-10 and np.linalg.norm(t @ s.mat - t) < 1e-10
    step = s.mat - t if absorbs else s.mat
    cur = eye - t if absorbs else eye.copy()
    out = [float(np.linalg.norm(eye - t))]
    for _ in range(n_max):
        cur = step @ cur
        out.append(float(np.linalg.norm(cur if absorbs else cur - t)))
    return out


def fit_log_rate(n: np.ndarray, dist: np.ndarray, n_max: int) -> tuple[float, float, tuple[int, int]]:
    """Least-squares slope of log(distance) over the tail of the series.

    The window is [n_max/4, n_max], cut where the distance drops below 1e-14.
    If the cut leaves fewer than ten points the start moves back, but never
    before iteration 10 unless the series is shorter than that.
    """
    alive = np.flatnonzero(dist >= UNDERFLOW)
    if alive.size < 2:
        return 0.0, 1.0, (0, 0)
    end = int(n[alive[-1]])
    # the window must be contiguous above the floor
    below = np.flatnonzero(dist < UNDERFLOW)
    if below.size:
        end = min(end, int(n[below[0]]) - 1)
    start = n_max // 4
    if end - start < 10:
        start = max(min(10, end // 2), end // 4)
    mask = (n >= start) & (n <= end)
    if mask.sum() < 2:
        mask = (n >= 0) & (n <= end)
        start = 0
    x, y = n[mask].astype(float), np.log(dist[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-300 else 1.0
    return float(slope), float(max(0.0, r2)), (start, end)


def trace_convergence(e: UnitaryEnsemble, n_max: int = 100) -> ConvergenceTrace:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    _twirl_dim(e)
    s = build_superoperator(e)
    dist = distance_series(s, n_max)
    n = np.arange(n_max + 1)
    slope, r2, window = fit_log_rate(n, np.asarray(dist), n_max)
    return ConvergenceTrace(
        n_values=n.tolist(),
        distances=dist,
        fitted_rate=slope,
        fit_r2=r2,
        subdominant_modulus=subdominant_modulus(s),
        fit_window=window,
    )


def convergence_rate(e: UnitaryEnsemble) -> float:
    """Asymptotic per-iteration contraction factor; requires twirl convergence."""
    report = check_convergence_to_twirl(e)
    if not report.converges_to_twirl:
        raise ChannelError("ensemble does not converge to the twirl")
    return report.subdominant_modulus


def _sector_bases(d: int) -> tuple[np.ndarray, np.ndarray]:
    ps, pa = sym_asym_projectors(d)
    qs = orthonormal_columns(ps)
    qa = orthonormal_columns(pa)
    return qs, qa


def sector_eigenvalues(e: UnitaryEnsemble) -> dict[str, np.ndarray]:
    """Superoperator spectrum split by symmetry sector.

    Every u (x) u commutes with the flip, so X -> U X U^dagger preserves the
    blocks P_a X P_b (a, b in {sym, asym}). The sym/asym and asym/sym blocks
    are related by X -> X^dagger and carry conjugate spectra, so only one is
    diagonalised.
    """
    qs, qa = _sector_bases(_twirl_dim(e))
    out = {}
    for name, qa_, qb_ in (("ss", qs, qs), ("sa", qs, qa), ("aa", qa, qa)):
        n = qa_.shape[1] * qb_.shape[1]
        mat = np.zeros((n, n), dtype=np.complex128)
        for p, u in zip(e.probs, e.unitaries):
            ua = qa_.conj().T @ u @ qa_
            ub = qb_.conj().T @ u @ qb_
            mat += p * np.kron(ub.conj(), ua)
        out[name] = eigvals(mat)
    return out


def rate_objective(e: UnitaryEnsemble) -> float:
    """Subdominant modulus, or 1.0 when the twirl is not the limit.

    For u (x) u ensembles span{P_sym, P_asym} is always fixed, so convergence
    holds exactly when the unit circle carries just those two eigenvalues,
    one in each diagonal sector.
    """
    d = _twirl_dim(e)
    f = flip_operator(d)
    if all(np.allclose(u @ f, f @ u, atol=1e-12) for u in e.unitaries):
        w = np.concatenate(list(sector_eigenvalues(e).values()))
    else:
        w = eigvals(build_superoperator(e).mat)
    mod = np.abs(w)
    peripheral = mod >= 1.0 - config.TOL.unit_circle
    if peripheral.sum() != 2 or np.any(np.abs(w[peripheral] - 1) > config.TOL.dedup):
        return 1.0
    return float(mod[~peripheral].max()) if (~peripheral).any() else 0.0


def distance_objective(e: UnitaryEnsemble, n: int = 50) -> float:
    """Alternative objective: ||S^n - T||_F at a fixed iteration."""
    return distance_series(build_superoperator(e), n)[-1]


def _simplex_from_free(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Probabilities from m-1 free coordinates, clamped to p_i >= PROB_FLOOR.

    Returns the clamped vector and the squared distance moved, used as a
    penalty so the search stays inside the feasible region.
    """
    p = np.append(x, 1.0 - np.sum(x))
    q = _project_simplex(p, PROB_FLOOR)
    return q, float(np.sum((p - q) ** 2))


def _project_simplex(p: np.ndarray, floor: float) -> np.ndarray:
    """Euclidean projection onto {q : sum q = 1, q_i >= floor}."""
    m = p.size
    shifted = p - floor
    budget = 1.0 - m * floor
    u = np.sort(shifted)[::-1]
    css = np.cumsum(u) - budget
    k = np.arange(1, m + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(shifted - tau, 0.0) + floor


def _random_interior(m: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.dirichlet(np.ones(m))
    return _project_simplex(p, 0.02)[:-1]


def _multistart(fun: Callable[[np.ndarray], float], starts: list[np.ndarray],
                history: list, maxiter: int) -> tuple[np.ndarray, float, list[float]]:
    best_x, best_f = None, np.inf
    start_values = []
    for x0 in starts:
        f0 = fun(x0)
        start_values.append(f0)
        res = minimize(fun, x0, method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": maxiter,
                                "adaptive": x0.size > 2})
        x, f = (res.x, float(res.fun)) if res.fun <= f0 else (x0, f0)
        # strict comparison keeps the lowest restart index on ties
        if f < best_f:
            best_x, best_f = np.array(x), f
    return best_x, best_f, start_values


def optimize_probabilities(e: UnitaryEnsemble, restarts: int = 10,
                           seed: int | np.random.Generator | None = 0,
                           objective: Callable[[UnitaryEnsemble], float] = rate_objective,
                           maxiter: int = 400) -> OptimizationResult:
    """Multi-start Nelder-Mead over the probability simplex."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    m = len(e)
    history: list[tuple[np.ndarray, float]] = []

    def fun(x: np.ndarray) -> float:
        p, pen = _simplex_from_free(np.asarray(x, dtype=float))
        val = objective(e.with_probs(p)) + 10.0 * pen
        history.append((p.copy(), val))
        return val

    if m == 1:
        val = objective(e)
        return OptimizationResult(np.array([1.0]), val, 0, [(np.array([1.0]), val)], (1.0,))

    starts = [_random_interior(m, rng) for _ in range(restarts)]
    _, _, start_values = _multistart(fun, starts, history, maxiter)
    best_f = min(v for _, v in history)
    best_p = next(p for p, v in history if v == best_f)
    log.debug("optimize_probabilities: best %.6g at %s", best_f, best_p)
    return OptimizationResult(
        best_params=best_p,
        best_objective=float(best_f),
        n_restarts=restarts,
        history=history,
        best_probs=tuple(float(v) for v in best_p),
        start_objectives=start_values,
    )


def _construction_arity(spec: ConstructionSpec) -> int:
    if spec.variant is Variant.THREE_OP:
        return 3
    if spec.variant is Variant.TWO_OP_ODD_D:
        return 2
    raise ConstructionError("optimize_construction needs the three_op or two_op variant")


def optimize_construction(spec: ConstructionSpec, restarts: int = 5,
                          seed: int | np.random.Generator | None = 0,
                          maxiter: int = 600) -> OptimizationResult:
    """Jointly optimise probabilities and the four real parameters of A.

    Parameter vector: m-1 free probabilities, then (phi, a, b, c) with
    alpha = cos(a) e^{ib}, beta = sin(a) e^{ic}. Restart 0 starts from the
    incoming spec so the result never scores worse than it.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    m = _construction_arity(spec)
    rng = np.random.default_rng(seed)
    history: list[tuple[np.ndarray, float]] = []

    def decode(x: np.ndarray):
        p, pen = _simplex_from_free(x[: m - 1])
        a = AParams.from_angles(*x[m - 1:])
        return p, a, pen

    def fun(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        p, a, pen = decode(x)
        if min(abs(a.alpha), abs(a.beta)) < 1e-6:
            val = 1.0
        else:
            val = rate_objective(build_ensemble(spec.with_(A=a, probs=tuple(p)))) + 10.0 * pen
        history.append((x.copy(), val))
        return val

    p0 = np.array(spec.probs) if spec.probs is not None else np.full(m, 1.0 / m)
    starts = [np.concatenate([p0[:-1], spec.A.angles()])]
    for _ in range(restarts - 1):
        ang = [rng.uniform(0, 2 * np.pi), rng.uniform(0.05, np.pi / 2 - 0.05),
               rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)]
        starts.append(np.concatenate([_random_interior(m, rng), ang]))
    _, _, start_values = _multistart(fun, starts, history, maxiter)
    best_f = min(v for _, v in history)
    best_x = next(x for x, v in history if v == best_f)
    p, a, _ = decode(best_x)
    return OptimizationResult(
        best_params=best_x,
        best_objective=float(best_f),
        n_restarts=restarts,
        history=history,
        best_probs=tuple(float(v) for v in p),
        best_A=a,
        start_objectives=start_values,
    )


def random_baseline(d: int, m: int = 2, seed: int | np.random.Generator | None = 0) -> UnitaryEnsemble:
    """m Haar-random single-qudit unitaries, lifted, uniform probabilities."""
    if d < 2 or m < 2:
        raise ValueError("need d >= 2 and m >= 2")
    rng = np.random.default_rng(seed)
    return UnitaryEnsemble.collective([haar_unitary(d, rng) for _ in range(m)])


def grid_scan_two(e: UnitaryEnsemble, step: float = 1e-3,
                  objective: Callable[[UnitaryEnsemble], float] = rate_objective) -> tuple[float, float]:
    """Brute-force argmin of the objective over p1 on a regular grid."""
    if len(e) != 2:
        raise ValueError("grid_scan_two needs a two-member ensemble")
    grid = np.arange(PROB_FLOOR, 1 - PROB_FLOOR + step / 2, step)
    vals = [objective(e.with_probs((p, 1 - p))) for p in grid]
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i])
