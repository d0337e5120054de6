"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Nothing here is
sparse; the largest object handled is a d**4 x d**4 superoperator (d <= 6).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import config


class LinalgError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.size == 0:
        raise LinalgError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    return a


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    limit = config.TOL.max_side
    if rows > limit or cols > limit:
        raise LinalgError("matrix too large")
    return np.kron(a, b)


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product Tr(x^dagger y)."""
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise LinalgError(f"shape mismatch {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))


def hs_norm(x) -> float:
    return float(np.linalg.norm(x))


def is_unitary(u, tol: float | None = None) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    tol = config.TOL.unitarity if tol is None else tol
    # scale with dimension: rounding in u^dagger u grows like sqrt(n) eps per entry
    scale = max(1.0, np.sqrt(u.shape[0]))
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol * scale)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, unit 2-norm, same order as eigenvalues

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))

    def residual(self, m) -> float:
        m = np.asarray(m)
        r = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.linalg.norm(r, axis=0))) if r.size else 0.0


def eig(m) -> EigenDecomposition:
    """Full non-Hermitian eigendecomposition (LAPACK geev: Hessenberg + Schur).

    Raises if the residual check fails, which for geev also covers the
    non-convergence case.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise LinalgError(f"eig needs a square matrix, got {m.shape}")
    try:
        w, v = scipy.linalg.eig(m, check_finite=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure path
        raise LinalgError(f"eigensolver failed to converge ({exc})") from exc
    v = v / np.linalg.norm(v, axis=0)
    dec = EigenDecomposition(w, v)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    res = dec.residual(m)
    if res > config.TOL.eig_residual * scale:
        raise LinalgError(f"eigen residual {res:.3e} above tolerance")
    return dec


def eigvals(m) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise LinalgError(f"eigvals needs a square matrix, got {m.shape}")
    return scipy.linalg.eigvals(m, check_finite=False)


def haar_unitary(d: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar-distributed d x d unitary via QR of a Ginibre matrix.

    The diagonal of R is made positive by moving its phases into Q; without
    this correction the distribution of Q is not Haar.
    """
    if d < 1:
        raise LinalgError("dimension must be positive")
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phases = diag / np.abs(diag)
    return q * phases


def gram_schmidt_hs(mats, drop_tol: float | None = None) -> list[np.ndarray]:
    """HS-orthonormalise a list of equally shaped matrices.

    Modified Gram-Schmidt with re-orthogonalisation. An input whose residual
    norm falls below ``drop_tol`` times its own norm is treated as linearly
    dependent and dropped.
    """
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    if not mats:
        return []
    shape = mats[0].shape
    if any(m.shape != shape for m in mats):
        raise LinalgError("all matrices must share a shape")
    drop_tol = config.TOL.rank_drop if drop_tol is None else drop_tol
    basis: list[np.ndarray] = []
    for m in mats:
        norm0 = np.linalg.norm(m)
        if norm0 == 0.0:
            continue
        v = m.copy()
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv <= drop_tol * norm0:
            continue
        basis.append(v / nv)
    return basis


def null_space(a, rel_tol: float | None = None) -> np.ndarray:
    """Orthonormal null-space columns of ``a`` by SVD thresholding.

    Singular values below ``rel_tol`` times the largest count as zero.
    """
    a = np.asarray(a, dtype=np.complex128)
    rel_tol = config.TOL.null_space if rel_tol is None else rel_tol
    _, s, vh = scipy.linalg.svd(a, full_matrices=True, check_finite=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(a.shape[1], dtype=np.complex128)
    rank = int(np.sum(s > rel_tol * smax))
    return vh[rank:].conj().T


def orthonormal_columns(vectors: np.ndarray, rel_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column span of ``vectors`` (SVD, rank-revealing)."""
    vectors = np.asarray(vectors, dtype=np.complex128)
    if vectors.size == 0:
        return vectors.reshape(vectors.shape[0], 0)
    rel_tol = config.TOL.rank_drop if rel_tol is None else rel_tol
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return vectors[:, :0]
    rank = int(np.sum(s > rel_tol * s[0]))
    return u[:, :rank]


def subspace_projector(basis) -> np.ndarray:
    """Orthogonal projector onto the span of vectorised matrices in ``basis``.

    ``basis`` is either a list of matrices or a 2-D array of column vectors.
    """
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        cols = basis
    else:
        basis = list(basis)
        if not basis:
            return None
        cols = np.column_stack([np.asarray(b).reshape(-1, order="F") for b in basis])
    q = orthonormal_columns(cols)
    return q @ q.conj().T


def subspace_distance(a, b) -> float:
    """Frobenius norm of the difference of the two orthogonal projectors.

    Empty spans are allowed; the distance is then sqrt(dim of the other).
    """
    pa = _projector_or_none(a)
    pb = _projector_or_none(b)
    if pa is None and pb is None:
        return 0.0
    if pa is None:
        return float(np.sqrt(np.real(np.trace(pb))))
    if pb is None:
        return float(np.sqrt(np.real(np.trace(pa))))
    return float(np.linalg.norm(pa - pb))


def principal_angles(a, b) -> np.ndarray:
    """Principal angles between two spans of vectorised matrices."""
    qa = _orthonormal_from(a)
    qb = _orthonormal_from(b)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.array([])
    return scipy.linalg.subspace_angles(qa, qb)


def _orthonormal_from(basis) -> np.ndarray:
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        return orthonormal_columns(basis)
    basis = list(basis)
    if not basis:
        return np.zeros((0, 0), dtype=np.complex128)
    cols = np.column_stack([np.asarray(b).reshape(-1, order="F") for b in basis])
    return orthonormal_columns(cols)


def _projector_or_none(basis):
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        return subspace_projector(basis) if basis.shape[1] else None
    basis = list(basis)
    return subspace_projector(basis) if basis else None
