"""Thin SVD and the singular value thresholding (SVT) operator.

SVT is the proximal operator of the nuclear norm: it soft-thresholds the
singular values of its input.  Small inputs are decomposed exactly with
LAPACK; large inputs may use a seeded randomized partial SVD that is grown
adaptively until every singular value above the threshold is captured, which
keeps per-iteration cost proportional to the iterate's rank instead of the
full matrix dimension.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg
from sklearn.utils.extmath import randomized_svd

from .errors import NumericError
from .masks import as_matrix

__all__ = ["ThinSVD", "SvtResult", "thin_svd", "svt", "svt_with_info", "nuclear_norm"]

# singular values within this absolute slack of the threshold are treated as
# zeroed, so SVD sign noise cannot inflate the reported rank
SVT_RANK_EPS = 1e-12

# matrices with min(m, n) at or below this always take the exact LAPACK path
_EXACT_SIDE_LIMIT = 400

# the randomized path only beats LAPACK for ranks well under the short side;
# beyond this fraction the exact decomposition is cheaper
_RSVD_RANK_FRACTION = 6

# fixed seed for the randomized path: results must not depend on solver seeds
_RSVD_SEED = 0
_RSVD_POWER_ITERS = 2


class ThinSVD(NamedTuple):
    """Factors ``U @ diag(sigma) @ V.T`` with orthonormal columns in U and V."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


class SvtResult(NamedTuple):
    """Thresholded matrix plus the data solvers reuse each iteration."""

    X: np.ndarray
    sigma: np.ndarray  # thresholded singular values, nonincreasing, zeros dropped
    rank: int

    @property
    def nuclear_norm(self) -> float:
        return float(self.sigma.sum())


def _lapack_svd(A: np.ndarray):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but sturdier
        try:
            return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
        except Exception as exc:
            raise NumericError(
                f"SVD failed to converge for shape {A.shape}, "
                f"fro_norm={np.linalg.norm(A):.3e} (gesdd and gesvd both failed)"
            ) from exc


def thin_svd(A, svd_tol: float = 1e-10, rank_cap: Optional[int] = None) -> ThinSVD:
    """Thin SVD of a dense matrix.

    Parameters
    ----------
    A : array_like
        Real matrix, all entries finite.
    svd_tol : float
        Relative reconstruction tolerance checked for full decompositions:
        ``||U diag(s) V.T - A||_F <= svd_tol * max(1, ||A||_F)``.
    rank_cap : int, optional
        Keep only the leading ``rank_cap`` components.  The reconstruction
        check is skipped for truncated decompositions.
    """
    A = as_matrix(A, "A")
    U, s, Vt = _lapack_svd(A)
    if rank_cap is not None and rank_cap < s.size:
        U, s, Vt = U[:, :rank_cap], s[:rank_cap], Vt[:rank_cap]
    else:
        resid = np.linalg.norm(U @ (s[:, None] * Vt) - A)
        bound = svd_tol * max(1.0, np.linalg.norm(A))
        if resid > bound:
            raise NumericError(
                f"SVD reconstruction residual {resid:.3e} exceeds {bound:.3e} "
                f"for shape {A.shape}"
            )
    return ThinSVD(U, s, Vt.T)


def nuclear_norm(A) -> float:
    """Sum of singular values."""
    A = as_matrix(A, "A")
    return float(np.linalg.svd(A, compute_uv=False).sum())


def _shrink(s: np.ndarray, lam: float) -> np.ndarray:
    shrunk = s - lam
    shrunk[shrunk <= SVT_RANK_EPS] = 0.0
    return shrunk


def _svt_exact(A: np.ndarray, lam: float) -> SvtResult:
    U, s, Vt = _lapack_svd(A)
    shrunk = _shrink(s, lam)
    r = int(np.count_nonzero(shrunk))
    if r == 0:
        return SvtResult(np.zeros_like(A), shrunk[:0], 0)
    X = U[:, :r] @ (shrunk[:r, None] * Vt[:r])
    return SvtResult(X, shrunk[:r], r)


def _svt_randomized(A: np.ndarray, lam: float, rank_hint: int) -> SvtResult:
    min_side = min(A.shape)
    cutoff = min_side // _RSVD_RANK_FRACTION
    k = int(np.clip(rank_hint, 1, min_side))
    if k > cutoff:
        return _svt_exact(A, lam)
    while True:
        U, s, Vt = randomized_svd(
            A,
            n_components=k,
            n_iter=_RSVD_POWER_ITERS,
            power_iteration_normalizer="QR",
            random_state=_RSVD_SEED,
        )
        # the smallest computed value must fall below the threshold, else more
        # components could survive shrinkage and k has to grow
        if s[-1] <= lam:
            break
        k = min(min_side, max(k + 8, 2 * k))
        if k > cutoff:
            return _svt_exact(A, lam)
    shrunk = _shrink(s, lam)
    r = int(np.count_nonzero(shrunk))
    if r == 0:
        return SvtResult(np.zeros_like(A), shrunk[:0], 0)
    X = U[:, :r] @ (shrunk[:r, None] * Vt[:r])
    return SvtResult(X, shrunk[:r], r)


def svt_with_info(A, lam: float, rank_hint: Optional[int] = None) -> SvtResult:
    """SVT returning the thresholded singular values alongside the matrix.

    ``rank_hint`` (typically the previous iterate's rank) routes large
    matrices onto the adaptive partial decomposition; without a hint, or for
    small matrices, the decomposition is exact.
    """
    A = as_matrix(A, "A")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if rank_hint is None or min(A.shape) <= _EXACT_SIDE_LIMIT:
        return _svt_exact(A, lam)
    return _svt_randomized(A, lam, rank_hint)


def svt(A, lam: float, rank_hint: Optional[int] = None) -> np.ndarray:
    """Singular value thresholding ``U (Sigma - lam I)_+ V.T``."""
    return svt_with_info(A, lam, rank_hint).X
