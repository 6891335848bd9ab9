"""Discrete-space regularizer and its fractional-programming surrogate.

The regularizer measures how far the unobserved entries of a matrix sit from
a finite alphabet of admissible values.  Counting exact hits is combinatorial,
so the count is smoothed entrywise by ``x^2 / (x^2 + alpha)`` and the
resulting ratio sum is convexified with the quadratic transform: auxiliary
weights ``beta`` turn each ratio into a quadratic that upper-bounds it and
touches it at the current iterate.  Collecting the quadratics over all
alphabet letters gives a diagonal quadratic form ``h`` whose gradient and
Lipschitz step size are closed-form, which is what the solver iterates on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionError, NumericError
from .masks import IndexSet, as_matrix, vec_extract, vec_scatter

__all__ = [
    "Alphabet",
    "FPAux",
    "l0_approx",
    "discrete_l0_value",
    "l1_distance_value",
    "update_fp_aux",
    "h_value",
    "h_gradient",
    "lipschitz_step",
    "surrogate_value",
]


@dataclass(frozen=True)
class Alphabet:
    """Strictly increasing finite set of admissible entry values."""

    values: np.ndarray

    def __init__(self, values):
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("alphabet must be nonempty")
        if not np.all(np.isfinite(v)):
            raise ValueError("alphabet values must be finite")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("alphabet values must be strictly increasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_string(cls, text: str) -> "Alphabet":
        """Parse a comma-separated list such as ``"1,2,3,4,5"``."""
        try:
            return cls([float(t) for t in text.split(",") if t.strip() != ""])
        except ValueError as exc:
            raise ValueError(f"cannot parse alphabet {text!r}: {exc}") from exc

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def lo(self) -> float:
        return float(self.values[0])

    @property
    def hi(self) -> float:
        return float(self.values[-1])

    def nearest(self, x) -> np.ndarray:
        """Nearest letter for each element of ``x``; ties go to the smaller letter."""
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self.values, x)
        left = np.clip(idx - 1, 0, len(self) - 1)
        right = np.clip(idx, 0, len(self) - 1)
        lv, rv = self.values[left], self.values[right]
        return np.where(np.abs(x - lv) <= np.abs(rv - x), lv, rv)


@dataclass(frozen=True)
class FPAux:
    """Quadratic-transform auxiliaries for a fixed vector of unobserved entries.

    ``beta[k, j] = sqrt(alpha) / ((x_j - a_k)^2 + alpha)`` for letter ``a_k``
    and entry ``x_j``; ``B_diag`` and ``b`` aggregate the squared weights into
    the diagonal quadratic form ``h``.
    """

    beta: np.ndarray = field(repr=False)  # (|A|, n)
    B_diag: np.ndarray = field(repr=False)  # (n,)
    b: np.ndarray = field(repr=False)  # (n,)

    @property
    def size(self) -> int:
        return int(self.B_diag.size)


def l0_approx(v, alpha: float) -> float:
    """Smooth support count ``sum_i v_i^2 / (v_i^2 + alpha)``.

    Lies in ``[0, len(v))`` and increases toward the exact nonzero count as
    ``alpha`` shrinks.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    v = np.asarray(v, dtype=np.float64).ravel()
    sq = v * v
    return float(np.sum(sq / (sq + alpha)))


def _pair_sq_dist(x_bar: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    # (|A|, n) table of (x_j - a_k)^2; overflow to inf is handled by the
    # degenerate-weight guards downstream (it marks diverged iterates)
    d = x_bar[None, :] - alphabet.values[:, None]
    with np.errstate(over="ignore"):
        return d * d


def discrete_l0_value(X, omega_bar: IndexSet, alphabet: Alphabet, alpha: float) -> float:
    """Smoothed distance-to-alphabet count over the unobserved entries.

    Returns ``-sum_k sum_j alpha / ((x_j - a_k)^2 + alpha)``; the additive
    constant ``|A| * |omega_bar|`` of the smooth support count is dropped.
    More negative means the entries sit closer to alphabet letters.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    x_bar = vec_extract(X, omega_bar)
    return discrete_l0_value_vec(x_bar, alphabet, alpha)


def discrete_l0_value_vec(x_bar, alphabet: Alphabet, alpha: float) -> float:
    """Same as :func:`discrete_l0_value` on an already-extracted vector."""
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    if x_bar.size == 0:
        return 0.0
    d2 = _pair_sq_dist(x_bar, alphabet)
    return float(-np.sum(alpha / (d2 + alpha)))


def l1_distance_value(x_bar, alphabet: Alphabet) -> float:
    """Summed absolute distance to every letter: ``sum_k ||x_bar - a_k 1||_1``."""
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    if x_bar.size == 0:
        return 0.0
    return float(np.sum(np.abs(x_bar[None, :] - alphabet.values[:, None])))


def update_fp_aux(x_bar, alphabet: Alphabet, alpha: float) -> FPAux:
    """Closed-form update of the transform weights at the current iterate.

    The weights maximize the quadratic lower bound of each ratio term, which
    makes the surrogate touch the smoothed regularizer at ``x_bar``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    d2 = _pair_sq_dist(x_bar, alphabet)
    beta = np.sqrt(alpha) / (d2 + alpha)
    beta_sq = beta * beta
    B_diag = beta_sq.sum(axis=0)
    b = (alphabet.values[:, None] * beta_sq).sum(axis=0)
    return FPAux(beta=beta, B_diag=B_diag, b=b)


def _check_aux_len(x_bar: np.ndarray, aux: FPAux):
    if x_bar.size != aux.size:
        raise DimensionError(f"vector length {x_bar.size} != aux size {aux.size}")


def h_value(x_bar, aux: FPAux) -> float:
    """Convex quadratic ``x^T B x - 2 x^T b`` used inside the solver."""
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    _check_aux_len(x_bar, aux)
    return float(np.sum(aux.B_diag * x_bar * x_bar) - 2.0 * np.sum(aux.b * x_bar))


def h_gradient(X, omega_bar: IndexSet, aux: FPAux) -> np.ndarray:
    """Gradient of ``h`` as a matrix supported on the unobserved positions.

    Equals the scatter of ``2 B x_bar - 2 b``; observed positions stay zero.
    """
    x_bar = vec_extract(X, omega_bar)
    _check_aux_len(x_bar, aux)
    return vec_scatter(h_gradient_vec(x_bar, aux), omega_bar)


def h_gradient_vec(x_bar: np.ndarray, aux: FPAux) -> np.ndarray:
    """Gradient of ``h`` with respect to the extracted vector."""
    return 2.0 * aux.B_diag * x_bar - 2.0 * aux.b


def lipschitz_step(aux: FPAux, rule: str = "paper") -> tuple[float, float]:
    """Step-size constant ``L`` and the largest admissible step ``mu = 1/L``.

    ``rule="paper"`` uses ``L = max_j B_jj^2`` (the low-complexity bound the
    method was published with); ``rule="classical"`` uses the gradient's true
    Lipschitz constant ``L = 2 max_j B_jj``.
    """
    if aux.size == 0:
        raise DegenerateInputError(
            "empty index set: no unobserved entries, the discrete step does not apply"
        )
    bmax = float(aux.B_diag.max())
    if bmax <= 0.0 or not np.isfinite(bmax):
        raise NumericError(
            f"transform weights degenerate (max B_jj = {bmax}); "
            "iterates have likely diverged"
        )
    if rule == "paper":
        L = bmax * bmax
    elif rule == "classical":
        L = 2.0 * bmax
    else:
        raise ValueError(f"unknown lipschitz rule {rule!r}")
    return L, 1.0 / L


def surrogate_value(x_bar, aux: FPAux, alphabet: Alphabet, alpha: float) -> float:
    """Quadratic-transform upper bound on :func:`discrete_l0_value`.

    Evaluates ``sum_k sum_j [beta_kj^2 ((x_j - a_k)^2 + alpha) - 2 beta_kj
    sqrt(alpha)]`` with the input-independent terms kept, so the bound equals
    the regularizer exactly when ``aux`` was built from ``x_bar`` and
    dominates it for any other weights.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    _check_aux_len(x_bar, aux)
    if x_bar.size == 0:
        return 0.0
    if aux.beta.shape != (len(alphabet), x_bar.size):
        raise DimensionError(
            f"beta table shape {aux.beta.shape} != ({len(alphabet)}, {x_bar.size})"
        )
    d2 = _pair_sq_dist(x_bar, alphabet)
    beta_sq = aux.beta * aux.beta
    return float(np.sum(beta_sq * (d2 + alpha) - 2.0 * np.sqrt(alpha) * aux.beta))
