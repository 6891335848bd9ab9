"""Completion solvers sharing a proximal-gradient skeleton.

Four algorithms operate on the same observed-matrix inputs:

``soft_impute``
    Iterates SVT on the observed entries filled back into the current
    iterate.
``ais_impute``
    Same recursion with Nesterov-type momentum extrapolation.
``l1_discrete_complete``
    Momentum step, an exact elementwise prox of the summed absolute
    distance to the alphabet on the unobserved entries, then SVT with the
    observed entries clamped.
``l0_fp_complete``
    Two nested loops: the outer loop refits the quadratic-transform weights
    of the smoothed discrete regularizer and the step size, the inner loop
    runs accelerated proximal-gradient steps (momentum, gradient of the
    convex surrogate on unobserved entries, clamped SVT).

``warm_start_complete`` chains the last two: the absolute-distance solver's
result seeds the transform-based solver.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigError, DimensionError, MetricError, NumericError
from .linalg import svt_with_info
from .masks import IndexSet, as_matrix, vec_extract
from .regularizer import (
    Alphabet,
    discrete_l0_value_vec,
    h_gradient_vec,
    l1_distance_value,
    lipschitz_step,
    update_fp_aux,
)

__all__ = [
    "SolverConfig",
    "MomentumState",
    "TraceRecord",
    "SolverRun",
    "GroundTruth",
    "gamma_schedule",
    "momentum_extrapolate",
    "initial_momentum_state",
    "advance_momentum",
    "prox_discrete_l1",
    "prox_discrete_l1_vec",
    "soft_impute",
    "ais_impute",
    "l1_discrete_complete",
    "l0_fp_complete",
    "warm_start_complete",
    "run_solver",
    "SOLVER_NAMES",
]


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by all solvers.

    ``lam`` weights the nuclear norm, ``zeta`` the discrete regularizer and
    ``alpha`` is the smoothing constant of the approximate support count.
    ``mu_override`` replaces the Lipschitz-derived gradient step when set.
    ``momentum_plus_form`` switches the extrapolation to the additive lag
    form for fidelity experiments; the default subtracts the lag term.
    """

    lam: float = 10.0
    zeta: float = 0.15
    alpha: float = 0.1
    max_inner_iters: int = 500
    max_outer_iters: int = 20
    inner_tol: float = 1e-4
    outer_tol: float = 1e-3
    seed: int = 0
    mu_override: Optional[float] = None
    lipschitz_rule: str = "paper"
    momentum_plus_form: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.zeta < 0:
            raise ConfigError(f"zeta must be >= 0, got {self.zeta}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.max_inner_iters < 1 or self.max_outer_iters < 1:
            raise ConfigError("iteration caps must be >= 1")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ConfigError("tolerances must be > 0")
        if self.mu_override is not None and self.mu_override <= 0:
            raise ConfigError(f"mu_override must be > 0, got {self.mu_override}")
        if self.lipschitz_rule not in ("paper", "classical"):
            raise ConfigError(f"unknown lipschitz_rule {self.lipschitz_rule!r}")


@dataclass
class MomentumState:
    """Consecutive momentum weights and the two most recent iterates."""

    theta_prev: float
    theta_curr: float
    X_prev: np.ndarray
    X_prev2: np.ndarray


class GroundTruth(NamedTuple):
    """Reference matrix and the positions NMSE is evaluated on."""

    truth: np.ndarray
    eval_set: IndexSet


@dataclass(frozen=True)
class TraceRecord:
    """One inner iteration of a solver run."""

    iteration: int  # global, 1-based, continues across warm-start phases
    phase: str
    outer: int
    inner: int
    objective: float
    nmse: float  # NaN when no ground truth was supplied
    rel_change: float
    wall_ms: float


@dataclass
class SolverRun:
    """Result of one solver invocation."""

    final_X: np.ndarray
    trace: list[TraceRecord]
    converged: bool
    iterations_used: tuple[int, int]  # (outer iterations, inner total)
    warnings: tuple[str, ...] = field(default=())


def _theta_next(theta: float) -> float:
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))


def initial_momentum_state(X0: np.ndarray) -> MomentumState:
    """Fresh state: first extrapolation weight is exactly zero."""
    return MomentumState(1.0, _theta_next(1.0), X0, X0)


def advance_momentum(state: MomentumState, X_new: np.ndarray) -> MomentumState:
    """Shift the iterate history and step the weight recursion."""
    return MomentumState(state.theta_curr, _theta_next(state.theta_curr), X_new, state.X_prev)


def gamma_schedule(state: MomentumState) -> float:
    """Momentum weight ``(theta_prev - 1) / theta_curr`` of the current step."""
    return (state.theta_prev - 1.0) / state.theta_curr


def momentum_extrapolate(X_prev, X_prev2, gamma: float, plus_form: bool = False) -> np.ndarray:
    """Extrapolated point ``(1 + gamma) X_prev - gamma X_prev2``.

    ``plus_form=True`` adds the lag term instead of subtracting it (the
    non-extrapolating variant kept for comparison runs).
    """
    X_prev = np.asarray(X_prev, dtype=np.float64)
    X_prev2 = np.asarray(X_prev2, dtype=np.float64)
    if X_prev.shape != X_prev2.shape:
        raise DimensionError(f"iterate shapes differ: {X_prev.shape} vs {X_prev2.shape}")
    if gamma == 0.0:
        return X_prev
    if plus_form:
        return (1.0 + gamma) * X_prev + gamma * X_prev2
    return (1.0 + gamma) * X_prev - gamma * X_prev2


# ---------------------------------------------------------------------------
# elementwise prox of  sum_k |u - a_k| + (u - y)^2 / (2 zeta)
# ---------------------------------------------------------------------------

_PROX_CHUNK = 1 << 18


def _prox_candidates(alphabet: Alphabet, zeta: float) -> np.ndarray:
    # signed count of letters below minus above for each linear piece
    K = len(alphabet)
    s = 2.0 * np.arange(K + 1) - K
    return zeta * s


def prox_discrete_l1(y: float, alphabet: Alphabet, zeta: float) -> float:
    """Exact scalar prox of the summed absolute distance to the alphabet.

    The objective is convex piecewise-quadratic, so the minimizer is either a
    stationary point of one linear piece (``u = y - zeta * s`` with ``s`` the
    piece's signed letter count) or one of the letters; all candidates are
    evaluated and the best taken.  With a single letter this reduces to
    soft-thresholding toward it.
    """
    if zeta < 0:
        raise ConfigError(f"zeta must be >= 0, got {zeta}")
    if zeta == 0.0:
        return float(y)
    cands = np.concatenate([y - _prox_candidates(alphabet, zeta), alphabet.values])
    dist = np.abs(cands[:, None] - alphabet.values[None, :]).sum(axis=1)
    phi = dist + (cands - y) ** 2 / (2.0 * zeta)
    return float(cands[int(np.argmin(phi))])


def prox_discrete_l1_vec(y, alphabet: Alphabet, zeta: float) -> np.ndarray:
    """Vectorized :func:`prox_discrete_l1` over a 1-D array."""
    if zeta < 0:
        raise ConfigError(f"zeta must be >= 0, got {zeta}")
    y = np.asarray(y, dtype=np.float64).ravel()
    if zeta == 0.0 or y.size == 0:
        return y.copy()
    shifts = _prox_candidates(alphabet, zeta)
    letters = alphabet.values
    out = np.empty_like(y)
    for lo in range(0, y.size, _PROX_CHUNK):
        block = y[lo : lo + _PROX_CHUNK]
        cands = np.concatenate(
            [block[:, None] - shifts[None, :], np.broadcast_to(letters, (block.size, letters.size))],
            axis=1,
        )
        phi = np.abs(cands[:, :, None] - letters[None, None, :]).sum(axis=2)
        phi += (cands - block[:, None]) ** 2 / (2.0 * zeta)
        out[lo : lo + _PROX_CHUNK] = cands[np.arange(block.size), np.argmin(phi, axis=1)]
    return out


# ---------------------------------------------------------------------------
# shared run machinery
# ---------------------------------------------------------------------------


class _NmseTracker:
    """Per-iteration NMSE against a fixed evaluation set; NaN when absent."""

    def __init__(self, ground_truth, shape):
        if ground_truth is None:
            self._eval = None
            return
        truth, eval_set = ground_truth
        truth = as_matrix(truth, "ground truth")
        if truth.shape != shape:
            raise DimensionError(f"ground truth shape {truth.shape} != {shape}")
        if len(eval_set) == 0:
            raise MetricError("evaluation set is empty")
        self._eval = eval_set
        self._truth_vals = vec_extract(truth, eval_set)
        self._denom = float(np.sum(self._truth_vals**2))
        if self._denom == 0.0:
            raise MetricError("ground truth is zero on the evaluation set")

    def value(self, X: np.ndarray) -> float:
        if self._eval is None:
            return float("nan")
        diff = X[self._eval.rows_idx, self._eval.cols_idx] - self._truth_vals
        return float(np.sum(diff * diff) / self._denom)


def _relative_change(X_new: np.ndarray, X_old: np.ndarray) -> float:
    # inf/inf on diverging trajectories reads as "not converged"
    with np.errstate(invalid="ignore", over="ignore"):
        rel = np.linalg.norm(X_new - X_old) / max(1.0, np.linalg.norm(X_old))
    return float(rel) if np.isfinite(rel) else float("inf")


def _assemble_clamped(obs_vals, omega: IndexSet, bar_vals, omega_bar: IndexSet) -> np.ndarray:
    # omega and omega_bar partition the shape, so every entry is written
    out = np.empty(omega.shape, dtype=np.float64)
    out[omega.rows_idx, omega.cols_idx] = obs_vals
    out[omega_bar.rows_idx, omega_bar.cols_idx] = bar_vals
    return out


def _half_sq_err(x_obs: np.ndarray, obs: np.ndarray) -> float:
    d = x_obs - obs
    with np.errstate(over="ignore"):
        return 0.5 * float(np.sum(d * d))


def _uniform_init(shape, alphabet: Alphabet, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(alphabet.lo, alphabet.hi, size=shape)


def _prepare(O, omega: IndexSet):
    O = as_matrix(O, "O")
    omega._check_shape(O)
    return O, vec_extract(O, omega)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------


def soft_impute(O, omega: IndexSet, cfg: SolverConfig, ground_truth=None) -> SolverRun:
    """Iterate ``X <- SVT(observed entries filled into X)`` until stable."""
    O, obs = _prepare(O, omega)
    omega_bar = omega.complement()
    tracker = _NmseTracker(ground_truth, O.shape)
    X = np.zeros_like(O)
    trace: list[TraceRecord] = []
    converged = False
    rank_hint = None
    for t in range(1, cfg.max_inner_iters + 1):
        tic = time.perf_counter()
        arg = _assemble_clamped(obs, omega, vec_extract(X, omega_bar), omega_bar)
        res = svt_with_info(arg, cfg.lam, rank_hint)
        rank_hint = res.rank + 4
        obj = _half_sq_err(vec_extract(res.X, omega), obs) + cfg.lam * res.nuclear_norm
        rel = _relative_change(res.X, X)
        trace.append(
            TraceRecord(t, "si", 1, t, obj, tracker.value(res.X), rel,
                        (time.perf_counter() - tic) * 1e3)
        )
        X = res.X
        if rel <= cfg.inner_tol:
            converged = True
            break
    return SolverRun(X, trace, converged, (1, len(trace)))


def ais_impute(O, omega: IndexSet, cfg: SolverConfig, ground_truth=None) -> SolverRun:
    """Soft-Impute recursion applied at the momentum-extrapolated point."""
    O, obs = _prepare(O, omega)
    omega_bar = omega.complement()
    tracker = _NmseTracker(ground_truth, O.shape)
    state = initial_momentum_state(np.zeros_like(O))
    trace: list[TraceRecord] = []
    converged = False
    rank_hint = None
    for t in range(1, cfg.max_inner_iters + 1):
        tic = time.perf_counter()
        gamma = gamma_schedule(state)
        Y = momentum_extrapolate(state.X_prev, state.X_prev2, gamma, cfg.momentum_plus_form)
        arg = _assemble_clamped(obs, omega, vec_extract(Y, omega_bar), omega_bar)
        res = svt_with_info(arg, cfg.lam, rank_hint)
        rank_hint = res.rank + 4
        obj = _half_sq_err(vec_extract(res.X, omega), obs) + cfg.lam * res.nuclear_norm
        rel = _relative_change(res.X, state.X_prev)
        trace.append(
            TraceRecord(t, "ais", 1, t, obj, tracker.value(res.X), rel,
                        (time.perf_counter() - tic) * 1e3)
        )
        state = advance_momentum(state, res.X)
        if rel <= cfg.inner_tol:
            converged = True
            break
    return SolverRun(state.X_prev, trace, converged, (1, len(trace)))


def _l1_loop(O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, phase, iter_offset):
    """Momentum + elementwise prox + clamped SVT; shared by the absolute-
    distance solver and the zero-weight reduction of the transform solver."""
    state = initial_momentum_state(X0)
    trace: list[TraceRecord] = []
    converged = False
    rank_hint = None
    for t in range(1, cfg.max_inner_iters + 1):
        tic = time.perf_counter()
        gamma = gamma_schedule(state)
        Y = momentum_extrapolate(state.X_prev, state.X_prev2, gamma, cfg.momentum_plus_form)
        z_bar = prox_discrete_l1_vec(vec_extract(Y, omega_bar), alphabet, cfg.zeta)
        arg = _assemble_clamped(obs, omega, z_bar, omega_bar)
        res = svt_with_info(arg, cfg.lam, rank_hint)
        rank_hint = res.rank + 4
        obj = _half_sq_err(vec_extract(res.X, omega), obs) + cfg.lam * res.nuclear_norm
        if cfg.zeta > 0.0:
            obj += cfg.zeta * l1_distance_value(vec_extract(res.X, omega_bar), alphabet)
        rel = _relative_change(res.X, state.X_prev)
        trace.append(
            TraceRecord(iter_offset + t, phase, 1, t, obj, tracker.value(res.X), rel,
                        (time.perf_counter() - tic) * 1e3)
        )
        state = advance_momentum(state, res.X)
        if rel <= cfg.inner_tol:
            converged = True
            break
    return state.X_prev, trace, converged


def l1_discrete_complete(O, omega: IndexSet, alphabet: Alphabet, cfg: SolverConfig,
                         ground_truth=None) -> SolverRun:
    """Discrete-aware completion with the absolute-distance regularizer."""
    O, obs = _prepare(O, omega)
    omega_bar = omega.complement()
    tracker = _NmseTracker(ground_truth, O.shape)
    X0 = _uniform_init(O.shape, alphabet, cfg.seed)
    X, trace, converged = _l1_loop(O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, "l1", 0)
    return SolverRun(X, trace, converged, (1, len(trace)))


def _rel_inf_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.max(np.abs(new - old)) / max(np.max(np.abs(old)), 1e-30))


def _l0_outer(O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, phase, iter_offset):
    """Transform-weight outer loop around an accelerated inner loop."""
    X = X0
    B_prev = None
    trace: list[TraceRecord] = []
    outer_converged = False
    outer_used = 0
    rank_hint = None
    for outer in range(1, cfg.max_outer_iters + 1):
        if not np.all(np.isfinite(X)):
            raise NumericError(
                "iterates diverged (non-finite entries); the gradient step size "
                "is too aggressive for this instance"
            )
        aux = update_fp_aux(vec_extract(X, omega_bar), alphabet, cfg.alpha)
        if B_prev is not None and _rel_inf_change(aux.B_diag, B_prev) <= cfg.outer_tol:
            outer_converged = True
            break
        B_prev = aux.B_diag
        _, mu = lipschitz_step(aux, cfg.lipschitz_rule)
        if cfg.mu_override is not None:
            mu = cfg.mu_override
        outer_used += 1
        # fresh momentum sequence for the new surrogate, starting at X
        state = initial_momentum_state(X)
        for t in range(1, cfg.max_inner_iters + 1):
            tic = time.perf_counter()
            gamma = gamma_schedule(state)
            Y = momentum_extrapolate(state.X_prev, state.X_prev2, gamma, cfg.momentum_plus_form)
            y_bar = vec_extract(Y, omega_bar)
            step_bar = y_bar - (mu * cfg.zeta) * h_gradient_vec(y_bar, aux)
            arg = _assemble_clamped(obs, omega, step_bar, omega_bar)
            res = svt_with_info(arg, cfg.lam, rank_hint)
            rank_hint = res.rank + 4
            obj = _half_sq_err(vec_extract(res.X, omega), obs) + cfg.lam * res.nuclear_norm
            obj += cfg.zeta * discrete_l0_value_vec(vec_extract(res.X, omega_bar), alphabet, cfg.alpha)
            if not np.isfinite(obj):
                raise NumericError(
                    "objective diverged; the gradient step size is too aggressive "
                    "for this instance"
                )
            rel = _relative_change(res.X, state.X_prev)
            trace.append(
                TraceRecord(iter_offset + len(trace) + 1, phase, outer, t, obj,
                            tracker.value(res.X), rel, (time.perf_counter() - tic) * 1e3)
            )
            state = advance_momentum(state, res.X)
            if rel <= cfg.inner_tol:
                break
        X = state.X_prev
    return X, trace, outer_converged, outer_used


def l0_fp_complete(O, omega: IndexSet, alphabet: Alphabet, cfg: SolverConfig,
                   ground_truth=None, initial_X=None) -> SolverRun:
    """Discrete-aware completion with the transform-convexified support count.

    ``initial_X`` replaces the seeded uniform initialization (used by the
    warm-start pipeline).  With ``zeta == 0`` the transform machinery is
    inert and the run reduces exactly to the accelerated clamped iteration.
    """
    O, obs = _prepare(O, omega)
    omega_bar = omega.complement()
    tracker = _NmseTracker(ground_truth, O.shape)
    if initial_X is None:
        X0 = _uniform_init(O.shape, alphabet, cfg.seed)
    else:
        X0 = as_matrix(initial_X, "initial_X")
        if X0.shape != O.shape:
            raise DimensionError(f"initial_X shape {X0.shape} != {O.shape}")
    if len(omega_bar) == 0:
        tic = time.perf_counter()
        res = svt_with_info(O, cfg.lam)
        obj = _half_sq_err(vec_extract(res.X, omega), obs) + cfg.lam * res.nuclear_norm
        trace = [TraceRecord(1, "l0", 1, 1, obj, tracker.value(res.X), 0.0,
                             (time.perf_counter() - tic) * 1e3)]
        return SolverRun(res.X, trace, True, (1, 1),
                         ("no unobserved entries; returned the thresholded observed matrix",))
    if cfg.zeta == 0.0:
        X, trace, converged = _l1_loop(O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, "l0", 0)
        return SolverRun(X, trace, converged, (1, len(trace)))
    X, trace, converged, outer_used = _l0_outer(
        O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, "l0", 0
    )
    return SolverRun(X, trace, converged, (outer_used, len(trace)))


def warm_start_complete(O, omega: IndexSet, alphabet: Alphabet, cfg: SolverConfig,
                        ground_truth=None) -> SolverRun:
    """Absolute-distance phase first, then the transform solver from its output.

    Traces of both phases are concatenated; the ``phase`` column tells them
    apart and iteration numbering continues across the seam.
    """
    O, obs = _prepare(O, omega)
    omega_bar = omega.complement()
    tracker = _NmseTracker(ground_truth, O.shape)
    X0 = _uniform_init(O.shape, alphabet, cfg.seed)
    X1, trace1, _ = _l1_loop(O, obs, omega, omega_bar, alphabet, cfg, tracker, X0, "l1", 0)
    if len(omega_bar) == 0 or cfg.zeta == 0.0:
        run = l0_fp_complete(O, omega, alphabet, cfg, ground_truth, initial_X=X1)
        offset = len(trace1)
        shifted = [
            TraceRecord(offset + r.iteration, r.phase, r.outer, r.inner, r.objective,
                        r.nmse, r.rel_change, r.wall_ms)
            for r in run.trace
        ]
        return SolverRun(run.final_X, trace1 + shifted, run.converged,
                         (1 + run.iterations_used[0], len(trace1) + run.iterations_used[1]),
                         run.warnings)
    X, trace2, converged, outer_used = _l0_outer(
        O, obs, omega, omega_bar, alphabet, cfg, tracker, X1, "l0", len(trace1)
    )
    return SolverRun(X, trace1 + trace2, converged,
                     (1 + outer_used, len(trace1) + len(trace2)))


SOLVER_NAMES = ("si", "ais", "l1", "l0", "warm")


def run_solver(name: str, O, omega: IndexSet, alphabet: Alphabet, cfg: SolverConfig,
               ground_truth=None) -> SolverRun:
    """Dispatch a solver by its short name."""
    if name == "si":
        return soft_impute(O, omega, cfg, ground_truth)
    if name == "ais":
        return ais_impute(O, omega, cfg, ground_truth)
    if name == "l1":
        return l1_discrete_complete(O, omega, alphabet, cfg, ground_truth)
    if name == "l0":
        return l0_fp_complete(O, omega, alphabet, cfg, ground_truth)
    if name == "warm":
        return warm_start_complete(O, omega, alphabet, cfg, ground_truth)
    raise ConfigError(f"unknown solver {name!r}; expected one of {SOLVER_NAMES}")
