"""Discrete-aware low-rank matrix completion.

Solvers for recovering a low-rank matrix from partial observations when the
entries are known to come from a finite alphabet (ratings, quantized
measurements), together with classical Soft-Impute baselines, dataset
utilities, an NMSE benchmark harness, and a CLI.
"""

from .errors import (
    CompletionError,
    ConfigError,
    DataError,
    DegenerateInputError,
    DimensionError,
    MetricError,
    NumericError,
)
from .linalg import ThinSVD, nuclear_norm, svt, svt_with_info, thin_svd
from .masks import IndexSet, apply_mask, complement, vec_extract, vec_scatter
from .metrics import alphabet_project, nmse
from .regularizer import (
    Alphabet,
    FPAux,
    discrete_l0_value,
    h_gradient,
    h_value,
    l0_approx,
    lipschitz_step,
    surrogate_value,
    update_fp_aux,
)
from .data import (
    Dataset,
    RatingRecord,
    SplitSpec,
    build_matrix,
    dataset_from_matrix,
    parse_movielens,
    read_matrix_csv,
    split,
    synth_discrete_lowrank,
    write_matrix_csv,
)
from .solvers import (
    GroundTruth,
    MomentumState,
    SolverConfig,
    SolverRun,
    TraceRecord,
    ais_impute,
    gamma_schedule,
    l0_fp_complete,
    l1_discrete_complete,
    momentum_extrapolate,
    prox_discrete_l1,
    run_solver,
    soft_impute,
    warm_start_complete,
)
from .benchmark import BenchmarkPlan, BenchmarkReport, load_plan, run_benchmark

__version__ = "0.1.0"
