"""bikrylov: Bi-CG/Bi-CR Krylov solvers with residual smoothing.

A small sparse-linear-algebra core (CSR matrices, Matrix Market I/O), the
CG/CR and Bi-CG/Bi-CR solver family including smoothed Bi-CG variants whose
residuals reproduce Bi-CR, post-hoc MRS/QMR residual smoothing, and an
experiment harness with a CLI for convergence-history comparisons.
"""

from .harness import (
    SOLVERS,
    DivergenceReport,
    ExperimentConfig,
    MatrixMarketSource,
    ToeplitzSource,
    build_matrix,
    compare_histories,
    emit_csv,
    run_experiment,
)
from .linalg import (
    BreakdownError,
    SparseMatrix,
    axpy,
    csr_from_triplets,
    dot,
    matvec,
    matvec_transpose,
    norm2,
    read_matrix_market,
    toeplitz_banded,
    write_matrix_market,
)
from .products import (
    ExtendedSystem,
    PairedVector,
    extend_system,
    h_inner,
    quasi_inner,
)
from .smoothing import (
    SmoothedHistory,
    SmoothingState,
    mrs_eta,
    mrs_smooth,
    qmr_smooth,
    smooth_step,
)
from .solvers import (
    BreakdownInfo,
    ConvergenceRecord,
    SolverConfig,
    SolverOutcome,
    Status,
    solve_bicg,
    solve_bicg_shadow_at,
    solve_bicg_smoothed,
    solve_bicr,
    solve_cg,
    solve_cr,
    solve_extended_cg_mrs,
)

__version__ = "0.1.0"

__all__ = [
    "BreakdownError",
    "BreakdownInfo",
    "ConvergenceRecord",
    "DivergenceReport",
    "ExperimentConfig",
    "ExtendedSystem",
    "MatrixMarketSource",
    "PairedVector",
    "SOLVERS",
    "SmoothedHistory",
    "SmoothingState",
    "SolverConfig",
    "SolverOutcome",
    "SparseMatrix",
    "Status",
    "ToeplitzSource",
    "axpy",
    "build_matrix",
    "compare_histories",
    "csr_from_triplets",
    "dot",
    "emit_csv",
    "extend_system",
    "h_inner",
    "matvec",
    "matvec_transpose",
    "mrs_eta",
    "mrs_smooth",
    "norm2",
    "qmr_smooth",
    "quasi_inner",
    "read_matrix_market",
    "run_experiment",
    "smooth_step",
    "solve_bicg",
    "solve_bicg_shadow_at",
    "solve_bicg_smoothed",
    "solve_bicr",
    "solve_cg",
    "solve_cr",
    "solve_extended_cg_mrs",
    "toeplitz_banded",
    "write_matrix_market",
]
