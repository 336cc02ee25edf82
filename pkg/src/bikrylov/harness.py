"""Experiment harness: build a system, run solvers, compare their histories.

A single experiment runs a selection of solvers on the same matrix with the
same right-hand side, start vector and initial shadow residual, then
serializes the relative-residual histories as CSV and/or quantifies how far
two histories drift apart on the log10 scale.  Runs are deterministic:
repeating a configuration reproduces the output bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Callable, Mapping

import numpy as np

from .linalg import SparseMatrix, as_vector, matvec, read_matrix_market, toeplitz_banded
from .products import extend_system
from .solvers import (
    ConvergenceRecord,
    SolverConfig,
    SolverOutcome,
    solve_bicg,
    solve_bicg_shadow_at,
    solve_bicg_smoothed,
    solve_bicr,
    solve_cg,
    solve_cr,
    solve_extended_cg_mrs,
)

__all__ = [
    "SOLVERS",
    "DivergenceReport",
    "ExperimentConfig",
    "MatrixMarketSource",
    "ToeplitzSource",
    "build_matrix",
    "compare_histories",
    "emit_csv",
    "run_experiment",
    "solver_ids",
]


@dataclass(frozen=True)
class ToeplitzSource:
    """Built-in banded Toeplitz test problem of size ``n`` with parameter ``gamma``."""

    n: int
    gamma: float


@dataclass(frozen=True)
class MatrixMarketSource:
    """Matrix loaded from a Matrix Market coordinate file."""

    path: Path


MatrixSource = ToeplitzSource | MatrixMarketSource


def _run_ext_mrs(A: SparseMatrix, b, cfg: SolverConfig) -> SolverOutcome:
    # package the paired system with x0 and the configured shadow residual
    ext = extend_system(A, b, btilde=cfg.shadow_start, x0=cfg.x0)
    return solve_extended_cg_mrs(ext, cfg)


#: Canonical solver identifiers, as used on the command line and in CSV headers.
SOLVERS: dict[str, Callable[..., SolverOutcome]] = {
    "cg": solve_cg,
    "cr": solve_cr,
    "bicg": solve_bicg,
    "bicr": solve_bicr,
    "bicg-at": solve_bicg_shadow_at,
    "bicg-smooth": solve_bicg_smoothed,
    "ext-mrs": _run_ext_mrs,
}

_ALIASES = {
    "bicg_at": "bicg-at",
    "bicg_shadow_at": "bicg-at",
    "bicg_smooth": "bicg-smooth",
    "bicg_smoothed": "bicg-smooth",
    "ext_mrs": "ext-mrs",
    "ext_cg_mrs": "ext-mrs",
    "extended_cg_mrs": "ext-mrs",
}


def solver_ids() -> list[str]:
    return list(SOLVERS)


def _canonical(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in SOLVERS:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")
    return key


@dataclass
class ExperimentConfig:
    """One experiment: a matrix source, a solver selection and shared knobs.

    The right-hand side defaults to ``A @ ones`` (so the exact solution is
    the all-ones vector); ``rhs_path`` selects a whitespace-separated text
    file of values instead.  All solvers share ``x0 = 0`` and the initial
    shadow residual ``rt0 = r0``.  ``seed`` is reserved for future randomized
    fixtures and is unused by the deterministic built-ins.
    """

    matrix: MatrixSource
    solvers: list[str]
    rhs_path: Path | None = None
    tolerance: float = 1e-12
    max_iterations: int | None = None
    seed: int = 0
    output_path: Path | None = None

    def __post_init__(self):
        if not self.solvers:
            raise ValueError("at least one solver must be selected")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        self.solvers = [_canonical(s) for s in self.solvers]


def build_matrix(source: MatrixSource) -> SparseMatrix:
    """Materialize an experiment's matrix from its source description."""
    if isinstance(source, ToeplitzSource):
        return toeplitz_banded(source.n, source.gamma)
    return read_matrix_market(source.path)


def _right_hand_side(cfg: ExperimentConfig, A: SparseMatrix) -> np.ndarray:
    if cfg.rhs_path is None:
        return matvec(A, np.ones(A.n_cols))
    return as_vector(np.loadtxt(cfg.rhs_path).ravel(), A.n_rows)


def run_experiment(cfg: ExperimentConfig) -> dict[str, SolverOutcome]:
    """Run every selected solver on the configured system.

    Each solver sees identical inputs; a breakdown in one solver is recorded
    in its outcome and does not abort the others.  Outcomes are keyed by
    canonical solver id in selection order.
    """
    A = build_matrix(cfg.matrix)
    b = _right_hand_side(cfg, A)
    outcomes: dict[str, SolverOutcome] = {}
    for solver_id in cfg.solvers:
        solver_cfg = SolverConfig(
            tolerance=cfg.tolerance, max_iterations=cfg.max_iterations
        )
        outcomes[solver_id] = SOLVERS[solver_id](A, b, solver_cfg)
    return outcomes


def emit_csv(outcomes: Mapping[str, SolverOutcome], stream: IO[str]) -> None:
    """Serialize relative-residual histories as CSV.

    Header is ``iter,<solver_id>_relres,...``; one row per iteration index.
    Shorter histories are padded with empty fields.  Values carry 17
    significant digits, so parsing them back reproduces the float64 data
    exactly.
    """
    if not outcomes:
        raise ValueError("no outcomes to serialize")
    ids = list(outcomes)
    histories = [outcomes[i].record.relres for i in ids]
    stream.write(",".join(["iter"] + [f"{i}_relres" for i in ids]) + "\n")
    for k in range(max(len(h) for h in histories)):
        cells = [str(k)]
        for h in histories:
            cells.append(f"{h[k]:.17g}" if k < len(h) else "")
        stream.write(",".join(cells) + "\n")


@dataclass
class DivergenceReport:
    """Log10-scale gap between two convergence histories.

    ``per_iteration_gaps[k]`` is ``|log10(relres_a[k]) - log10(relres_b[k])|``
    over the common prefix of the two histories (exact zeros clamped to
    1e-300 first).  ``first_divergent_iteration`` is the first index whose
    gap exceeds the threshold, or ``None``; ``max_relative_gap_before`` is
    the largest gap seen before that point (over the whole prefix when the
    histories never diverge).
    """

    first_divergent_iteration: int | None
    max_relative_gap_before: float
    per_iteration_gaps: np.ndarray


def compare_histories(
    a: ConvergenceRecord, b: ConvergenceRecord, gap_threshold: float
) -> DivergenceReport:
    """Quantify where two residual histories stop coinciding.

    Symmetric in its two history arguments.
    """
    if len(a.relres) == 0 or len(b.relres) == 0:
        raise ValueError("histories must be non-empty")
    m = min(len(a.relres), len(b.relres))
    ra = np.maximum(np.asarray(a.relres[:m], dtype=np.float64), 1e-300)
    rb = np.maximum(np.asarray(b.relres[:m], dtype=np.float64), 1e-300)
    gaps = np.abs(np.log10(ra) - np.log10(rb))
    over = np.flatnonzero(gaps > gap_threshold)
    if over.size:
        first = int(over[0])
        before = float(gaps[:first].max()) if first > 0 else 0.0
        return DivergenceReport(first, before, gaps)
    return DivergenceReport(None, float(gaps.max()) if m else 0.0, gaps)
