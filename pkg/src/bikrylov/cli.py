"""Command-line experiment runner.

Two subcommands::

    bikrylov solve   --matrix toeplitz --n 200 --gamma 1.2 --solver bicr \
                     --tol 1e-12 --max-iter 2000 --out hist.csv
    bikrylov compare --matrix toeplitz --n 200 --gamma 1.5 \
                     --solvers bicr,bicg-at,bicg-smooth \
                     --gap-threshold 0.5 --out fig2.csv --plot fig2.png

``--matrix mm --path file.mtx`` reads a Matrix Market file instead of the
built-in Toeplitz generator.  Both commands write the per-iteration
relative-residual CSV and optionally render the same data as a figure
(``--plot``).  Exit status: 0 when every solver converged, 2 when any run
broke down, 3 when any run hit the iteration cap.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Mapping

import click

from .harness import (
    ExperimentConfig,
    MatrixMarketSource,
    ToeplitzSource,
    compare_histories,
    emit_csv,
    run_experiment,
    solver_ids,
)
from .solvers import SolverOutcome, Status


def _matrix_source(matrix: str, n: int, gamma: float, path: Path | None):
    if matrix == "toeplitz":
        return ToeplitzSource(n=n, gamma=gamma)
    if path is None:
        raise click.UsageError("--matrix mm requires --path FILE.mtx")
    return MatrixMarketSource(path=path)


def _exit_code(outcomes: Mapping[str, SolverOutcome]) -> int:
    statuses = [o.record.status for o in outcomes.values()]
    if any(s is Status.BREAKDOWN for s in statuses):
        return 2
    if any(s is Status.MAX_ITER for s in statuses):
        return 3
    return 0


def _write_outputs(outcomes, out: Path | None, plot: Path | None) -> None:
    if out is not None:
        with open(out, "w") as f:
            emit_csv(outcomes, f)
    else:
        emit_csv(outcomes, sys.stdout)
    if plot is not None:
        from .plots import plot_histories

        plot_histories(outcomes, plot)


def _summarize(outcomes: Mapping[str, SolverOutcome]) -> None:
    for solver_id, outcome in outcomes.items():
        rec = outcome.record
        line = (
            f"{solver_id}: {rec.status.value} after {rec.iterations} iterations, "
            f"final relres {rec.relres[-1]:.3e}"
        )
        if rec.breakdown is not None:
            line += f" ({rec.breakdown.kind} breakdown at {rec.breakdown.iteration})"
        click.echo(line, err=True)


_matrix_options = [
    click.option(
        "--matrix",
        type=click.Choice(["toeplitz", "mm"]),
        default="toeplitz",
        show_default=True,
        help="Matrix source: built-in Toeplitz generator or Matrix Market file.",
    ),
    click.option("--n", type=int, default=200, show_default=True,
                 help="Toeplitz dimension."),
    click.option("--gamma", type=float, default=1.2, show_default=True,
                 help="Toeplitz subdiagonal weight."),
    click.option("--path", type=click.Path(exists=True, path_type=Path),
                 default=None, help="Matrix Market file (with --matrix mm)."),
    click.option("--rhs-file", type=click.Path(exists=True, path_type=Path),
                 default=None,
                 help="Right-hand side as whitespace-separated text "
                      "[default: A @ ones]."),
    click.option("--tol", type=float, default=1e-12, show_default=True,
                 help="Relative residual stopping tolerance."),
    click.option("--max-iter", type=int, default=None,
                 help="Iteration cap [default: 10n]."),
    click.option("--out", type=click.Path(path_type=Path), default=None,
                 help="CSV output path [default: stdout]."),
    click.option("--plot", type=click.Path(path_type=Path), default=None,
                 help="Also render the histories as a figure (png/pdf/svg)."),
]


def _with_matrix_options(cmd):
    for opt in reversed(_matrix_options):
        cmd = opt(cmd)
    return cmd


@click.group()
@click.version_option(package_name="bikrylov")
def main():
    """Convergence experiments for the Bi-CG/Bi-CR solver family."""


@main.command()
@_with_matrix_options
@click.option(
    "--solver",
    type=click.Choice(solver_ids()),
    default="bicr",
    show_default=True,
    help="Solver to run.",
)
def solve(matrix, n, gamma, path, rhs_file, tol, max_iter, out, plot, solver):
    """Run one solver and emit its convergence history."""
    cfg = ExperimentConfig(
        matrix=_matrix_source(matrix, n, gamma, path),
        solvers=[solver],
        rhs_path=rhs_file,
        tolerance=tol,
        max_iterations=max_iter,
        output_path=out,
    )
    outcomes = run_experiment(cfg)
    _write_outputs(outcomes, out, plot)
    _summarize(outcomes)
    sys.exit(_exit_code(outcomes))


@main.command()
@_with_matrix_options
@click.option(
    "--solvers",
    default="bicr,bicg-at,bicg-smooth",
    show_default=True,
    help="Comma-separated solver ids to run and compare.",
)
@click.option(
    "--gap-threshold",
    type=float,
    default=0.5,
    show_default=True,
    help="Log10 residual gap (decades) beyond which histories count as divergent.",
)
def compare(matrix, n, gamma, path, rhs_file, tol, max_iter, out, plot,
            solvers, gap_threshold):
    """Run several solvers, emit combined CSV, report pairwise divergence."""
    ids = [s for s in solvers.split(",") if s.strip()]
    cfg = ExperimentConfig(
        matrix=_matrix_source(matrix, n, gamma, path),
        solvers=ids,
        rhs_path=rhs_file,
        tolerance=tol,
        max_iterations=max_iter,
        output_path=out,
    )
    outcomes = run_experiment(cfg)
    _write_outputs(outcomes, out, plot)
    _summarize(outcomes)

    ids = list(outcomes)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            report = compare_histories(
                outcomes[ids[i]].record, outcomes[ids[j]].record, gap_threshold
            )
            where = (
                "no divergence"
                if report.first_divergent_iteration is None
                else f"diverges at iteration {report.first_divergent_iteration}"
            )
            click.echo(
                f"{ids[i]} vs {ids[j]}: {where} "
                f"(max gap before: {report.max_relative_gap_before:.3f} decades)",
                err=True,
            )
    sys.exit(_exit_code(outcomes))
