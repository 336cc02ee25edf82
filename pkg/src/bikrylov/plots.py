"""Render convergence-history figures to image files.

The figures mirror the CSV output of :func:`bikrylov.harness.emit_csv`:
iteration count on the horizontal axis, relative residual 2-norm on a log10
vertical axis, one line per solver.  Rendering goes straight through the Agg
canvas so no global matplotlib backend state is touched.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from matplotlib.figure import Figure

from .solvers import SolverOutcome

__all__ = ["plot_histories"]

_LINESTYLES = ["-", "--", "-.", ":"]


def plot_histories(
    outcomes: Mapping[str, SolverOutcome],
    path: str | Path,
    title: str | None = None,
) -> None:
    """Plot the relative-residual histories of ``outcomes`` to ``path``.

    The file format follows the path suffix (png, pdf, svg, ...).
    """
    if not outcomes:
        raise ValueError("no outcomes to plot")
    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot(111)
    for i, (solver_id, outcome) in enumerate(outcomes.items()):
        relres = outcome.record.relres
        ax.semilogy(
            range(len(relres)),
            relres,
            _LINESTYLES[i % len(_LINESTYLES)],
            label=solver_id,
            linewidth=1.4,
        )
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual 2-norm")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
