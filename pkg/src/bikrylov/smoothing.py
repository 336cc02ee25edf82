"""Residual smoothing: the generic recursion plus MRS and QMR parameters.

Given a primary sequence of residuals ``r_k`` with approximations ``x_k``,
smoothing generates secondary sequences

    s_k = s_{k-1} + eta_k * (r_k - s_{k-1})
    y_k = y_{k-1} + eta_k * (x_k - y_{k-1})

with ``s_0 = r_0`` and ``y_0 = x_0``.  Two classical parameter choices are
provided:

* minimal residual smoothing (MRS): ``eta_k`` minimizes ``||s_k||_H``,
  equivalently enforces ``s_k`` H-orthogonal to ``r_k - s_{k-1}``.  Applied
  to a CG residual history with ``H = I`` this reproduces the CR residuals
  (Weiss 1996; Walker 1995).
* QMR smoothing: ``eta_k`` follows the tau/rho recursion of Zhou & Walker
  (1994), which maps Bi-CG residuals onto QMR residuals.  The recursion is
  computable for any residual history, but that QMR interpretation is
  specific to Bi-CG input.

These functions operate post hoc on a recorded history.  The solvers that
fuse smoothing into their iteration loop live in :mod:`bikrylov.solvers`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import BreakdownError, SparseMatrix, as_vector, dot
from .products import h_inner

__all__ = [
    "SmoothedHistory",
    "SmoothingState",
    "mrs_eta",
    "mrs_smooth",
    "qmr_smooth",
    "smooth_step",
]

#: Denominators below this magnitude are treated as an exact breakdown.
TINY = 1e-300


@dataclass(frozen=True)
class SmoothingState:
    """Current smoothed residual/approximation pair.

    ``tau_sq`` carries the running tau^2 scalar in ``qmr`` mode and is
    ``None`` in ``mrs`` mode.
    """

    s: np.ndarray
    y: np.ndarray
    tau_sq: float | None = None
    mode: str = "mrs"


@dataclass(frozen=True)
class SmoothedHistory:
    """Output of a post-hoc smoothing pass.

    ``pairs[k]`` is the smoothed ``(s_k, y_k)``; ``pairs[0]`` echoes the
    input's ``(r_0, x_0)``.  ``etas[k-1]`` is the parameter used at step
    ``k``.  ``tau_sq`` is populated by QMR smoothing only.
    """

    pairs: list[tuple[np.ndarray, np.ndarray]]
    etas: np.ndarray
    tau_sq: np.ndarray | None = None


def smooth_step(
    state: SmoothingState, r_k, x_k, eta_k: float
) -> SmoothingState:
    """Advance the smoothing recursion by one step with parameter ``eta_k``."""
    r_k = as_vector(r_k, state.s.shape[0])
    x_k = as_vector(x_k, state.y.shape[0])
    return SmoothingState(
        s=state.s + eta_k * (r_k - state.s),
        y=state.y + eta_k * (x_k - state.y),
        tau_sq=state.tau_sq,
        mode=state.mode,
    )


def mrs_eta(s_prev, r_k, H: SparseMatrix | None = None) -> float:
    """Minimal-residual-smoothing parameter.

    Returns ``-(s_prev, r_k - s_prev)_H / (r_k - s_prev, r_k - s_prev)_H``,
    the value that locally minimizes ``||s_k||_H`` and makes the new smoothed
    residual H-orthogonal to ``r_k - s_prev``.

    Raises
    ------
    BreakdownError
        If the denominator vanishes (``r_k == s_prev``).
    """
    s_prev = as_vector(s_prev)
    diff = as_vector(r_k, s_prev.shape[0]) - s_prev
    denom = h_inner(diff, diff, H)
    if abs(denom) < TINY:
        raise BreakdownError("eta")
    return -h_inner(s_prev, diff, H) / denom


def mrs_smooth(
    history: Sequence[tuple[np.ndarray, np.ndarray]],
    H: SparseMatrix | None = None,
) -> SmoothedHistory:
    """Apply MRS to a recorded ``(r_k, x_k)`` history.

    The first entry seeds ``s_0 = r_0`` and ``y_0 = x_0``.  The smoothed norm
    sequence ``||s_k||_H`` is non-increasing and bounded by ``||r_k||_H`` up
    to roundoff.

    Raises
    ------
    BreakdownError
        Propagated from :func:`mrs_eta` with the failing step index attached.
    """
    if not history:
        raise ValueError("history must be non-empty")
    r0, x0 = history[0]
    state = SmoothingState(as_vector(r0).copy(), as_vector(x0).copy(), mode="mrs")
    pairs = [(state.s, state.y)]
    etas = []
    for k, (r_k, x_k) in enumerate(history[1:], start=1):
        try:
            eta = mrs_eta(state.s, r_k, H)
        except BreakdownError as exc:
            raise BreakdownError("eta", k) from exc
        state = smooth_step(state, r_k, x_k, eta)
        pairs.append((state.s, state.y))
        etas.append(eta)
    return SmoothedHistory(pairs, np.asarray(etas))


def qmr_smooth(
    history: Sequence[tuple[np.ndarray, np.ndarray]],
) -> SmoothedHistory:
    """Apply QMR smoothing to a recorded ``(r_k, x_k)`` history.

    With ``rho_k^2 = dot(r_k, r_k)`` and ``tau_0^2 = rho_0^2``, each step
    uses ``1/tau_k^2 = 1/tau_{k-1}^2 + 1/rho_k^2`` and
    ``eta_k = tau_k^2 / rho_k^2``.  A vanishing ``rho_k`` means the primary
    iteration hit the exact solution: the step is taken with ``eta = 1`` and
    the smoothed sequence ends there, dropping any later entries.
    """
    if not history:
        raise ValueError("history must be non-empty")
    r0, x0 = history[0]
    rho_sq = dot(r0, r0)
    state = SmoothingState(
        as_vector(r0).copy(), as_vector(x0).copy(), tau_sq=rho_sq, mode="qmr"
    )
    pairs = [(state.s, state.y)]
    etas: list[float] = []
    tau_sqs = [rho_sq]
    if rho_sq < TINY:
        return SmoothedHistory(pairs, np.asarray(etas), np.asarray(tau_sqs))

    for r_k, x_k in history[1:]:
        rho_sq = dot(r_k, r_k)
        if rho_sq < TINY:
            state = smooth_step(state, r_k, x_k, 1.0)
            pairs.append((state.s, state.y))
            etas.append(1.0)
            tau_sqs.append(0.0)
            break
        tau_sq = 1.0 / (1.0 / state.tau_sq + 1.0 / rho_sq)
        eta = tau_sq / rho_sq
        state = SmoothingState(state.s, state.y, tau_sq=tau_sq, mode="qmr")
        state = smooth_step(state, r_k, x_k, eta)
        pairs.append((state.s, state.y))
        etas.append(eta)
        tau_sqs.append(tau_sq)
    return SmoothedHistory(pairs, np.asarray(etas), np.asarray(tau_sqs))
