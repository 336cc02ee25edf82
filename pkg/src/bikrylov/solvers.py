"""Krylov solvers: CG, CR, Bi-CG, Bi-CR, and smoothed Bi-CG variants.

The nonsymmetric solvers come in four flavors that are mathematically
equivalent ways of producing Bi-CR residuals:

* :func:`solve_bicr` -- the original Bi-CR recursion (Sogabe, Sugihara &
  Zhang 2009).
* :func:`solve_bicg_shadow_at` -- plain Bi-CG started from the transposed
  shadow residual ``A.T @ rt0``, which reproduces the Bi-CR coefficients.
* :func:`solve_bicg_smoothed` -- Bi-CG with a minimal-residual-smoothing-like
  update fused into the loop; the smoothing parameter is chosen in the block
  quasi-inner product of :mod:`bikrylov.products`, and the smoothed residuals
  coincide with the Bi-CR ones.
* :func:`solve_extended_cg_mrs` -- the unreshaped form of the previous
  solver: CG plus MRS run verbatim on the paired 2n system, with the
  quasi-inner product in place of the inner product.

In floating point the four only "virtually coincide"; comparing their
convergence histories is the purpose of :mod:`bikrylov.harness`.

All solvers report the recursively updated residual norm (the smoothed norm
``||s_k||`` for the smoothed variants) relative to ``||b||``, stop when it
drops below ``tolerance``, and flag a breakdown instead of raising when a
coefficient denominator vanishes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .linalg import SparseMatrix, as_vector, dot, matvec, matvec_transpose, norm2
from .products import ExtendedSystem, PairedVector, quasi_inner

__all__ = [
    "BreakdownInfo",
    "ConvergenceRecord",
    "SolverConfig",
    "SolverOutcome",
    "Status",
    "solve_bicg",
    "solve_bicg_shadow_at",
    "solve_bicg_smoothed",
    "solve_bicr",
    "solve_cg",
    "solve_cr",
    "solve_extended_cg_mrs",
]

#: Coefficient denominators below this magnitude count as exact breakdown.
TINY = 1e-300

#: Per-iteration capture hook: receives the iteration index and copies of the
#: solver's named state vectors ("x", "r", plus "rt" for the bi-Lanczos
#: solvers and "s", "st", "y" for the smoothed ones).
CaptureHook = Callable[[int, Mapping[str, np.ndarray]], None]


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter_reached"
    BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class BreakdownInfo:
    """Which denominator broke down, and at which iteration."""

    kind: str
    iteration: int


@dataclass
class SolverConfig:
    """Shared solver knobs.

    Parameters
    ----------
    tolerance : float
        Relative residual 2-norm threshold; iteration stops when the
        recursively updated residual satisfies ``||r_k|| / ||b|| < tolerance``.
    max_iterations : int, optional
        Iteration cap; defaults to ``10 * n``.
    x0 : array, optional
        Initial guess; defaults to the zero vector, in which case ``r0 = b``
        exactly (no product is taken).
    shadow_start : array, optional
        Initial shadow residual ``rt0`` for the bi-Lanczos solvers; defaults
        to a copy of ``r0``.  Must satisfy ``dot(rt0, r0) != 0``.
    record_extras : bool
        Record the per-iteration alpha/beta/eta coefficients and the true
        residual norms ``||b - A x_k|| / ||b||`` (one extra product per
        iteration) in the :class:`ConvergenceRecord`.
    capture : callable, optional
        Per-iteration hook receiving copies of the solver state vectors; used
        by cross-solver substitution tests.  Off by default so memory stays
        O(n).
    """

    tolerance: float = 1e-12
    max_iterations: int | None = None
    x0: np.ndarray | None = None
    shadow_start: np.ndarray | None = None
    record_extras: bool = False
    capture: CaptureHook | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class ConvergenceRecord:
    """Per-iteration scalars and termination status of one solver run.

    ``relres[k]`` is the relative norm of the recursively updated residual
    after ``k`` iterations (``relres[0]`` describes the start vector, and is
    1.0 whenever ``x0`` makes ``r0 = b``).  The coefficient arrays and
    ``true_relres`` are populated only when ``record_extras`` was set;
    ``etas`` stays empty for the non-smoothed solvers.
    """

    relres: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    etas: np.ndarray
    status: Status
    breakdown: BreakdownInfo | None
    iterations: int
    true_relres: np.ndarray | None = None


@dataclass
class SolverOutcome:
    solution: np.ndarray
    record: ConvergenceRecord

    @property
    def converged(self) -> bool:
        return self.record.status is Status.CONVERGED


class _BreakdownSignal(Exception):
    def __init__(self, kind: str, iteration: int):
        self.kind = kind
        self.iteration = iteration


def _coeff(num: float, den: float, kind: str, k: int) -> float:
    """Divide, flagging breakdown on a vanishing denominator or non-finite result."""
    if abs(den) < TINY:
        raise _BreakdownSignal(kind, k)
    c = num / den
    if not np.isfinite(c):
        raise _BreakdownSignal(kind, k)
    return c


def _prepare(A: SparseMatrix, b, cfg: SolverConfig | None):
    if cfg is None:
        cfg = SolverConfig()
    if A.n_rows != A.n_cols:
        raise ValueError("iterative solvers require a square matrix")
    n = A.n_rows
    b = as_vector(b, n)
    if cfg.x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = as_vector(cfg.x0, n).copy()
        r = b - matvec(A, x)
    bnorm = norm2(b)
    scale = bnorm if bnorm > 0 else 1.0
    maxit = cfg.max_iterations if cfg.max_iterations is not None else 10 * n
    return cfg, b, x, r, scale, maxit


def _shadow_start(cfg: SolverConfig, r: np.ndarray) -> np.ndarray:
    if cfg.shadow_start is None:
        return r.copy()
    return as_vector(cfg.shadow_start, r.shape[0]).copy()


def _emit(cfg: SolverConfig, k: int, **vectors: np.ndarray) -> None:
    if cfg.capture is not None:
        cfg.capture(k, {name: v.copy() for name, v in vectors.items()})


class _Log:
    """Accumulates the per-iteration record of one run."""

    def __init__(self, cfg: SolverConfig, A: SparseMatrix | None, b, scale: float):
        self.cfg = cfg
        self.relres: list[float] = []
        self.alphas: list[float] = []
        self.betas: list[float] = []
        self.etas: list[float] = []
        self.true_relres: list[float] = []
        if cfg.record_extras and A is not None:
            self._true = lambda x: norm2(b - matvec(A, x)) / scale
        else:
            self._true = None

    def residual(self, value: float, x: np.ndarray) -> None:
        self.relres.append(value)
        if self._true is not None:
            self.true_relres.append(self._true(x))

    def outcome(
        self,
        solution: np.ndarray,
        status: Status,
        breakdown: BreakdownInfo | None = None,
    ) -> SolverOutcome:
        extras = self.cfg.record_extras
        record = ConvergenceRecord(
            relres=np.asarray(self.relres),
            alphas=np.asarray(self.alphas if extras else []),
            betas=np.asarray(self.betas if extras else []),
            etas=np.asarray(self.etas if extras else []),
            status=status,
            breakdown=breakdown,
            iterations=len(self.relres) - 1,
            true_relres=np.asarray(self.true_relres) if extras else None,
        )
        return SolverOutcome(solution=solution, record=record)


def solve_cg(A: SparseMatrix, b, cfg: SolverConfig | None = None) -> SolverOutcome:
    """Conjugate gradients (Hestenes & Stiefel) for symmetric ``A``.

    Symmetry is caller-asserted and not verified.  In exact arithmetic the
    residuals are mutually orthogonal.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    log = _Log(cfg, A, b, scale)
    p = r.copy()
    rho = dot(r, r)
    log.residual(norm2(r) / scale, x)
    _emit(cfg, 0, x=x, r=r)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(x, Status.CONVERGED)
    try:
        for k in range(maxit):
            Ap = matvec(A, p)
            alpha = _coeff(rho, dot(p, Ap), "pivot", k)
            x += alpha * p
            r -= alpha * Ap
            log.alphas.append(alpha)
            log.residual(norm2(r) / scale, x)
            _emit(cfg, k + 1, x=x, r=r)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(x, Status.CONVERGED)
            rho_next = dot(r, r)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            p = r + beta * p
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            x, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(x, Status.MAX_ITER)


def solve_cr(A: SparseMatrix, b, cfg: SolverConfig | None = None) -> SolverOutcome:
    """Conjugate residuals for symmetric ``A`` (caller-asserted).

    Minimizes ``||r_k||`` over the Krylov space per step, so the residual
    norm history is non-increasing in exact arithmetic.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    log = _Log(cfg, A, b, scale)
    p = r.copy()
    q = matvec(A, p)
    Ar = q  # p0 = r0, so this is also A @ r0
    rho = dot(r, Ar)
    log.residual(norm2(r) / scale, x)
    _emit(cfg, 0, x=x, r=r)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(x, Status.CONVERGED)
    try:
        for k in range(maxit):
            alpha = _coeff(rho, dot(q, q), "pivot", k)
            x += alpha * p
            r -= alpha * q
            log.alphas.append(alpha)
            log.residual(norm2(r) / scale, x)
            _emit(cfg, k + 1, x=x, r=r)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(x, Status.CONVERGED)
            Ar = matvec(A, r)
            rho_next = dot(r, Ar)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            p = r + beta * p
            q = Ar + beta * q
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            x, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(x, Status.MAX_ITER)


def _bicg_iterate(A, b, cfg, x, r, rt, scale, maxit) -> SolverOutcome:
    log = _Log(cfg, A, b, scale)
    p, pt = r.copy(), rt.copy()
    rho = dot(rt, r)
    log.residual(norm2(r) / scale, x)
    _emit(cfg, 0, x=x, r=r, rt=rt)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(x, Status.CONVERGED)
    try:
        for k in range(maxit):
            if abs(rho) < TINY:
                raise _BreakdownSignal("lanczos", k)
            Ap = matvec(A, p)
            alpha = _coeff(rho, dot(pt, Ap), "pivot", k)
            x += alpha * p
            r -= alpha * Ap
            rt -= alpha * matvec_transpose(A, pt)
            log.alphas.append(alpha)
            log.residual(norm2(r) / scale, x)
            _emit(cfg, k + 1, x=x, r=r, rt=rt)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(x, Status.CONVERGED)
            rho_next = dot(rt, r)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            p = r + beta * p
            pt = rt + beta * pt
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            x, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(x, Status.MAX_ITER)


def solve_bicg(A: SparseMatrix, b, cfg: SolverConfig | None = None) -> SolverOutcome:
    """Bi-conjugate gradients (Fletcher) for nonsymmetric ``A``.

    Runs coupled primal/shadow two-term recursions driven by ``A`` and
    ``A.T``; in exact arithmetic the residuals are bi-orthogonal to the
    shadow residuals.  Requires ``dot(rt0, r0) != 0``.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    rt = _shadow_start(cfg, r)
    return _bicg_iterate(A, b, cfg, x, r, rt, scale, maxit)


def solve_bicg_shadow_at(
    A: SparseMatrix, b, cfg: SolverConfig | None = None
) -> SolverOutcome:
    """Bi-CG restarted from the transposed shadow residual ``A.T @ rt0``.

    Identical to :func:`solve_bicg` except that the initial shadow residual
    is overwritten with ``A.T @ rt0`` before the loop; the residual and
    direction polynomials then reproduce the Bi-CR coefficients, so this run
    is mathematically equivalent to :func:`solve_bicr` with shadow ``rt0``.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    rt = matvec_transpose(A, _shadow_start(cfg, r))
    return _bicg_iterate(A, b, cfg, x, r, rt, scale, maxit)


def solve_bicr(A: SparseMatrix, b, cfg: SolverConfig | None = None) -> SolverOutcome:
    """Bi-conjugate residuals for nonsymmetric ``A``.

    The direction images ``q_k = A @ p_k`` are maintained by recursion; the
    coefficients orthogonalize the shadow residuals against ``A``-multiplied
    residuals, giving ``dot(rt_i, A @ r_j) = 0`` for ``i != j`` in exact
    arithmetic.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    rt = _shadow_start(cfg, r)
    log = _Log(cfg, A, b, scale)
    p, pt = r.copy(), rt.copy()
    q = matvec(A, p)
    Ar = q  # p0 = r0, so this is also A @ r0
    rho = dot(rt, Ar)
    log.residual(norm2(r) / scale, x)
    _emit(cfg, 0, x=x, r=r, rt=rt)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(x, Status.CONVERGED)
    try:
        for k in range(maxit):
            if abs(rho) < TINY:
                raise _BreakdownSignal("lanczos", k)
            Atpt = matvec_transpose(A, pt)
            alpha = _coeff(rho, dot(Atpt, q), "pivot", k)
            x += alpha * p
            r -= alpha * q
            rt -= alpha * Atpt
            log.alphas.append(alpha)
            log.residual(norm2(r) / scale, x)
            _emit(cfg, k + 1, x=x, r=r, rt=rt)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(x, Status.CONVERGED)
            Ar = matvec(A, r)
            rho_next = dot(rt, Ar)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            p = r + beta * p
            pt = rt + beta * pt
            q = Ar + beta * q
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            x, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(x, Status.MAX_ITER)


def solve_bicg_smoothed(
    A: SparseMatrix, b, cfg: SolverConfig | None = None
) -> SolverOutcome:
    """Bi-CG with an in-loop residual-smoothing-like update.

    On top of the plain Bi-CG recursions, each iteration forms
    ``u = r - s`` / ``ut = rt - st`` and the parameter

        eta = -(dot(st, u) + dot(s, ut)) / (2 * dot(ut, u)),

    which is minimal residual smoothing written in the block quasi-inner
    product, then advances the smoothed residual/approximation pair
    ``(s, y)`` and the shadow ``st``.  The smoothed residuals reproduce the
    Bi-CR residuals, so the convergence history coincides with
    :func:`solve_bicr` up to the effects of rounding.

    The stopping test and the reported history use ``||s_k|| / ||b||``, and
    the returned solution is the smoothed approximation ``y_k``.  ``etas`` is
    populated in the record when ``record_extras`` is set.
    """
    cfg, b, x, r, scale, maxit = _prepare(A, b, cfg)
    rt = _shadow_start(cfg, r)
    log = _Log(cfg, A, b, scale)
    p, pt = r.copy(), rt.copy()
    y, s, st = x.copy(), r.copy(), rt.copy()
    rho = dot(rt, r)
    log.residual(norm2(s) / scale, y)
    _emit(cfg, 0, x=x, r=r, rt=rt, s=s, st=st, y=y)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(y, Status.CONVERGED)
    try:
        for k in range(maxit):
            if abs(rho) < TINY:
                raise _BreakdownSignal("lanczos", k)
            Ap = matvec(A, p)
            alpha = _coeff(rho, dot(pt, Ap), "pivot", k)
            x += alpha * p
            r -= alpha * Ap
            rt -= alpha * matvec_transpose(A, pt)
            u = r - s
            ut = rt - st
            eta = _coeff(-(dot(st, u) + dot(s, ut)), 2.0 * dot(ut, u), "eta", k)
            y += eta * (x - y)
            s = s + eta * u
            st = st + eta * ut
            log.alphas.append(alpha)
            log.etas.append(eta)
            log.residual(norm2(s) / scale, y)
            _emit(cfg, k + 1, x=x, r=r, rt=rt, s=s, st=st, y=y)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(y, Status.CONVERGED)
            rho_next = dot(rt, r)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            p = r + beta * p
            pt = rt + beta * pt
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            y, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(y, Status.MAX_ITER)


def solve_extended_cg_mrs(
    ext: ExtendedSystem, cfg: SolverConfig | None = None
) -> SolverOutcome:
    """CG with minimal residual smoothing on the paired 2n system.

    Runs the CG recursion literally over :class:`PairedVector` arithmetic
    with :func:`~bikrylov.products.quasi_inner` in place of the inner
    product, plus the MRS update for the smoothed pair ``(s_hat, y_hat)``.
    Reshaping those block recursions componentwise yields exactly
    :func:`solve_bicg_smoothed`, so this solver serves as its oracle: the
    two produce the same eta sequence and smoothed norms up to roundoff.

    The start vectors come from ``ext`` (``cfg.x0``/``cfg.shadow_start`` are
    ignored); the reported history is ``||s_k|| / ||b||`` over the primal
    blocks, and the returned solution is the primal block of ``y_hat``.
    Requires ``quasi_inner(r_hat0, r_hat0) != 0``.
    """
    if cfg is None:
        cfg = SolverConfig()
    n = ext.n
    maxit = cfg.max_iterations if cfg.max_iterations is not None else 10 * n
    b = ext.rhs.primal
    bnorm = norm2(b)
    scale = bnorm if bnorm > 0 else 1.0
    log = _Log(cfg, ext.operator, b, scale)

    xh = ext.start.copy()
    rh = ext.initial_residual()
    ph = rh.copy()
    yh = xh.copy()
    sh = rh.copy()
    rho = quasi_inner(rh, rh)
    log.residual(norm2(sh.primal) / scale, yh.primal)
    _emit(cfg, 0, x=xh.primal, xt=xh.shadow, r=rh.primal, rt=rh.shadow,
          s=sh.primal, st=sh.shadow, y=yh.primal, yt=yh.shadow)
    if log.relres[0] < cfg.tolerance:
        return log.outcome(yh.primal, Status.CONVERGED)
    try:
        for k in range(maxit):
            if abs(rho) < TINY:
                raise _BreakdownSignal("lanczos", k)
            Aph = ext.apply(ph)
            alpha = _coeff(rho, quasi_inner(ph, Aph), "pivot", k)
            xh = xh + alpha * ph
            rh = rh - alpha * Aph
            diff = rh - sh
            eta = _coeff(
                -quasi_inner(sh, diff), quasi_inner(diff, diff), "eta", k
            )
            yh = yh + eta * (xh - yh)
            sh = sh + eta * diff
            log.alphas.append(alpha)
            log.etas.append(eta)
            log.residual(norm2(sh.primal) / scale, yh.primal)
            _emit(cfg, k + 1, x=xh.primal, xt=xh.shadow, r=rh.primal,
                  rt=rh.shadow, s=sh.primal, st=sh.shadow, y=yh.primal,
                  yt=yh.shadow)
            if log.relres[-1] < cfg.tolerance:
                return log.outcome(yh.primal, Status.CONVERGED)
            rho_next = quasi_inner(rh, rh)
            beta = _coeff(rho_next, rho, "lanczos", k)
            log.betas.append(beta)
            ph = rh + beta * ph
            rho = rho_next
    except _BreakdownSignal as sig:
        return log.outcome(
            yh.primal, Status.BREAKDOWN, BreakdownInfo(sig.kind, sig.iteration)
        )
    return log.outcome(yh.primal, Status.MAX_ITER)
