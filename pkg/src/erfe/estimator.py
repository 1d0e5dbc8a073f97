"""Iterative within-transformation estimators for panel expectile regression.

Each round recomputes check weights from the current transformed
residuals and eliminates the subject effects with them: the single-point
fit rebuilds the weighted within transform and takes one weighted least
squares step on the freshly transformed data, the joint fit solves the
stacked weighted normal equations with the common effect concentrated
out.  The weights depend only on residual signs, so once the sign
pattern stabilizes the step lands exactly on the fixed point and the
loop stops; the converged point satisfies the first-order conditions of
the asymmetric least squares objective in both the slopes and the
subject effects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergenceError,
    NonincreasingTausError,
    SingularGramError,
    WeightDimensionMismatchError,
)
from .expectiles import IrlsConfig, expectile_regression
from .linalg import annihilated_columns, spd_solve
from .panel import PanelData, asymmetric_loss, check_weight, validate_tau
from .within import (
    PooledSubjectWeights,
    SubjectWeights,
    apply_pooled_within,
    apply_within,
    pooled_subject_weights,
    subject_weights,
)

__all__ = [
    "FitResult",
    "MultiFitResult",
    "fit_erfe_multi",
    "fit_erfe_single",
    "recover_fixed_effects",
    "within_ols",
]


@dataclass(frozen=True)
class FitResult:
    """Converged single-tau fit.

    ``residuals_star`` are the residuals on the transformed scale;
    ``objective_value`` is the asymmetric least squares objective at the
    fitted slopes and recovered subject effects.
    """

    tau: float
    beta: np.ndarray
    alpha: np.ndarray
    residuals_star: np.ndarray
    iterations: int
    converged: bool
    objective_value: float


@dataclass(frozen=True)
class MultiFitResult:
    """Joint fit over a sequence of asymmetric points.

    ``betas`` stacks one coefficient vector per asymmetric point (q x p);
    ``residuals_star`` the matching transformed-scale residual blocks
    (q x N), all sharing the pooled within transform.
    """

    taus: tuple[float, ...]
    v: np.ndarray
    betas: np.ndarray
    residuals_star: np.ndarray
    iterations: int
    converged: bool


def _uniform_weights(panel: PanelData) -> SubjectWeights:
    return subject_weights(np.zeros(panel.n_obs), 0.5, panel)


def _column_scales(panel: PanelData) -> np.ndarray:
    return np.linalg.norm(panel.X, axis=0)


def _check_annihilated(x_star, panel: PanelData, iteration=None):
    bad = annihilated_columns(x_star, _column_scales(panel))
    if bad.size:
        names = [panel.column_names[j] for j in bad]
        raise SingularGramError(
            f"regressor(s) {names!r} are constant within subjects and are "
            "annihilated by the within transform",
            columns=names, iteration=iteration,
        )


def _grad_scale(panel: PanelData) -> float:
    return 1.0 + float(np.max(np.abs(panel.y)))


def within_ols(panel: PanelData) -> FitResult:
    """Within estimator at tau = 0.5: demean per subject, then least squares.

    Single pass, no iteration.  Raises SingularGramError when the demeaned
    design loses rank (e.g. a regressor constant within every subject).
    """
    w = _uniform_weights(panel)
    y_star = apply_within(panel.y, w, panel)
    x_star = apply_within(panel.X, w, panel)
    _check_annihilated(x_star, panel)
    beta = spd_solve(x_star.T @ x_star, x_star.T @ y_star,
                     columns=panel.column_names)
    residuals_star = y_star - x_star @ beta
    alpha = recover_fixed_effects(panel, beta, 0.5, w)
    objective = float(np.sum(asymmetric_loss(
        panel.y - panel.X @ beta - alpha[panel.codes], 0.5)))
    return FitResult(tau=0.5, beta=beta, alpha=alpha,
                     residuals_star=residuals_star, iterations=0,
                     converged=True, objective_value=objective)


def recover_fixed_effects(panel: PanelData, beta, tau, weights: SubjectWeights):
    """Subject effects implied by fitted slopes and final check weights.

    Each effect is the weighted subject average of y - X beta, with the
    normalized check weights of the converged fit; at tau = 0.5 this is
    the plain subject mean of the residuals.
    """
    validate_tau(tau)
    raw = panel.y - panel.X @ np.asarray(beta, dtype=float)
    return np.bincount(panel.codes, weights=weights.normalized * raw,
                       minlength=panel.n_subjects)


def fit_erfe_single(panel: PanelData, tau, config: IrlsConfig | None = None) -> FitResult:
    """Single-tau panel expectile fit by the iterative within transform.

    Starts from the cross-sectional expectile regression on within-demeaned
    data, then loops: check weights from the current transformed residuals,
    rebuild the weighted transform of (y, X), one weighted least squares
    step, refresh the residuals.  Stops when the sup-norm step is within
    tolerance and the weighted score is negligible.
    """
    config = config or IrlsConfig()
    tau = validate_tau(tau)

    w0 = _uniform_weights(panel)
    y0 = apply_within(panel.y, w0, panel)
    x0 = apply_within(panel.X, w0, panel)
    _check_annihilated(x0, panel)
    try:
        beta = expectile_regression(x0, y0, tau, config).beta
    except NoConvergenceError as exc:
        beta = exc.result.beta
    residuals_star = y0 - x0 @ beta

    grad_tol = config.tol_grad * _grad_scale(panel)
    iterations = 0
    converged = False
    for r in range(1, int(config.max_iter) + 1):
        psi = check_weight(residuals_star, tau)
        sw = subject_weights(residuals_star, tau, panel)
        y_star = apply_within(panel.y, sw, panel)
        x_star = apply_within(panel.X, sw, panel)
        _check_annihilated(x_star, panel, iteration=r)
        wx = x_star * psi[:, None]
        step = spd_solve(x_star.T @ wx, wx.T @ (y_star - x_star @ beta),
                         columns=panel.column_names, iteration=r)
        delta = float(np.max(np.abs(step)))
        beta = beta + step
        residuals_star = y_star - x_star @ beta
        iterations = r
        if delta <= config.tol:
            score = x_star.T @ (check_weight(residuals_star, tau) * residuals_star)
            if float(np.max(np.abs(score))) <= grad_tol:
                converged = True
                break

    sw_final = subject_weights(residuals_star, tau, panel)
    alpha = recover_fixed_effects(panel, beta, tau, sw_final)
    objective = float(np.sum(asymmetric_loss(
        panel.y - panel.X @ beta - alpha[panel.codes], tau)))
    result = FitResult(tau=tau, beta=beta, alpha=alpha,
                       residuals_star=residuals_star, iterations=iterations,
                       converged=converged, objective_value=objective)
    if not converged:
        raise NoConvergenceError(
            f"fit at tau={tau} did not converge in {config.max_iter} iterations",
            result=result,
        )
    return result


def _validate_taus(taus) -> tuple[float, ...]:
    taus = tuple(validate_tau(t) for t in np.atleast_1d(taus))
    if not taus:
        raise ValueError("need at least one asymmetric point")
    for a, b in zip(taus, taus[1:]):
        if b < a:
            raise NonincreasingTausError(
                f"asymmetric points must be non-decreasing, got {taus}"
            )
    return taus


def pooled_transform(panel: PanelData, pw: PooledSubjectWeights):
    """Common transformed (y, X) under the pooled projection.

    The pooled transform subtracts the same subject average from every tau
    block; applied to data replicated across blocks it therefore yields one
    shared transformed copy, which is what the joint fit regresses on.
    """
    q = len(pw.taus)
    y_rep = np.broadcast_to(panel.y, (q, panel.n_obs))
    x_rep = np.broadcast_to(panel.X, (q,) + panel.X.shape)
    y_star = apply_pooled_within(y_rep, pw, panel)[0]
    x_star = apply_pooled_within(x_rep, pw, panel)[0]
    return y_star, x_star


def fit_erfe_multi(panel: PanelData, taus, v=None,
                   config: IrlsConfig | None = None) -> MultiFitResult:
    """Joint fit over a sequence of asymmetric points.

    The blocks share one subject effect, so each round solves the stacked
    weighted least squares problem with that effect concentrated out: the
    pooled per-subject normalizers eliminate the effect exactly (a Schur
    complement of the block-diagonal slope system), every block's slopes
    update jointly, and the residual blocks are refreshed net of the
    common effect.  For a single asymmetric point the concentrated system
    reduces algebraically to the single-tau transformed system.  ``v``
    holds the strictly positive influence weights (uniform by default).
    Convergence requires every block's sup-norm step to be within
    tolerance and the stacked first-order conditions (slope scores per
    block plus the pooled subject-effect score) to be negligible.
    """
    config = config or IrlsConfig()
    taus = _validate_taus(taus)
    q = len(taus)
    if v is None:
        v = np.ones(q)
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != q:
        raise WeightDimensionMismatchError(
            f"{v.shape[0]} influence weights for {q} asymmetric points"
        )
    if np.any(v <= 0.0):
        raise ValueError("influence weights must be strictly positive")

    w0 = _uniform_weights(panel)
    y0 = apply_within(panel.y, w0, panel)
    x0 = apply_within(panel.X, w0, panel)
    _check_annihilated(x0, panel)
    p = panel.n_regressors
    n = panel.n_subjects
    codes = panel.codes
    y = panel.y
    X = panel.X
    betas = np.empty((q, p))
    for k in range(q):
        try:
            betas[k] = expectile_regression(x0, y0, taus[k], config).beta
        except NoConvergenceError as exc:
            betas[k] = exc.result.beta
    resid = np.vstack([y0 - x0 @ betas[k] for k in range(q)])

    grad_tol = config.tol_grad * _grad_scale(panel)
    iterations = 0
    converged = False
    for r in range(1, int(config.max_iter) + 1):
        pw = pooled_subject_weights(resid, taus, v, panel)
        denom = pw.pooled_normalizer

        # Per-block pieces of the stacked normal equations: slope Grams,
        # per-subject weighted design sums (the effect coupling), and the
        # pooled per-subject weighted response sums.
        grams = np.empty((q, p, p))
        couplings = np.empty((q, n, p))
        xty = np.empty((q, p))
        pooled_y = np.zeros(n)
        for k in range(q):
            psi = pw.psi_blocks[k]
            wx = X * psi[:, None]
            grams[k] = X.T @ wx
            xty[k] = wx.T @ y
            for j in range(p):
                couplings[k][:, j] = np.bincount(codes, weights=wx[:, j],
                                                 minlength=n)
            pooled_y += v[k] * np.bincount(codes, weights=psi * y, minlength=n)

        system = np.empty((q * p, q * p))
        rhs = np.empty(q * p)
        ybar = pooled_y / denom
        for k in range(q):
            rows = slice(k * p, (k + 1) * p)
            rhs[rows] = v[k] * (xty[k] - couplings[k].T @ ybar)
            for l in range(q):
                cols = slice(l * p, (l + 1) * p)
                block = -v[k] * v[l] * (
                    couplings[k].T @ (couplings[l] / denom[:, None]))
                if l == k:
                    block = block + v[k] * grams[k]
                system[rows, cols] = block

        stacked = spd_solve(system, rhs, columns=panel.column_names,
                            iteration=r)
        new_betas = stacked.reshape(q, p)
        delta = float(np.max(np.abs(new_betas - betas)))
        betas = new_betas

        # Common subject effect implied by the new slopes, then residuals.
        alpha = (pooled_y - sum(v[k] * couplings[k] @ betas[k]
                                for k in range(q))) / denom
        adjusted = y - alpha[codes]
        for k in range(q):
            resid[k] = adjusted - X @ betas[k]
        iterations = r

        if delta <= config.tol:
            effect_score = np.zeros(n)
            score_ok = True
            for k in range(q):
                psi = check_weight(resid[k], taus[k])
                if float(np.max(np.abs(X.T @ (psi * resid[k])))) > grad_tol:
                    score_ok = False
                    break
                effect_score += v[k] * np.bincount(
                    codes, weights=psi * resid[k], minlength=n)
            if score_ok and float(np.max(np.abs(effect_score))) <= grad_tol:
                converged = True
                break

    result = MultiFitResult(taus=taus, v=v, betas=betas, residuals_star=resid,
                            iterations=iterations, converged=converged)
    if not converged:
        raise NoConvergenceError(
            f"joint fit over taus={taus} did not converge in "
            f"{config.max_iter} iterations",
            result=result,
        )
    return result
