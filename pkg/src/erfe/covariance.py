"""Robust sandwich covariance for the within-transformed expectile fits.

The meat clusters score outer products by subject (observations are
dependent within a subject, independent across subjects); the bread is
the check-weighted Gram of the transformed design.  The variance of the
coefficient estimates divides the sandwich by the total observation
count, matching the root-(nm) normalization of the limit theory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    NotPositiveSemidefiniteError,
    SingularBreadError,
    SingularGramError,
)
from .estimator import FitResult, MultiFitResult, pooled_transform
from .linalg import spd_inverse
from .panel import PanelData, check_weight
from .within import apply_within, pooled_subject_weights, subject_weights

__all__ = [
    "SandwichCovariance",
    "conf_intervals",
    "normal_quantile",
    "sandwich_multi",
    "sandwich_single",
]


@dataclass(frozen=True)
class SandwichCovariance:
    """Assembled sandwich: meat ``d0_hat``, bread factor ``d1_hat``,
    variance matrix ``vc`` of the stacked coefficients and its
    square-root diagonal ``se``."""

    d0_hat: np.ndarray
    d1_hat: np.ndarray
    vc: np.ndarray
    se: np.ndarray


def _subject_scores(x_star, weighted_resid, panel: PanelData) -> np.ndarray:
    """Per-subject score vectors: rows of X* times psi-weighted residuals."""
    scores = np.zeros((panel.n_subjects, x_star.shape[1]))
    np.add.at(scores, panel.codes, x_star * weighted_resid[:, None])
    return scores


def _finalize(d0, d1, n_obs, block_sizes=None) -> SandwichCovariance:
    if block_sizes is None:
        try:
            bread = spd_inverse(d1)
        except SingularGramError as exc:
            raise SingularBreadError(str(exc)) from None
    else:
        # d1 is block diagonal; invert block by block.
        bread = np.zeros_like(d1)
        start = 0
        for size in block_sizes:
            stop = start + size
            try:
                bread[start:stop, start:stop] = spd_inverse(d1[start:stop, start:stop])
            except SingularGramError as exc:
                raise SingularBreadError(str(exc)) from None
            start = stop
    vc = bread @ d0 @ bread / n_obs
    vc = (vc + vc.T) / 2.0
    eigmin = float(np.min(np.linalg.eigvalsh(vc)))
    floor = -1e-10 * max(float(np.trace(vc)), np.finfo(float).tiny)
    if eigmin < floor:
        raise NotPositiveSemidefiniteError(
            f"variance matrix has eigenvalue {eigmin:.3e} below {floor:.3e}"
        )
    se = np.sqrt(np.maximum(np.diag(vc), 0.0))
    return SandwichCovariance(d0_hat=d0, d1_hat=d1, vc=vc, se=se)


def sandwich_single(panel: PanelData, fit: FitResult) -> SandwichCovariance:
    """Cluster-robust covariance of a single-tau fit.

    Both matrices are rebuilt from the converged transformed residuals:
    the transform uses their check weights, the meat sums per-subject
    score outer products, the bread is the weighted Gram.
    """
    psi = check_weight(fit.residuals_star, fit.tau)
    sw = subject_weights(fit.residuals_star, fit.tau, panel)
    x_star = apply_within(panel.X, sw, panel)
    n_obs = panel.n_obs

    scores = _subject_scores(x_star, psi * fit.residuals_star, panel)
    d0 = scores.T @ scores / n_obs
    d0 = (d0 + d0.T) / 2.0
    d1 = x_star.T @ (x_star * psi[:, None]) / n_obs
    return _finalize(d0, d1, n_obs)


def sandwich_multi(panel: PanelData, fit: MultiFitResult) -> SandwichCovariance:
    """Cluster-robust covariance of a joint multi-tau fit.

    The meat is blocked over pairs of asymmetric points with the influence
    weights multiplying each side; the bread is block diagonal in the
    asymmetric points.  The stacked variance matrix covers the q*p
    coefficients in block order.
    """
    q = len(fit.taus)
    p = panel.n_regressors
    n_obs = panel.n_obs
    pw = pooled_subject_weights(fit.residuals_star, fit.taus, fit.v, panel)
    _, x_star = pooled_transform(panel, pw)

    score_blocks = []
    for k in range(q):
        psi_k = pw.psi_blocks[k]
        score_blocks.append(
            _subject_scores(x_star, psi_k * fit.residuals_star[k], panel)
        )

    d0 = np.zeros((q * p, q * p))
    d1 = np.zeros((q * p, q * p))
    for k in range(q):
        rows = slice(k * p, (k + 1) * p)
        for l in range(k, q):
            cols = slice(l * p, (l + 1) * p)
            block = fit.v[k] * fit.v[l] * (score_blocks[k].T @ score_blocks[l]) / n_obs
            d0[rows, cols] = block
            if l != k:
                d0[cols, rows] = block.T
        psi_k = pw.psi_blocks[k]
        d1[rows, rows] = fit.v[k] * (x_star.T @ (x_star * psi_k[:, None])) / n_obs
    return _finalize(d0, d1, n_obs, block_sizes=[p] * q)


def normal_quantile(prob: float) -> float:
    """Quantile of the standard normal distribution."""
    if not 0.0 < prob < 1.0:
        raise ValueError("probability must lie in (0, 1)")
    return float(special.ndtri(prob))


def conf_intervals(fit, cov: SandwichCovariance, level: float = 0.95) -> np.ndarray:
    """Large-sample confidence intervals, one (lower, upper) row per coefficient.

    For a joint fit the rows follow the stacked block order of the
    covariance.  ``level`` must lie strictly between 0 and 1.
    """
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    if isinstance(fit, MultiFitResult):
        estimates = fit.betas.ravel()
    else:
        estimates = np.asarray(fit.beta, dtype=float)
    if estimates.shape[0] != cov.se.shape[0]:
        raise ValueError("fit and covariance disagree on coefficient count")
    z = normal_quantile((1.0 + level) / 2.0)
    half = z * cov.se
    return np.column_stack([estimates - half, estimates + half])
