#!/usr/bin/env python3
"""Fitting panel expectile regressions with subject fixed effects.

Generates a heteroskedastic panel in which the noise scale grows with
the second regressor and the subject effects are correlated with it,
then fits the model at several asymmetry levels.  The slope of the
scale-driving regressor should fan out across levels while the clean
regressor's slope stays put; a plain cross-sectional regression would be
biased by the effect/regressor correlation, the within approach is not.
"""

import numpy as np

import erfe


def main():
    config = erfe.SimulationConfig(n=200, m=8, gamma=0.3,
                                   error_dist="gaussian", replications=1,
                                   seed=7)
    panel, truth = erfe.generate_dgp(config, 0)
    print(f"Panel: {panel.n_subjects} subjects x {config.m} observations "
          f"({panel.n_obs} rows), regressors {panel.column_names}")
    print(f"True slopes: x1 = {truth.beta1}, x2 at the midpoint = {truth.beta2}; "
          f"noise scale = 1 + {truth.gamma} * x2\n")

    taus = (0.1, 0.3, 0.5, 0.8, 0.9)
    print(f"{'tau':>5} {'term':>5} {'estimate':>10} {'std.err':>9} "
          f"{'95% interval':>22} {'iters':>6}")
    for tau in taus:
        fit = erfe.fit_erfe_single(panel, tau)
        cov = erfe.sandwich_single(panel, fit)
        ci = erfe.conf_intervals(fit, cov, 0.95)
        for j, name in enumerate(panel.column_names):
            print(f"{tau:>5} {name:>5} {fit.beta[j]:>10.4f} {cov.se[j]:>9.4f} "
                  f"[{ci[j, 0]:>9.4f}, {ci[j, 1]:>9.4f}] {fit.iterations:>6}")
        if tau == 0.5:
            ols = erfe.within_ols(panel)
            gap = np.max(np.abs(fit.beta - ols.beta))
            print(f"{'':>11} midpoint fit equals the classical within "
                  f"estimator (gap {gap:.1e})")

    fit = erfe.fit_erfe_single(panel, 0.5)
    print("\nRecovered subject effects vs the simulated ones (first five):")
    for i in range(5):
        print(f"  subject {panel.subject_labels[i]}: "
              f"recovered {fit.alpha[i]:+.3f}, simulated {truth.alpha[i]:+.3f}")
    corr = np.corrcoef(fit.alpha, truth.alpha)[0, 1]
    print(f"  correlation over all {panel.n_subjects} subjects: {corr:.3f}")

    print("\nJoint fit at (0.2, 0.5, 0.8) sharing one set of subject effects:")
    joint = erfe.fit_erfe_multi(panel, (0.2, 0.5, 0.8))
    jcov = erfe.sandwich_multi(panel, joint)
    for k, tau in enumerate(joint.taus):
        se = jcov.se[k * 2:(k + 1) * 2]
        print(f"  tau={tau}: x1 = {joint.betas[k, 0]:+.4f} ({se[0]:.4f}), "
              f"x2 = {joint.betas[k, 1]:+.4f} ({se[1]:.4f})")


if __name__ == "__main__":
    main()
