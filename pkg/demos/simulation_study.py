#!/usr/bin/env python3
"""Desk-scale Monte Carlo study of the estimator and its standard errors.

Two designs: a location-shift design where only the intercept moves with
the asymmetry level, and a location-scale design where the noise scale
grows with the second regressor, so that slope's truth moves too.  For
each cell the table reports the mean estimate, bias against the true
coefficient, Monte Carlo standard deviation, mean sandwich standard
error, and their ratio (which should sit near one).
"""

import time

import erfe


def run_cell(title, gamma, n, m, replications, seed, workers=2):
    config = erfe.SimulationConfig(
        n=n, m=m, gamma=gamma, error_dist="gaussian",
        taus=(0.1, 0.3, 0.5, 0.8, 0.9), replications=replications, seed=seed)
    start = time.monotonic()
    metrics = erfe.run_monte_carlo(config, workers=workers)
    elapsed = time.monotonic() - start
    print(f"{title} (n={n}, m={m}, R={replications}; {elapsed:.1f}s)")
    print(f"  {'tau':>5} {'coef':>5} {'true':>8} {'mean':>8} {'bias':>9} "
          f"{'sd':>8} {'mean se':>8} {'se/sd':>7}")
    for row in metrics.rows:
        print(f"  {row.tau:>5} {row.coefficient:>5} {row.true_value:>8.4f} "
              f"{row.mean_estimate:>8.4f} {row.bias:>+9.4f} {row.sd:>8.4f} "
              f"{row.mean_se:>8.4f} {row.se_sd_ratio:>7.3f}")
    print()


def main():
    run_cell("Location shift (homoskedastic)", gamma=0.0,
             n=100, m=5, replications=200, seed=1234)
    run_cell("Location-scale shift (heteroskedastic)", gamma=0.3,
             n=100, m=15, replications=100, seed=99)
    print("In the second table the x2 slope fans out with the asymmetry")
    print("level; with few observations per subject its estimate is pulled")
    print("slightly toward the midpoint value (an effect that shrinks like")
    print("1/m as the within-subject sample grows).")


if __name__ == "__main__":
    main()
