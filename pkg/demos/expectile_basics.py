#!/usr/bin/env python3
"""Scalar and distributional expectiles.

Expectiles generalize the mean the way quantiles generalize the median:
the expectile at asymmetry level tau minimizes a squared loss that puts
weight tau on positive deviations and 1 - tau on negative ones.  At
tau = 0.5 it is exactly the mean; moving tau sweeps through the whole
distribution.
"""

import numpy as np

import erfe


def main():
    rng = np.random.default_rng(0)
    sample = rng.standard_normal(2000) * 1.3 + 0.5

    print("Sample expectiles (n = 2000 draws of N(0.5, 1.3^2))")
    print(f"  mean of the sample            : {np.mean(sample):+.4f}")
    for tau in (0.05, 0.25, 0.5, 0.75, 0.95):
        value = erfe.sample_expectile(sample, tau)
        print(f"  expectile at tau = {tau:<4}      : {value:+.4f}")

    print()
    print("Location-scale equivariance: expectile(3 v + 1) = 3 expectile(v) + 1")
    base = erfe.sample_expectile(sample, 0.8)
    moved = erfe.sample_expectile(3.0 * sample + 1.0, 0.8)
    print(f"  3 * {base:+.5f} + 1 = {3 * base + 1:+.5f}  vs  {moved:+.5f}")

    print()
    print("Expectiles of analytic distributions (solved from partial moments)")
    rows = [
        ("N(0, 1)", erfe.gaussian(0, 1)),
        ("t with 3 df", erfe.student_t(3)),
        ("chi-squared, 3 df", erfe.chi_squared(3)),
    ]
    taus = (0.1, 0.3, 0.5, 0.8, 0.9)
    header = "  " + f"{'distribution':<18}" + "".join(f"{t:>9}" for t in taus)
    print(header)
    for name, dist in rows:
        vals = [erfe.distribution_expectile(dist, t) for t in taus]
        print("  " + f"{name:<18}" + "".join(f"{v:>9.4f}" for v in vals))
    print()
    print("Note the midpoint column reproduces each distribution's mean.")


if __name__ == "__main__":
    main()
