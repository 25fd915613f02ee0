#!/usr/bin/env python3
"""Feasibility check of the published witness coefficient sets.

Runs the minimizer over the bi-separable family for each (alpha, beta, gamma,
k, N) and prints the minimum, its location, and the verdict.  All six sets
should sit essentially on the feasibility boundary (f_min within ~1e-3 of 0).
"""
import time

from wdepth.witness import WitnessParams, min_f

PUBLISHED = [
    (2.259e-3, 0.7898, 49.13, 8, 9),
    (3.152e-3, 0.6370, 58.14, 11, 16),
    (3.317e-3, 0.6516, 53.65, 17, 25),
    (0.369, 0.889, 0.268, 9, 9),
    (0.635, 0.813, 0.240, 14, 16),
    (0.550, 0.840, 0.244, 22, 25),
]


def main():
    print(f"{'alpha':>10} {'beta':>7} {'gamma':>7} {'k':>3} {'N':>3} "
          f"{'f_min':>12} {'l*':>3} {'theta1*':>8} {'theta2*':>8}  method")
    for a, b, g, k, n in PUBLISHED:
        t0 = time.time()
        res = min_f(WitnessParams(a, b, g, k=k, n=n))
        pt = res.argmin
        print(f"{a:>10.4g} {b:>7.4f} {g:>7.3f} {k:>3} {n:>3} "
              f"{res.f_min:>12.3e} {pt.l:>3} {pt.theta1:>8.5f} {pt.theta2:>8.5f}  "
              f"{res.method.value} ({time.time() - t0:.2f}s)")


if __name__ == "__main__":
    main()
