#!/usr/bin/env python3
"""Empirical PSDM estimation error vs the exponential tail bound.

Replicates the PSDM estimator many times, records the spectral-norm
deviation from its finite-N target, and compares the empirical tail
P(deviation >= t) with the closed-form bound min(1, exp(-t^2 n / (128 M^2) + 6p)).
The bound is vacuous for small t (it exceeds 1) and then cuts in; the
empirical tail must sit below it everywhere.

Runtime: ~10 seconds.
"""
import numpy as np

from spectradag.experiments import tail_experiment

rows = tail_experiment(
    p=2,
    n=1000,
    num_samples=32,
    trials=200,
    omega=2.0 * np.pi * 5.0 / 32.0,
    seed=1,
    q=1,
)

print(f"{'t':>8}  {'P[restart>=t]':>13}  {'P[cont>=t]':>10}  {'bound':>8}")
for r in rows:
    flag = "" if max(r.empirical_restart_record, r.empirical_continuous) <= r.bound else "  VIOLATION"
    print(f"{r.t:8.4f}  {r.empirical_restart_record:13.3f}  "
          f"{r.empirical_continuous:10.3f}  {min(r.bound, 1.0):8.4f}{flag}")

print("\nNo VIOLATION flags should ever appear: the bound dominates the tail")
print("uniformly in t, for both sampling strategies.  The wide gap between")
print("where the empirical tail dies and where the bound cuts in is the price")
print("of closed-form constants (128 M^2 in the exponent, +6p in front).")
