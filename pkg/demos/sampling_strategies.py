#!/usr/bin/env python3
"""Compare the two trajectory-sampling strategies and the finite-length bias.

restart_record draws n independent length-N trajectories from the stationary
law; continuous slices one long run into n consecutive windows, so windows
are correlated but the process is only "warmed up" once.  Both estimators
converge to the same finite-N target PSDM (a Cesaro-smoothed version of the
true PSDM), not to the true PSDM itself -- the gap between the two targets
is the finite-length bias that the trajectory-length bound controls.

Runtime: a few seconds.
"""
import numpy as np

from spectradag.cpsd import sample_psdm
from spectradag.graphs import random_dag
from spectradag.linalg import spectral_norm
from spectradag.models import NoiseSpec, build_model, exact_psdm, expected_psdm_finite_n


def main() -> None:
    dag = random_dag(4, 2, seed=21)
    model = build_model(dag, NoiseSpec("iid", sigma_w=0.5), seed=21)
    num_samples = 32
    omega = 2.0 * np.pi * 5.0 / num_samples

    phi = exact_psdm(model, omega)
    phi_n = expected_psdm_finite_n(model, omega, num_samples)
    bias = spectral_norm(phi_n - phi)
    print(f"N = {num_samples}: finite-length bias ||Phi_N - Phi|| = {bias:.5f}")
    print(f"{'n':>7}  {'restart_record':>16}  {'continuous':>12}   (distance to Phi_N)")

    for n in (100, 1000, 10000, 100000):
        dists = []
        for strategy in ("restart_record", "continuous"):
            est = sample_psdm(model, strategy, n, num_samples, omega, seed=5)
            dists.append(spectral_norm(est.matrix - phi_n))
        print(f"{n:>7}  {dists[0]:>16.5f}  {dists[1]:>12.5f}")

    print("\nBoth columns shrink toward zero at the usual 1/sqrt(n) pace, while")
    print("the bias above stays fixed: more trajectories cannot repair a short N.")


if __name__ == "__main__":
    main()
