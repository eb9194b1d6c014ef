#!/usr/bin/env python3
"""Recover a DAG from simulated time-series data, end to end.

Pipeline: simulate trajectories -> periodogram PSDM at one frequency ->
order nodes by conditional-PSD minimization -> parent identification by
thresholded score drops -> compare against the generating DAG.

Also shows the audit record: every conditional-PSD evaluation the
reconstruction made, as JSON, so a recovery can be inspected after the fact.

Runtime: ~15 seconds (most of it simulating n=4000 trajectories).
"""
import json

import numpy as np

from spectradag.cpsd import default_gamma, estimate_psdm
from spectradag.graphs import graph_equal, random_dag, structural_hamming
from spectradag.models import NoiseSpec, build_model
from spectradag.reconstruct import ReconstructionParams, audit_json, reconstruct
from spectradag.simulate import simulate


def main() -> None:
    p, q = 8, 2
    dag = random_dag(p, q, seed=101)
    model = build_model(dag, NoiseSpec("iid", sigma_w=0.5), seed=101)
    num_samples = 64
    omega = 2.0 * np.pi * 17.0 / num_samples

    # Threshold: half the worst-case population score deficit at this omega.
    gamma = default_gamma(model, [omega])
    print(f"true edges: {sorted(dag.edges)}")
    print(f"gamma = {gamma:.6f}")

    params = ReconstructionParams(q=q, gamma=gamma, omega=omega)
    for n in (80, 4000):
        traj = simulate(model, "restart_record", n, num_samples, seed=8)
        est = estimate_psdm(traj, omega)
        result = reconstruct(est, params)
        shd = structural_hamming(result.graph, dag)
        status = "exact" if graph_equal(result.graph, dag) else f"SHD={shd}"
        print(f"n={n:>5}: recovered order {result.order}  ->  {status}")

    audit = json.loads(audit_json(result))
    print(f"\naudit record: {len(audit['f_values'])} conditional-PSD evaluations,")
    print(f"{len(audit['drops'])} candidate-parent drop scores; first three drops:")
    for row in audit["drops"][:3]:
        print(f"  child={row['child']} candidate={row['candidate']} "
              f"drop={row['drop']:.5f}")


if __name__ == "__main__":
    main()
