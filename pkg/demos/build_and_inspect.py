#!/usr/bin/env python3
"""Build a random sparse linear model and inspect its spectral fingerprint.

Walks through the basic objects: a random DAG with bounded in-degree, the
weighted state-transition matrix built on top of it, and the exact power
spectral density matrix (PSDM) at a few frequencies.  Ends with a small
observation that drives everything else in this package: at every frequency
the smallest diagonal PSD entry belongs to a source node.
"""
import numpy as np

from spectradag.graphs import random_dag, source_nodes
from spectradag.models import NoiseSpec, build_model, exact_psdm

p, q, seed = 6, 2, 7
dag = random_dag(p, q, seed=seed)
model = build_model(dag, NoiseSpec("iid", sigma_w=0.5), seed=seed)

print(f"DAG on {p} nodes, in-degree cap {q}")
print(f"  edges (parent -> child): {sorted(dag.edges)}")
print(f"  topological order:       {dag.order}")
print(f"  source nodes:            {sorted(source_nodes(dag))}")
print(f"  min |weight| beta:       {model.constants.beta:.4f}")
print(f"  spectral envelope M:     {model.constants.m_bound:.4f}")
print(f"  rho(B):                  {np.max(np.abs(np.linalg.eigvals(model.b))):.4f}"
      "  (always 0: a DAG makes B nilpotent)")

print("\nDiagonal of the exact PSDM vs frequency:")
for k in (0, 3, 8, 17):
    omega = 2.0 * np.pi * k / 64.0
    diag = exact_psdm(model, omega).diagonal().real
    argmin = int(np.argmin(diag))
    marks = " ".join(f"{v:7.4f}" for v in diag)
    print(f"  omega=2*pi*{k:2d}/64   [{marks}]   argmin -> node {argmin}")

print("\nThe argmin is always a source: its PSD equals the raw noise PSD,")
print("while every non-source picks up extra power from its parents.")
