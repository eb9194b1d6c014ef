"""DAG recovery from a single-frequency PSDM.

Two phases, both driven by the conditional PSD f(i, C, omega):

1. Ordering: starting from an empty sequence S, repeatedly pick the
   (node j not in S, set C subseteq S) minimizing f, and append j. On the
   population PSDM the minimizer always has its parents covered by S, so S
   comes out topologically sorted. The search uses subsets of exact size
   min(|S|, q): f is monotone nonincreasing in C, so nothing smaller can
   win (the ``all_subsets`` search mode exists to check that equivalence).
2. Parent identification: for each node, a candidate parent is kept when
   removing it from the conditioning set raises f by at least gamma. The
   conditioning set is the full ordered prefix by default; ``optset`` uses
   the minimizing set recorded during ordering instead (the two differ
   only when the minimizing set is smaller than the prefix, in which case
   parents outside it cannot be recovered).

Every f evaluation goes through `cpsd_f` — one arithmetic path for search,
thresholding, and any external audit, so ties resolve identically
everywhere. Ties in the argmin are broken by (f value, node id,
lexicographic C), making results reproducible across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import chain, combinations

import numpy as np

from .cpsd import PsdmEstimate, cpsd_f
from .errors import ConfigError
from .graphs import Dag
from .linalg import require_hermitian

SEARCH_MODES = ("fixed_size", "all_subsets")
PARENT_MODES = ("prefix", "optset")


@dataclass(frozen=True)
class ReconstructionParams:
    """Search cardinality cap q, parent threshold gamma, and the frequency."""

    q: int
    gamma: float
    omega: float
    parent_sets: str = "prefix"

    def __post_init__(self):
        if self.q < 0:
            raise ConfigError(f"q must be >= 0, got {self.q}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if self.parent_sets not in PARENT_MODES:
            raise ConfigError(
                f"parent_sets must be one of {PARENT_MODES}, got {self.parent_sets!r}"
            )


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    order: tuple[int, ...]
    opt_sets: tuple[frozenset[int], ...]
    graph: Dag
    f_values: tuple[tuple[int, frozenset[int], float], ...]
    drops: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        p = self.graph.p
        if sorted(self.order) != list(range(p)):
            raise ConfigError("order is not a permutation of the graph's nodes")
        if tuple(self.graph.order) != tuple(self.order):
            raise ConfigError("graph order disagrees with the recovered order")
        if len(self.opt_sets) != p:
            raise ConfigError("one minimizing set per ordered position required")


def _matrix_of(psdm, params: ReconstructionParams) -> np.ndarray:
    if isinstance(psdm, PsdmEstimate):
        if abs(psdm.omega - params.omega) > 1e-12:
            raise ConfigError(
                f"params.omega={params.omega} does not match the estimate's "
                f"omega={psdm.omega}"
            )
        return psdm.matrix
    m = np.asarray(psdm, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"PSDM must be square, got shape {m.shape}")
    require_hermitian(m, "reconstruction PSDM")
    return m


def _check_q(params: ReconstructionParams, p: int) -> None:
    if params.q > p - 1:
        raise ConfigError(f"q={params.q} must be <= p-1={p - 1}")


def _ordering_scan(matrix, params, search):
    p = matrix.shape[0]
    order: list[int] = []
    optsets: list[frozenset[int]] = []
    trail: list[tuple[int, frozenset[int], float]] = []
    remaining = list(range(p))
    while remaining:
        prefix = sorted(order)
        k_full = min(len(order), params.q)
        if search == "fixed_size":
            subs = list(combinations(prefix, k_full))
        else:
            subs = sorted(
                chain.from_iterable(combinations(prefix, k) for k in range(k_full + 1))
            )
        best = None
        for j in remaining:
            for c in subs:
                v = cpsd_f(matrix, j, c, params.omega).value
                key = (v, j, c)
                if best is None or key < best:
                    best = key
        v, j, c = best
        order.append(j)
        optsets.append(frozenset(c))
        trail.append((j, frozenset(c), v))
        remaining.remove(j)
    return tuple(order), tuple(optsets), tuple(trail)


def _parent_scan(matrix, order, optsets, params):
    edges = set()
    fvals: list[tuple[int, frozenset[int], float]] = []
    drops: list[tuple[int, int, float]] = []
    for pos, node in enumerate(order):
        if params.parent_sets == "prefix":
            cset = frozenset(order[:pos])
        else:
            cset = frozenset(optsets[pos])
        if not cset:
            continue
        f_full = cpsd_f(matrix, node, cset, params.omega).value
        fvals.append((node, cset, f_full))
        cands = []
        for j in sorted(cset):
            reduced = cset - {j}
            f_minus = cpsd_f(matrix, node, reduced, params.omega).value
            fvals.append((node, reduced, f_minus))
            d = abs(f_full - f_minus)
            drops.append((node, j, d))
            if d >= params.gamma:
                cands.append((d, j))
        if len(cands) > params.q:
            # sampling noise can push more than q drops over gamma; keep the
            # q strongest, ties to the smaller node id
            cands.sort(key=lambda t: (-t[0], t[1]))
            cands = cands[: params.q]
        edges.update((j, node) for _, j in cands)
    return frozenset(edges), tuple(fvals), tuple(drops)


def order_nodes(psdm, params: ReconstructionParams, *, search: str = "fixed_size"):
    """Iterative CPSD-minimizing ordering; returns (order, minimizing sets)."""
    if search not in SEARCH_MODES:
        raise ConfigError(f"search must be one of {SEARCH_MODES}, got {search!r}")
    matrix = _matrix_of(psdm, params)
    _check_q(params, matrix.shape[0])
    order, optsets, _ = _ordering_scan(matrix, params, search)
    return order, optsets


def identify_parents(psdm, order, optsets, params: ReconstructionParams) -> Dag:
    """Thresholded-drop parent sets along a given ordering, as a Dag."""
    matrix = _matrix_of(psdm, params)
    p = matrix.shape[0]
    _check_q(params, p)
    order = tuple(int(v) for v in order)
    if sorted(order) != list(range(p)):
        raise ConfigError("order is not a permutation of 0..p-1")
    optsets = tuple(frozenset(s) for s in optsets)
    if len(optsets) != p:
        raise ConfigError("one minimizing set per ordered position required")
    edges, _, _ = _parent_scan(matrix, order, optsets, params)
    return Dag(p=p, edges=edges, order=order)


def reconstruct(psdm, params: ReconstructionParams, *, search: str = "fixed_size"):
    """Full pipeline: ordering, then parent identification, with audit trail."""
    if search not in SEARCH_MODES:
        raise ConfigError(f"search must be one of {SEARCH_MODES}, got {search!r}")
    matrix = _matrix_of(psdm, params)
    _check_q(params, matrix.shape[0])
    order, optsets, trail = _ordering_scan(matrix, params, search)
    edges, fvals, drops = _parent_scan(matrix, order, optsets, params)
    graph = Dag(p=matrix.shape[0], edges=edges, order=order)
    return ReconstructionResult(
        order=order,
        opt_sets=optsets,
        graph=graph,
        f_values=trail + fvals,
        drops=drops,
    )


def audit_json(result: ReconstructionResult) -> str:
    """Serializable audit record: order, minimizing sets, drops, f trail."""
    doc = {
        "order": list(result.order),
        "opt_sets": [sorted(s) for s in result.opt_sets],
        "edges": sorted([j, i] for j, i in result.graph.edges),
        "drops": [
            {"child": child, "candidate": cand, "drop": d}
            for child, cand, d in result.drops
        ],
        "f_values": [
            {"node": node, "cond": sorted(s), "f": v} for node, s, v in result.f_values
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
