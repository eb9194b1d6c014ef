"""Power-spectral-density-matrix estimation and the conditional-PSD metric.

The estimator averages outer products of per-trajectory DFT coefficients:

    psdm_hat(w) = (1/n) * sum_r x^r(w) x^r(w)^*

The conditional PSD of node i given a conditioning set C is the Schur
complement of the C-block,

    f(i, C, w) = Phi_ii(w) - Phi_iC(w) Phi_CC(w)^{-1} Phi_Ci(w),

which equals the noise PSD sigma(w) exactly when C is ancestral and covers
i's parents, and exceeds it by at least the deficit when a parent is
missing. `cpsd_deficit` computes that margin by brute-force enumeration on
the population PSDM; it is what calibrates the parent-identification
threshold (see `default_gamma`).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .graphs import is_ancestral, structural_queries
from .linalg import hermitian_solve, require_hermitian
from .models import LdsModel, exact_psdm
from .simulate import TrajectorySet, iter_trajectory_blocks

# Tolerances on f values: imaginary residue above IMAG_TOL raises; real
# values in [-NEG_TOL, 0) are clamped to 0 (sampling noise), below raises.
IMAG_TOL = 1e-9
NEG_TOL = 1e-9

# Subset enumeration guard for the deficit: 2^p blowup beyond this.
DEFICIT_MAX_P = 14

GAMMA_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class PsdmEstimate:
    """Sample PSDM at one frequency, with the sample sizes that produced it."""

    omega: float
    matrix: np.ndarray
    n: int
    num_samples: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        require_hermitian(m, "PSDM estimate")
        if m.shape[0] and np.min(m.diagonal().real) < 0:
            raise NumericalError("PSDM estimate has a negative diagonal entry")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CpsdValue:
    node: int
    cond_set: frozenset[int]
    omega: float
    value: float
    ridge_applied: bool
    clamped: bool = False


def _dft_block(block: np.ndarray, omega: float) -> np.ndarray:
    """(rows, N, p) real -> (rows, p) complex DFT coefficients at omega."""
    n_steps = block.shape[1]
    phases = np.exp(-1j * omega * np.arange(n_steps)) / np.sqrt(n_steps)
    return np.tensordot(block, phases, axes=([1], [0]))


def estimate_psdm(traj: TrajectorySet, omega: float) -> PsdmEstimate:
    """Average the DFT outer products of every trajectory at one frequency."""
    xw = _dft_block(traj.data, omega)
    acc = xw.T @ np.conj(xw)
    return PsdmEstimate(
        omega=float(omega), matrix=acc / traj.n, n=traj.n, num_samples=traj.num_samples
    )


def sample_psdm(
    model: LdsModel,
    strategy: str,
    n: int,
    num_samples: int,
    omega: float,
    seed,
    method: str = "exact",
    burn_in=None,
    max_block_rows=None,
) -> PsdmEstimate:
    """Simulate and estimate in one streaming pass, never holding all data.

    Reproduces ``estimate_psdm(simulate(...), omega)`` up to summation
    rounding; memory stays bounded by the block size.
    """
    p = model.p
    acc = np.zeros((p, p), dtype=complex)
    for block in iter_trajectory_blocks(
        model, strategy, n, num_samples, seed, method, burn_in, max_block_rows
    ):
        xw = _dft_block(block, omega)
        acc += xw.T @ np.conj(xw)
    return PsdmEstimate(
        omega=float(omega), matrix=acc / n, n=int(n), num_samples=int(num_samples)
    )


def _finalize_f(raw, node, cond, omega, ridged) -> CpsdValue:
    if abs(complex(raw).imag) > IMAG_TOL:
        raise NumericalError(
            f"conditional PSD f({node},{sorted(cond)}) is non-real: imag={complex(raw).imag:.3e}"
        )
    value = complex(raw).real
    clamped = False
    if value < 0.0:
        if value < -NEG_TOL:
            raise NumericalError(
                f"conditional PSD f({node},{sorted(cond)}) = {value:.3e} below -{NEG_TOL}"
            )
        value, clamped = 0.0, True
    return CpsdValue(
        node=int(node),
        cond_set=frozenset(int(c) for c in cond),
        omega=float(omega),
        value=value,
        ridge_applied=bool(ridged),
        clamped=clamped,
    )


def cpsd_f(psdm, i: int, cond, omega: float) -> CpsdValue:
    """Conditional PSD of node i given cond, from a population or sample PSDM.

    psdm may be a PsdmEstimate or a bare Hermitian matrix. The Schur
    complement is evaluated through `hermitian_solve`, so a rank-deficient
    conditioning block gets the ridge rescue (flagged on the result).
    """
    matrix = psdm.matrix if isinstance(psdm, PsdmEstimate) else np.asarray(psdm, dtype=complex)
    p = matrix.shape[0]
    i = int(i)
    cond = frozenset(int(c) for c in cond)
    if not (0 <= i < p):
        raise ConfigError(f"node {i} out of range for p={p}")
    if any(not (0 <= c < p) for c in cond):
        raise ConfigError(f"conditioning set {sorted(cond)} out of range for p={p}")
    if i in cond:
        raise ConfigError(f"node {i} may not appear in its own conditioning set")
    if not cond:
        return _finalize_f(matrix[i, i], i, cond, omega, ridged=False)
    idx = sorted(cond)
    a = matrix[np.ix_(idx, idx)]
    b = matrix[idx, i]
    sol, ridged = hermitian_solve(a, b, with_flag=True)
    raw = matrix[i, i] - np.vdot(b, sol)
    return _finalize_f(raw, i, cond, omega, ridged=ridged)


def _qualifying_pairs(dag, ancestral_only: bool):
    """All (j, C) with C a subset of nd(j) missing at least one parent of j."""
    pairs = []
    for j in range(dag.p):
        q = structural_queries(dag, j)
        if not q.parents:
            continue
        nd = sorted(q.non_descendants)
        for r in range(len(nd) + 1):
            for c in combinations(nd, r):
                if not (q.parents - set(c)):
                    continue
                if ancestral_only and not is_ancestral(dag, c):
                    continue
                pairs.append((j, c))
    return pairs


def cpsd_deficit(model: LdsModel, omega_grid, *, ancestral_only: bool = False) -> float:
    """min over (grid omega, node j, qualifying C) of f(j,C,omega) - sigma(omega).

    Brute force on the population PSDM, batched per conditioning-set size:
    all subsets of a given size are solved in one vectorized call across the
    whole grid. Guarded at p <= 14; an edgeless model has an empty
    minimization domain and is rejected.

    With ``ancestral_only=True`` the enumeration keeps only ancestral
    conditioning sets. That restricted minimum provably stays at or above
    beta^2 * sigma(omega); the unrestricted one (the default, which is what
    threshold calibration needs, since the ordering search scans
    non-ancestral subsets too) is positive but can drop below that bound.
    """
    p = model.p
    if p > DEFICIT_MAX_P:
        raise ConfigError(
            f"deficit enumeration is limited to p <= {DEFICIT_MAX_P}, got p={p}"
        )
    pairs = _qualifying_pairs(model.dag, ancestral_only)
    if not pairs:
        raise ConfigError("deficit undefined: model has no edges")
    grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    phis = np.stack([exact_psdm(model, w) for w in grid])
    sigma = np.atleast_1d(model.noise.psd(grid))
    diag = phis[:, np.arange(p), np.arange(p)].real

    by_size: dict[int, tuple[list, list]] = {}
    for j, c in pairs:
        js, cs = by_size.setdefault(len(c), ([], []))
        js.append(j)
        cs.append(c)

    best = np.inf
    for size, (js, cs) in by_size.items():
        j_arr = np.asarray(js)
        if size == 0:
            f = diag[:, j_arr]
        else:
            s_arr = np.asarray(cs)
            a = phis[:, s_arr[:, :, None], s_arr[:, None, :]]
            b = phis[:, s_arr, j_arr[:, None]]
            try:
                sol = np.linalg.solve(a, b[..., None])[..., 0]
                f = diag[:, j_arr] - np.einsum("wmk,wmk->wm", np.conj(b), sol).real
                if not np.all(np.isfinite(f)):
                    raise np.linalg.LinAlgError("non-finite batched solve")
            except np.linalg.LinAlgError:
                f = np.array(
                    [
                        [cpsd_f(phis[w], j, c, grid[w]).value for j, c in zip(js, cs)]
                        for w in range(len(grid))
                    ]
                )
        best = min(best, float(np.min(f - sigma[:, None])))
    return best


def default_gamma(model: LdsModel, omega_grid) -> float:
    """Parent-identification threshold: half the deficit.

    Falls back to half the provable deficit floor beta^2 * sigma_min when
    enumeration is infeasible (p > 14) or degenerate (no edges), floored at
    a small positive value so the threshold is always usable.
    """
    grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    if model.dag.edges and model.p <= DEFICIT_MAX_P:
        return 0.5 * cpsd_deficit(model, grid)
    sigma_min = float(np.min(model.noise.psd(grid)))
    return max(0.5 * model.constants.beta**2 * sigma_min, GAMMA_FLOOR)


def save_psdm(est: PsdmEstimate, path) -> None:
    """CSV of (row, col, re, im) with a header comment carrying omega, n, N."""
    lines = [f"# omega={est.omega!r},n={est.n},N={est.num_samples}", "row,col,re,im"]
    p = est.p
    for r in range(p):
        for c in range(p):
            v = est.matrix[r, c]
            lines.append(f"{r},{c},{float(v.real)!r},{float(v.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_psdm(path) -> PsdmEstimate:
    """Inverse of `save_psdm`; rejects incomplete or unheadered files."""
    text = Path(path).read_text().splitlines()
    try:
        if not text or not text[0].startswith("#"):
            raise ConfigError(f"missing metadata header in PSDM file {path}")
        meta = dict(item.split("=", 1) for item in text[0].lstrip("# ").split(","))
        omega = float(meta["omega"])
        n = int(meta["n"])
        num_samples = int(meta["N"])
        if len(text) < 2 or text[1].strip() != "row,col,re,im":
            raise ConfigError(f"missing column header in PSDM file {path}")
        entries = [line.split(",") for line in text[2:] if line.strip()]
        seen = {}
        for e in entries:
            seen[(int(e[0]), int(e[1]))] = complex(float(e[2]), float(e[3]))
        p = max(r for r, _ in seen) + 1 if seen else 0
        if len(seen) != p * p or len(entries) != p * p:
            raise ConfigError(f"PSDM file {path} does not contain a complete square matrix")
        matrix = np.zeros((p, p), dtype=complex)
        for (r, c), v in seen.items():
            matrix[r, c] = v
    except (KeyError, ValueError, IndexError) as exc:
        raise ConfigError(f"malformed PSDM file {path}: {exc}") from exc
    return PsdmEstimate(omega=omega, matrix=matrix, n=n, num_samples=num_samples)
