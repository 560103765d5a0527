"""Error metrics and theoretical per-iteration contraction bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlreadySolvedError, ExactConvergence, UnsupportedError
from .linalg import Matrix, spectral_quantities
from .sampling import (
    FixedIdentity,
    PartitionBlock,
    SingleRowWeighted,
    UniformBlock,
    lambda_max_sup,
)

__all__ = [
    "BoundReport",
    "rse",
    "convergence_factor",
    "theoretical_bound",
    "contraction_check",
    "ContractionVerdict",
    "median_rse_curve",
]

RSE_FLOOR = 100.0 * np.finfo(np.float64).eps
BOUND_SLACK = 0.05


@dataclass(frozen=True)
class BoundReport:
    scheme: str
    sigma_min_sq_HA: float
    lambda_max: float
    per_iter_factor: float
    is_estimate: bool
    # unbounded sample spaces would normalize by ||S||^2; no shipped
    # scheme exercises that branch
    normalized_by_sketch_norm: bool = False


def rse(x, min_norm, x0) -> float:
    """Squared relative solution error ||x - A^+b||^2 / ||x0 - A^+b||^2."""
    x = np.asarray(x, dtype=np.float64)
    min_norm = np.asarray(min_norm, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    den = float(np.sum((x0 - min_norm) ** 2))
    if den == 0.0:
        raise AlreadySolvedError("x0 equals the min-norm solution; RSE undefined")
    return float(np.sum((x - min_norm) ** 2)) / den


def convergence_factor(final_rse: float, K: int) -> float:
    """Geometric per-iteration contraction rho = final_rse^(1/K)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if final_rse == 0.0:
        raise ExactConvergence("exact convergence; geometric factor undefined")
    if not 0.0 < final_rse <= 1.0:
        raise ValueError(f"final_rse={final_rse} outside (0, 1]")
    return float(final_rse ** (1.0 / K))


def theoretical_bound(scheme, A: Matrix, zeta: float = 1.0) -> BoundReport:
    """Per-iteration contraction factor 1 - zeta(2-zeta) sigma_min^2(H^1/2 A)
    / lambda_max, specialized per scheme."""
    if not 0.0 < zeta < 2.0:
        raise ValueError("zeta must lie in (0, 2)")
    if isinstance(scheme, FixedIdentity):
        raise UnsupportedError("deterministic scheme: contraction bound degenerate")
    if not isinstance(scheme, (SingleRowWeighted, UniformBlock, PartitionBlock)):
        raise UnsupportedError(f"no bound specialization for {scheme!r}")
    spec = spectral_quantities(A)
    sigma_min_sq_HA = spec.sigma_min_nonzero ** 2 / A.fro_norm_sq  # H = I/||A||_F^2
    lam = lambda_max_sup(scheme, A)
    factor = 1.0 - zeta * (2.0 - zeta) * sigma_min_sq_HA / lam.value
    return BoundReport(
        scheme=scheme.describe(),
        sigma_min_sq_HA=float(sigma_min_sq_HA),
        lambda_max=float(lam.value),
        per_iter_factor=float(factor),
        is_estimate=lam.is_estimate,
    )


def median_rse_curve(traces) -> tuple[np.ndarray, np.ndarray]:
    """Per-iteration median RSE across trials; trials that converged early
    are padded with their final (converged) RSE."""
    lengths = [len(t) for t in traces]
    kmax = max(lengths)
    grid = np.empty((len(traces), kmax))
    for row, t in enumerate(traces):
        vals = t.rse
        grid[row, : len(vals)] = vals
        if len(vals) < kmax:
            grid[row, len(vals):] = vals[-1] if len(vals) else 0.0
    return np.arange(1, kmax + 1), np.median(grid, axis=0)


@dataclass(frozen=True)
class ContractionVerdict:
    passed: bool
    checked_upto: int
    worst_ratio: float
    first_violation: int | None = None


def contraction_check(traces, report: BoundReport) -> ContractionVerdict:
    """Pass iff the median RSE is dominated by (factor)^k (1 + slack) at
    every k where the median is still above the floating-point floor."""
    if len(traces) < 30:
        raise ValueError("contraction_check needs at least 30 trials")
    ks, med = median_rse_curve(traces)
    bound = report.per_iter_factor ** ks.astype(np.float64)
    active = med > RSE_FLOOR
    ratios = np.where(active, med / (bound * (1.0 + BOUND_SLACK)), 0.0)
    worst = float(ratios.max()) if len(ratios) else 0.0
    violated = np.nonzero(ratios > 1.0)[0]
    return ContractionVerdict(
        passed=violated.size == 0,
        checked_upto=int(active.sum()),
        worst_ratio=worst,
        first_violation=int(ks[violated[0]]) if violated.size else None,
    )
