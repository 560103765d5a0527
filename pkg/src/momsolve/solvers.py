"""Iterative solvers: basic/modified SGD with Polyak steps, adaptive
heavy-ball momentum, stochastic CG, CGNE, and the fixed-parameter momentum
baseline.

All solvers start from x0 = 0 (which lies in Range(A^T)) and converge to
the min-norm solution; the relative solution error is tracked against
``system.min_norm``. Iteration records carry k starting at 1 so that the
RSE of x^k aligns with the k-th power of theoretical contraction factors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    BreakdownError,
    DegenerateDirectionError,
    StalledSamplingError,
    ZeroSketchResidualError,
)
from .linalg import Matrix
from .problems import LinearSystem
from .sampling import (
    FixedIdentity,
    PartitionBlock,
    SampleOp,
    SingleRowWeighted,
    UniformBlock,
    apply_sample_transpose,
    block_spectral_norm_sq,
    pullback,
)

__all__ = [
    "SolverConfig",
    "SolverState",
    "StepOutcome",
    "Trace",
    "TraceRecord",
    "polyak_stepsize",
    "basic_step",
    "ashbm_parameters",
    "solve_basic",
    "solve_modified_basic",
    "solve_ashbm",
    "solve_scg",
    "solve_cgne",
    "solve_mrabk",
    "compute_tau",
    "SOLVER_IDS",
]

# numerically-zero test for the 2x2 system determinant in the momentum
# parameter formulas, relative to ||g||^2 ||d||^2
DEGENERACY_THRESHOLD = 1e-14


@dataclass
class SolverConfig:
    zeta: float = 1.0
    zeta_schedule: Callable[[int], float] | None = None
    max_iters: int = 1_000_000
    rse_tolerance: float = 1e-12
    zero_test_threshold: float | None = None
    resample_cap: int | None = None
    momentum_beta: float = 0.7
    seed: int = 0
    track_residual: bool = True
    record_timing: bool = True
    drift_check_interval: int = 1000

    def zeta_at(self, k: int) -> float:
        z = self.zeta_schedule(k) if self.zeta_schedule is not None else self.zeta
        if not 0.0 < z < 2.0:
            raise ValueError(f"zeta_{k}={z} outside (0, 2)")
        return z

    def validate(self) -> None:
        if self.zeta_schedule is None and not 0.0 < self.zeta < 2.0:
            raise ValueError(f"zeta={self.zeta} outside (0, 2)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.rse_tolerance < 0:
            raise ValueError("rse_tolerance must be >= 0")
        if self.zero_test_threshold is not None and self.zero_test_threshold <= 0:
            raise ValueError("zero_test_threshold must be > 0")
        if not 0.0 <= self.momentum_beta < 1.0:
            raise ValueError("momentum_beta must lie in [0, 1)")


@dataclass
class SolverState:
    x: np.ndarray
    x_prev: np.ndarray
    p: np.ndarray | None
    r: np.ndarray
    k: int


@dataclass(frozen=True)
class StepOutcome:
    alpha: float
    beta: float
    sample: SampleOp
    moved: bool


class TraceRecord(NamedTuple):
    k: int
    rse: float
    residual_norm: float
    alpha: float
    beta: float
    wall_nanos: int
    moved: bool


@dataclass
class Trace:
    k: np.ndarray
    rse: np.ndarray
    residual_norm: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    wall_nanos: np.ndarray
    moved: np.ndarray
    converged: bool = False
    reason: str = ""
    fallback_steps: int = 0
    sample_draws: int = 0
    iterates: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.k)

    @property
    def iterations(self) -> int:
        return int(self.k[-1]) if len(self.k) else 0

    @property
    def final_rse(self) -> float:
        return float(self.rse[-1]) if len(self.rse) else 0.0

    def records(self):
        return [
            TraceRecord(int(k), float(e), float(rn), float(a), float(bt), int(w), bool(mv))
            for k, e, rn, a, bt, w, mv in zip(
                self.k, self.rse, self.residual_norm, self.alpha,
                self.beta, self.wall_nanos, self.moved,
            )
        ]


class _TraceBuilder:
    def __init__(self):
        self.k, self.rse, self.resnorm = [], [], []
        self.alpha, self.beta, self.wall, self.moved = [], [], [], []

    def add(self, k, rse, resnorm, alpha, beta, wall, moved):
        self.k.append(k)
        self.rse.append(rse)
        self.resnorm.append(resnorm)
        self.alpha.append(alpha)
        self.beta.append(beta)
        self.wall.append(wall)
        self.moved.append(moved)

    def build(self, **extra) -> Trace:
        return Trace(
            k=np.array(self.k, dtype=np.int64),
            rse=np.array(self.rse, dtype=np.float64),
            residual_norm=np.array(self.resnorm, dtype=np.float64),
            alpha=np.array(self.alpha, dtype=np.float64),
            beta=np.array(self.beta, dtype=np.float64),
            wall_nanos=np.array(self.wall, dtype=np.int64),
            moved=np.array(self.moved, dtype=bool),
            **extra,
        )


# ---------------------------------------------------------------------------
# Single-step operations (spec-level API; full solvers use the fast path)
# ---------------------------------------------------------------------------

def polyak_stepsize(op: SampleOp, A: Matrix, r: np.ndarray,
                    zero_threshold: float = 0.0) -> float:
    """Adaptive step ||S^T r||^2 / ||A^T S S^T r||^2."""
    t = apply_sample_transpose(op, r)
    tn2 = float(t @ t)
    if tn2 <= zero_threshold * zero_threshold or tn2 == 0.0:
        raise ZeroSketchResidualError("S^T r is numerically zero")
    g = pullback(op, A, t)
    return tn2 / float(g @ g)


def basic_step(A: Matrix, b: np.ndarray, state: SolverState, op: SampleOp,
               zeta_k: float, zero_threshold: float = 0.0) -> StepOutcome:
    """One step of the basic method; x and r updated in place.

    When ||S^T r|| is below the zero threshold the iterate is left
    unchanged and ``moved`` is False.
    """
    t = apply_sample_transpose(op, state.r)
    tn2 = float(t @ t)
    if tn2 <= zero_threshold * zero_threshold or tn2 == 0.0:
        state.k += 1
        return StepOutcome(alpha=0.0, beta=0.0, sample=op, moved=False)
    g = pullback(op, A, t)
    alpha = (2.0 - zeta_k) * tn2 / float(g @ g)
    state.x_prev = state.x.copy()
    state.x -= alpha * g
    state.r -= alpha * A.matvec(g)
    state.k += 1
    return StepOutcome(alpha=alpha, beta=0.0, sample=op, moved=True)


def ashbm_parameters(g: np.ndarray, d: np.ndarray, s: float) -> tuple[float, float]:
    """Closed-form momentum parameters minimizing the error over the plane
    spanned by the sampled gradient g and the previous step d.

    s is ||S^T r||^2. Raises DegenerateDirectionError when g and d are
    numerically dependent.
    """
    gn2 = float(g @ g)
    dn2 = float(d @ d)
    gd = float(g @ d)
    det = gn2 * dn2 - gd * gd
    if det <= DEGENERACY_THRESHOLD * gn2 * dn2:
        raise DegenerateDirectionError("gradient and momentum direction are parallel")
    return dn2 * s / det, gd * s / det


def compute_tau(partition: PartitionBlock | tuple, A: Matrix) -> float:
    """Step-size constant for the fixed-parameter momentum baseline:
    tau = max_i ||A_Ii||_2^2 / ||A_Ii||_F^2 / ||A||_F^2."""
    blocks = partition.blocks if isinstance(partition, PartitionBlock) else partition
    worst = max(
        block_spectral_norm_sq(A, blk) / float(A.row_norms_sq[blk].sum())
        for blk in blocks
    )
    return worst / A.fro_norm_sq


# ---------------------------------------------------------------------------
# Fast structured sampling (per-run caches)
# ---------------------------------------------------------------------------

class _Atom:
    """One support element of a scheme with precomputed row products."""

    __slots__ = ("indices", "scale", "A_rows", "b_rows")

    def __init__(self, indices, scale, A_rows, b_rows):
        self.indices = indices
        self.scale = scale
        self.A_rows = A_rows  # dense block, scipy csr block, or Matrix rows view
        self.b_rows = b_rows

    def sketch_residual(self, x):
        """S^T (A x - b) restricted to this atom."""
        return self.scale * (self.A_rows @ x - self.b_rows)

    def grad(self, t):
        """A^T S t using only this atom's rows."""
        return self.A_rows.T @ (self.scale * t)

    def as_op(self) -> SampleOp:
        return SampleOp(indices=self.indices, scale=self.scale)


class _FastSampler:
    """Scheme bound to a system with per-atom caches for tight loops."""

    def __init__(self, scheme, system: LinearSystem):
        A, b = system.A, system.b
        dense = None if A.is_sparse else A.toarray()
        raw = A._csr if A.is_sparse else dense  # supports @ and fancy rows

        def rows(idx):
            block = raw[idx]
            return np.ascontiguousarray(block) if dense is not None else block

        self.scheme = scheme
        if isinstance(scheme, FixedIdentity):
            self._atoms = [_Atom(None, 1.0, raw, b)]
            self._cum = None
            self.support_size = 1
        elif isinstance(scheme, PartitionBlock):
            fro_sq = np.array([A.row_norms_sq[blk].sum() for blk in scheme.blocks])
            self._atoms = [
                _Atom(blk, 1.0 / np.sqrt(fs), rows(blk), b[blk])
                for blk, fs in zip(scheme.blocks, fro_sq)
            ]
            self._cum = np.cumsum(fro_sq / A.fro_norm_sq)
            self.support_size = len(scheme.blocks)
        elif isinstance(scheme, SingleRowWeighted):
            norms = np.sqrt(A.row_norms_sq)
            self._atoms = [
                _Atom(np.array([i]), 1.0 / norms[i] if norms[i] > 0 else 0.0,
                      rows([i]), b[i: i + 1])
                for i in range(A.rows)
            ]
            self._cum = np.cumsum(A.row_norms_sq / A.fro_norm_sq)
            self.support_size = A.rows
        elif isinstance(scheme, UniformBlock):
            # subsets cannot be enumerated; draw builds the atom lazily
            self._atoms = None
            self._cum = None
            self._raw, self._b = raw, b
            self._m, self._p = A.rows, scheme.p
            self._scale = np.sqrt(A.rows / scheme.p / A.fro_norm_sq)
            self.support_size = 100  # cap multiplier basis for rejection loops
        else:
            raise TypeError(f"unsupported scheme {scheme!r}")

    def draw(self, rng) -> _Atom:
        if self._atoms is None:
            idx = np.sort(rng.choice(self._m, size=self._p, replace=False))
            return _Atom(idx, self._scale, self._raw[idx], self._b[idx])
        if self._cum is None:
            return self._atoms[0]
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        return self._atoms[min(i, len(self._atoms) - 1)]


# ---------------------------------------------------------------------------
# Shared run machinery
# ---------------------------------------------------------------------------

class _Run:
    def __init__(self, system: LinearSystem, scheme, config: SolverConfig,
                 keep_iterates: bool, diagnostics: bool):
        config.validate()
        if system.min_norm is None:
            raise ValueError("system.min_norm is required; call attach_min_norm first")
        self.system = system
        self.A, self.b = system.A, system.b
        self.mn = system.min_norm
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.sampler = _FastSampler(scheme, system) if scheme is not None else None
        b_norm = float(np.linalg.norm(self.b))
        self.threshold_sq = (
            config.zero_test_threshold
            if config.zero_test_threshold is not None
            else 1e-14 * (1.0 + b_norm)
        ) ** 2
        self.b_inf = float(np.max(np.abs(self.b))) if len(self.b) else 0.0
        self.cap = (
            config.resample_cap
            if config.resample_cap is not None
            else 100 * (self.sampler.support_size if self.sampler else 1)
        )
        n = self.A.cols
        self.x = np.zeros(n)
        self.err = -self.mn.copy()  # x - min_norm, updated alongside x
        self.err0_sq = float(self.err @ self.err)
        self.tb = _TraceBuilder()
        self.keep_iterates = keep_iterates
        self.diag = {} if diagnostics else None
        self.draws = 0
        self.fallbacks = 0

    # -- sampling ------------------------------------------------------

    def draw_nonzero(self, x):
        """Rejection-sample until ||S^T (Ax - b)|| is above the zero test.

        Returns (atom, t, ||t||^2) or None when the cap was reached with a
        residual already below tolerance (i.e. solved).
        """
        thr2 = self.threshold_sq
        deterministic = self.sampler.support_size == 1 and self.sampler._cum is None
        attempts = self.cap if not deterministic else 1
        for _ in range(attempts):
            atom = self.sampler.draw(self.rng)
            self.draws += 1
            t = atom.sketch_residual(x)
            tn2 = float(t @ t)
            if tn2 > thr2:
                return atom, t, tn2
        r = self.A.matvec(x) - self.b
        if float(np.max(np.abs(r))) <= self.config.rse_tolerance * (1.0 + self.b_inf):
            return None
        raise StalledSamplingError(
            f"{self.cap} consecutive zero sketches with residual above tolerance"
        )

    # -- bookkeeping -----------------------------------------------------

    def rse(self) -> float:
        return float(self.err @ self.err) / self.err0_sq

    def residual_norm(self) -> float:
        r = self.A.matvec(self.x) - self.b
        return float(np.linalg.norm(r))

    def record(self, k, alpha, beta, wall, moved=True):
        rse = self.rse()
        resnorm = self.residual_norm() if self.config.track_residual else float("nan")
        self.tb.add(k, rse, resnorm, alpha, beta, wall, moved)
        if self.keep_iterates:
            self.tb_iterates.append(self.x.copy())
        return rse

    def add_diag(self, key, value):
        if self.diag is not None:
            self.diag.setdefault(key, []).append(value)

    def finish(self, x_prev, p, converged, reason) -> tuple[SolverState, Trace]:
        r = self.A.matvec(self.x) - self.b
        state = SolverState(x=self.x, x_prev=x_prev, p=p, r=r, k=self.k_done)
        extra = {}
        if self.diag is not None:
            extra["diagnostics"] = {k: np.array(v) for k, v in self.diag.items()}
        if self.keep_iterates:
            extra["iterates"] = self.tb_iterates
        trace = self.tb.build(
            converged=converged,
            reason=reason,
            fallback_steps=self.fallbacks,
            sample_draws=self.draws,
            **extra,
        )
        return state, trace

    def start(self):
        self.k_done = 0
        self.tb_iterates = [] if self.keep_iterates else None
        if self.err0_sq == 0.0:
            return False  # x0 already the min-norm solution (b in Null? b=0)
        return True

    def now(self):
        return time.perf_counter_ns() if self.config.record_timing else 0


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def solve_basic(system: LinearSystem, scheme, config: SolverConfig,
                *, keep_iterates: bool = False, diagnostics: bool = False):
    """Algorithm with plain sampling: a zero sketch leaves the iterate
    unchanged (moved=False) instead of resampling."""
    run = _Run(system, scheme, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    thr2 = run.threshold_sq
    x_prev = run.x.copy()
    for k in range(1, config.max_iters + 1):
        t0 = run.now()
        atom = run.sampler.draw(run.rng)
        run.draws += 1
        t = atom.sketch_residual(run.x)
        tn2 = float(t @ t)
        if tn2 <= thr2:
            rse = run.record(k, 0.0, 0.0, run.now() - t0, moved=False)
            run.k_done = k
            if rse <= config.rse_tolerance:
                return run.finish(x_prev, None, True, "rse")
            continue
        g = atom.grad(t)
        alpha = (2.0 - config.zeta_at(k - 1)) * tn2 / float(g @ g)
        x_prev = run.x.copy()
        run.x -= alpha * g
        run.err -= alpha * g
        rse = run.record(k, alpha, 0.0, run.now() - t0)
        run.k_done = k
        if rse <= config.rse_tolerance:
            return run.finish(x_prev, None, True, "rse")
    return run.finish(x_prev, None, False, "max_iters")


def solve_modified_basic(system: LinearSystem, scheme, config: SolverConfig,
                         *, keep_iterates: bool = False, diagnostics: bool = False):
    """Rejection-samples until the sketched residual is nonzero, then takes
    a relaxed Polyak step; the error decreases strictly on every step."""
    run = _Run(system, scheme, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    x_prev = run.x.copy()
    for k in range(1, config.max_iters + 1):
        t0 = run.now()
        drawn = run.draw_nonzero(run.x)
        if drawn is None:
            return run.finish(x_prev, None, True, "residual")
        atom, t, tn2 = drawn
        g = atom.grad(t)
        alpha = (2.0 - config.zeta_at(k - 1)) * tn2 / float(g @ g)
        x_prev = run.x.copy()
        run.x -= alpha * g
        run.err -= alpha * g
        rse = run.record(k, alpha, 0.0, run.now() - t0)
        run.k_done = k
        if rse <= config.rse_tolerance:
            return run.finish(x_prev, None, True, "rse")
    return run.finish(x_prev, None, False, "max_iters")


def solve_ashbm(system: LinearSystem, scheme, config: SolverConfig,
                *, keep_iterates: bool = False, diagnostics: bool = False):
    """Adaptive heavy-ball momentum: the first step is a Polyak step, after
    which (alpha, beta) minimize the error over the gradient/previous-step
    plane in closed form."""
    run = _Run(system, scheme, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    cfg = config

    # first iteration: one modified-basic step with zeta = 1
    t0 = run.now()
    drawn = run.draw_nonzero(run.x)
    if drawn is None:
        return run.finish(run.x.copy(), None, True, "residual")
    atom, t, tn2 = drawn
    g = atom.grad(t)
    alpha = tn2 / float(g @ g)
    x_prev = run.x.copy()
    run.x = run.x - alpha * g
    run.err -= alpha * g
    d = run.x - x_prev
    rse = run.record(1, alpha, 0.0, run.now() - t0)
    run.k_done = 1
    if rse <= cfg.rse_tolerance:
        return run.finish(x_prev, None, True, "rse")

    for k in range(2, cfg.max_iters + 1):
        t0 = run.now()
        drawn = run.draw_nonzero(run.x)
        if drawn is None:
            return run.finish(x_prev, None, True, "residual")
        atom, t, tn2 = drawn
        g = atom.grad(t)
        gn2 = float(g @ g)
        dn2 = float(d @ d)
        gd = float(g @ d)
        det = gn2 * dn2 - gd * gd
        if det <= DEGENERACY_THRESHOLD * gn2 * dn2:
            # fall back to the alpha-only minimizer (one zeta=1 basic step)
            alpha, beta = tn2 / gn2, 0.0
            run.fallbacks += 1
        else:
            alpha = dn2 * tn2 / det
            beta = gd * tn2 / det
        if run.diag is not None:
            x_tilde_err = run.err - (tn2 / gn2) * g
            run.add_diag("pythagorean_rhs", float(np.linalg.norm(x_tilde_err)))
        x_prev = run.x
        run.x = run.x - alpha * g + beta * d
        run.err += run.x - x_prev
        d_old = d
        d = run.x - x_prev
        if run.diag is not None:
            run.add_diag("pythagorean_lhs", float(np.linalg.norm(run.err)))
            denom = float(np.linalg.norm(d) * np.linalg.norm(d_old))
            run.add_diag("step_orth", float(d @ d_old) / denom if denom else 0.0)
            t_next = atom.sketch_residual(run.x)
            dn = float(np.linalg.norm(t_next) * np.sqrt(tn2))
            run.add_diag("sketch_resid_orth", float(t_next @ t) / dn if dn else 0.0)
        rse = run.record(k, alpha, beta, run.now() - t0)
        run.k_done = k
        if rse <= cfg.rse_tolerance:
            return run.finish(x_prev, None, True, "rse")
    return run.finish(x_prev, None, False, "max_iters")


def solve_scg(system: LinearSystem, scheme, config: SolverConfig,
              *, keep_iterates: bool = False, diagnostics: bool = False):
    """Stochastic CG recursion; identical sample sequences make it
    iterate-for-iterate equal to the momentum form."""
    run = _Run(system, scheme, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    cfg = config

    drawn = run.draw_nonzero(run.x)
    if drawn is None:
        return run.finish(run.x.copy(), None, True, "residual")
    atom, t, s_cur = drawn
    p = -atom.grad(t)

    x_prev = run.x.copy()
    for k in range(1, cfg.max_iters + 1):
        t0 = run.now()
        pn2 = float(p @ p)
        if pn2 <= run.threshold_sq:
            if run.residual_norm() <= cfg.rse_tolerance * (1.0 + run.b_inf):
                return run.finish(x_prev, p, True, "residual")
            raise DegenerateDirectionError("search direction vanished with large residual")
        delta = s_cur / pn2
        x_prev = run.x.copy()
        run.x = run.x + delta * p
        run.err += delta * p
        rse = run.record(k, delta, 0.0, run.now() - t0)
        run.k_done = k
        if run.diag is not None:
            t_next_same = atom.sketch_residual(run.x)  # S_k^T r^{k+1}
            dn = float(np.linalg.norm(t_next_same) * np.sqrt(s_cur))
            run.add_diag("sketch_resid_orth", float(t_next_same @ t) / dn if dn else 0.0)
        if rse <= cfg.rse_tolerance:
            return run.finish(x_prev, p, True, "rse")
        drawn = run.draw_nonzero(run.x)
        if drawn is None:
            return run.finish(x_prev, p, True, "residual")
        atom_next, t_new, s_new = drawn
        t_old = atom_next.sketch_residual(x_prev)  # S_{k+1}^T r^k
        eta = (s_new - float(t_new @ t_old)) / s_cur
        p_new = -atom_next.grad(t_new) + eta * p
        if run.diag is not None:
            dn = float(np.linalg.norm(p) * np.linalg.norm(p_new))
            run.add_diag("direction_orth", float(p @ p_new) / dn if dn else 0.0)
        p = p_new
        atom, t, s_cur = atom_next, t_new, s_new
    return run.finish(x_prev, p, False, "max_iters")


def solve_cgne(system: LinearSystem, config: SolverConfig,
               *, keep_iterates: bool = False, diagnostics: bool = False):
    """Conjugate gradient on A A^T y = b with x = A^T y; finite termination
    on full-rank consistent systems."""
    run = _Run(system, None, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    cfg = config
    A, b = run.A, run.b
    r = A.matvec(run.x) - b
    p = -A.rmatvec(r)
    rn2 = float(r @ r)
    x_prev = run.x.copy()
    res_tol = cfg.rse_tolerance * (1.0 + run.b_inf)
    for k in range(1, cfg.max_iters + 1):
        t0 = run.now()
        pn2 = float(p @ p)
        if pn2 <= run.threshold_sq:
            if np.sqrt(rn2) <= res_tol or float(np.max(np.abs(r))) <= res_tol:
                return run.finish(x_prev, p, True, "residual")
            raise BreakdownError("CG direction vanished with large residual")
        mu = rn2 / pn2
        x_prev = run.x.copy()
        run.x = run.x + mu * p
        run.err += mu * p
        r = r + mu * A.matvec(p)
        if k % cfg.drift_check_interval == 0:
            r = A.matvec(run.x) - b  # bound incremental drift
        rn2_new = float(r @ r)
        rse = run.rse()
        self_resnorm = float(np.sqrt(rn2_new))
        run.tb.add(k, rse, self_resnorm, mu, 0.0, run.now() - t0, True)
        if run.keep_iterates:
            run.tb_iterates.append(run.x.copy())
        run.k_done = k
        if rse <= cfg.rse_tolerance or float(np.max(np.abs(r))) <= res_tol:
            return run.finish(x_prev, p, True, "rse" if rse <= cfg.rse_tolerance else "residual")
        tau = rn2_new / rn2
        if run.diag is not None:
            p_new = -A.rmatvec(r) + tau * p
            dn = float(np.linalg.norm(p) * np.linalg.norm(p_new))
            run.add_diag("direction_orth", float(p @ p_new) / dn if dn else 0.0)
            p = p_new
        else:
            p = -A.rmatvec(r) + tau * p
        rn2 = rn2_new
    return run.finish(x_prev, p, False, "max_iters")


def solve_mrabk(system: LinearSystem, scheme: PartitionBlock, config: SolverConfig,
                *, keep_iterates: bool = False, diagnostics: bool = False):
    """Fixed-parameter momentum baseline on partition sampling: constant
    step 1 / (tau ||A||_F^2) plus constant momentum beta."""
    if not isinstance(scheme, PartitionBlock):
        raise TypeError("the fixed-parameter baseline requires partition sampling")
    run = _Run(system, scheme, config, keep_iterates, diagnostics)
    if not run.start():
        return run.finish(run.x.copy(), None, True, "already_solved")
    cfg = config
    tau = compute_tau(scheme, run.A)
    alpha = 1.0 / (tau * run.A.fro_norm_sq)
    beta = cfg.momentum_beta
    x_prev = run.x.copy()
    for k in range(1, cfg.max_iters + 1):
        t0 = run.now()
        atom = run.sampler.draw(run.rng)
        run.draws += 1
        t = atom.sketch_residual(run.x)
        g = atom.grad(t)
        x_new = run.x - alpha * g + beta * (run.x - x_prev)
        run.err += x_new - run.x
        x_prev = run.x
        run.x = x_new
        rse = run.record(k, alpha, beta, run.now() - t0)
        run.k_done = k
        if rse <= cfg.rse_tolerance:
            return run.finish(x_prev, None, True, "rse")
    return run.finish(x_prev, None, False, "max_iters")


SOLVER_IDS = {
    "basic": solve_basic,
    "mbasic": solve_modified_basic,
    "ashbm": solve_ashbm,
    "scg": solve_scg,
    "cgne": solve_cgne,
    "mrabk": solve_mrabk,
}
