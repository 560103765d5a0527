"""Randomized Kaczmarz-type solvers with adaptive heavy-ball momentum,
a stochastic CG framework, sampling schemes, and convergence-bound tools."""

from .analysis import (
    BoundReport,
    ContractionVerdict,
    contraction_check,
    convergence_factor,
    rse,
    theoretical_bound,
)
from .linalg import (
    Matrix,
    SpectralSummary,
    matvec,
    matvec_transpose,
    min_norm_solution,
    spectral_quantities,
)
from .problems import (
    LinearSystem,
    attach_min_norm,
    generate_gaussian_problem,
    load_matrix_market,
)
from .sampling import (
    FixedIdentity,
    PartitionBlock,
    SampleOp,
    SingleRowWeighted,
    UniformBlock,
    apply_sample_transpose,
    build_partition,
    draw_sample,
    expected_gram,
    lambda_max_sup,
    parse_scheme,
    pullback,
)
from .solvers import (
    SolverConfig,
    SolverState,
    StepOutcome,
    Trace,
    TraceRecord,
    ashbm_parameters,
    basic_step,
    compute_tau,
    polyak_stepsize,
    solve_ashbm,
    solve_basic,
    solve_cgne,
    solve_modified_basic,
    solve_mrabk,
    solve_scg,
)

__version__ = "0.1.0"
