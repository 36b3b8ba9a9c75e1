"""Variance-reduced stochastic solvers for smoothed-hinge SVMs, plus a
budgeted experiment harness for the sample-size-versus-iterations tradeoff."""

from .core import (
    Dataset,
    LabeledExample,
    LossModel,
    PrimalDualPoint,
    SparseVector,
    conjugate_term,
    dual_objective,
    dual_to_primal,
    duality_gap,
    loss_derivative,
    loss_value,
    primal_objective,
    primal_terms,
    zero_one_error,
)
from .sampling import IndexSampler, SamplerKind, SplitMix64, derive_seed, mix64
from .solvers import (
    SAGSolver,
    SDCASolver,
    SGDSolver,
    SVRGSolver,
    SolverConfig,
    TrajectoryRecord,
    run_solver,
)
from .experiments import (
    BoundCurve,
    BoundParams,
    ReferenceOptimum,
    SweepConfig,
    SweepResult,
    bound_curves,
    bound_value,
    reference_optimum,
    rerun_cell,
    run_sweep,
    synth_gaussian,
    synth_pathological,
)

__version__ = "0.1.0"
