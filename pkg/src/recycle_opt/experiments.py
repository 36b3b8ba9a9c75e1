"""Budgeted sample-size experiments and supporting machinery.

The central question driven from here: under a fixed budget of T
stochastic steps, how does test error depend on the training-set size
m = c*T drawn from a large data pool?  `run_sweep` answers it by grid
search over (T, c, lambda[, stepsize]) with seeded repetitions;
`bound_curves` evaluates the heuristic error-decomposition bounds that
predict the shape of the answer; the synth generators provide desk-scale
datasets on which the qualitative phenomena are reproducible.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .core import Dataset, duality_gap, zero_one_error
from .sampling import IndexSampler, SamplerKind, SplitMix64, derive_seed
from .solvers import SDCASolver, SolverConfig, run_solver

# stepsize multipliers tried for SAG/SVRG, applied to the 1/(1/gamma + lam*m) scale
DEFAULT_STEPSIZE_MULTIPLIERS = tuple(10.0 ** (0.5 * k) for k in range(-6, 3))

# the c resolution used throughout: 0.025, 0.05, ..., 1.0
DEFAULT_C_GRID = tuple(round(0.025 * k, 6) for k in range(1, 41))

DEFAULT_LAMBDA_GRID = tuple(10.0 ** (-0.5 * k) for k in range(0, 13))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------------------
# certified reference optimum
# ---------------------------------------------------------------------------

@dataclass
class ReferenceOptimum:
    """A solution certified by its duality gap.

    The optimal primal value lies in [dual_value, dual_value + tol]; all
    suboptimalities in this package are measured against the upper end,
    `primal_estimate`, so dual suboptimalities stay non-negative and
    primal suboptimalities are never below -tol.
    """

    w: np.ndarray
    alpha: np.ndarray
    dual_value: float
    tol: float
    steps: int

    @property
    def lower(self):
        return self.dual_value

    @property
    def upper(self):
        return self.dual_value + self.tol

    @property
    def primal_estimate(self):
        return self.dual_value + self.tol


def reference_optimum(data, lam, tol, gamma=1.0, seed=0):
    """Run SDCA-IID until the duality gap certifies suboptimality <= tol.

    Raises RuntimeError if the gap has not closed within the iteration
    cap of 10^4 * (m + 1/lam) steps.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    m = len(data)
    solver = SDCASolver(data, lam, gamma)
    sampler = IndexSampler(SamplerKind.IID, m, derive_seed(seed, "reference"))
    cap = int(1e4 * (m + 1.0 / lam))
    steps = 0
    while True:
        gap = duality_gap(data, solver.w, solver.alpha, lam, gamma)
        if gap <= tol:
            break
        if steps >= cap:
            raise RuntimeError(
                "reference optimum: gap %.3g > tol %.3g after %d steps" % (gap, tol, steps)
            )
        for _ in range(m):
            solver.step(sampler.next_index())
        steps += m
    dual = solver.dual_value()
    return ReferenceOptimum(solver.final_w(), solver.alpha.copy(), dual, tol, steps)


# ---------------------------------------------------------------------------
# synthetic datasets
# ---------------------------------------------------------------------------

def synth_pathological(m, seed=0):
    """m points in dimension m+1 on which SDCA epochs visibly misbehave.

    Point i has value 1 at coordinate i and an independent random sign at
    the last coordinate; the label equals that sign.  Every point is
    trivially classified by the last coordinate alone, but the first
    coordinates let early dual updates overshoot.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    rng = SplitMix64(derive_seed(seed, "pathological"))
    signs = np.array([1.0 if rng.next_uint64() >> 63 else -1.0 for _ in range(m)])
    indptr = np.arange(0, 2 * m + 1, 2, dtype=np.int64)
    indices = np.empty(2 * m, dtype=np.int64)
    indices[0::2] = np.arange(m)
    indices[1::2] = m
    values = np.empty(2 * m)
    values[0::2] = 1.0
    values[1::2] = signs
    return Dataset.from_arrays(indptr, indices, values, signs, m + 1)


def synth_gaussian(n, d, margin_noise=0.0, seed=0, mean_norm=2.0):
    """Two spherical Gaussians with symmetric class means, rows capped to unit norm.

    x ~ N(y * mu, I) with ||mu|| = mean_norm, then x <- x / max(1, ||x||);
    labels flip with probability margin_noise afterwards.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if not 0.0 <= margin_noise < 1.0:
        raise ValueError("margin_noise must be in [0, 1)")
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    mu = np.full(d, mean_norm / math.sqrt(d))
    X = rng.standard_normal((n, d)) + y[:, None] * mu
    X /= np.maximum(1.0, np.linalg.norm(X, axis=1))[:, None]
    flip = rng.random(n) < margin_noise
    y = np.where(flip, -y, y)
    return Dataset.from_dense(X, y)


# ---------------------------------------------------------------------------
# budgeted (T, c, lambda) sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepConfig:
    """Grid specification for a budgeted sample-size sweep."""

    budgets: tuple
    c_grid: tuple
    lambda_grid: tuple
    repetitions: int = 50
    test_fraction: float = 0.3
    algorithm: str = "sdca"
    sampler: SamplerKind = SamplerKind.IID
    base_seed: int = 0
    stepsize_grid: tuple | None = None  # multipliers of 1/(1/gamma + lam*m)
    gamma: float = 1.0
    svrg_inner_multiplier: float = 2.0
    fixed_test_split: bool = False  # reuse repetition 0's split everywhere
    workers: int | None = None

    def __post_init__(self):
        self.budgets = tuple(int(t) for t in self.budgets)
        self.c_grid = tuple(float(c) for c in self.c_grid)
        self.lambda_grid = tuple(float(l) for l in self.lambda_grid)
        self.algorithm = str(self.algorithm).lower()
        self.sampler = SamplerKind.parse(self.sampler)
        if not self.budgets or not self.c_grid or not self.lambda_grid:
            raise ValueError("budgets, c_grid and lambda_grid must be non-empty")
        if any(t < 1 for t in self.budgets):
            raise ValueError("budgets must be positive")
        if any(not 0.0 < c <= 1.0 for c in self.c_grid):
            raise ValueError("c values must lie in (0, 1]")
        if any(not l > 0.0 for l in self.lambda_grid):
            raise ValueError("lambda values must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")
        if self.algorithm in ("sag", "svrg"):
            if self.stepsize_grid is None:
                self.stepsize_grid = DEFAULT_STEPSIZE_MULTIPLIERS
            self.stepsize_grid = tuple(float(s) for s in self.stepsize_grid)
            if any(not s > 0.0 for s in self.stepsize_grid):
                raise ValueError("stepsize multipliers must be positive")
        else:
            self.stepsize_grid = None

    def to_mapping(self):
        """Flat string mapping used by config files and manifests."""
        out = {
            "algorithm": self.algorithm,
            "sampler": self.sampler.value,
            "budgets": ",".join(str(t) for t in self.budgets),
            "c_grid": ",".join(repr(c) for c in self.c_grid),
            "lambda_grid": ",".join(repr(l) for l in self.lambda_grid),
            "repetitions": str(self.repetitions),
            "test_fraction": repr(self.test_fraction),
            "base_seed": str(self.base_seed),
            "gamma": repr(self.gamma),
            "svrg_inner_multiplier": repr(self.svrg_inner_multiplier),
            "fixed_test_split": str(self.fixed_test_split).lower(),
        }
        if self.stepsize_grid is not None:
            out["stepsize_grid"] = ",".join(repr(s) for s in self.stepsize_grid)
        return out

    @classmethod
    def from_mapping(cls, mapping):
        def split_floats(text):
            return tuple(float(tok) for tok in str(text).split(",") if tok.strip())

        known = {
            "budgets": lambda v: tuple(int(tok) for tok in str(v).split(",") if tok.strip()),
            "c_grid": split_floats,
            "lambda_grid": split_floats,
            "stepsize_grid": split_floats,
            "repetitions": int,
            "test_fraction": float,
            "base_seed": int,
            "gamma": float,
            "svrg_inner_multiplier": float,
            "workers": int,
            "fixed_test_split": lambda v: str(v).strip().lower() in ("1", "true", "yes"),
            "algorithm": str,
            "sampler": str,
        }
        kwargs = {}
        for key, raw in mapping.items():
            if key in ("data", "out_dir"):
                continue  # consumed by the CLI
            if key not in known:
                raise ValueError("unknown sweep config key %r" % key)
            kwargs[key] = known[key](raw)
        for required in ("budgets", "c_grid", "lambda_grid"):
            if required not in kwargs:
                raise ValueError("sweep config missing %r" % required)
        return cls(**kwargs)


@dataclass
class CellRecord:
    """One solver run inside a sweep (a single repetition of a cell)."""

    T: int
    c: float
    lam: float
    stepsize_mult: float | None
    stepsize: float | None
    rep: int
    seed: int
    n_train: int
    test_error: float


@dataclass
class SweepRow:
    """Best-lambda summary for one (T, c) cell; reps=0 marks N/A cells."""

    T: int
    c: float
    lam: float
    stepsize: float
    mean_test_error: float
    std_error: float
    reps: int


@dataclass
class OptimalRow:
    """Per-budget argmin over c, with the c=1 column for comparison."""

    T: int
    optimal_c: float
    error_at_optimal_c: float
    error_at_c1: float


@dataclass
class SweepResult:
    rows: list
    optimal: list
    runs: list = field(default_factory=list)
    config: SweepConfig | None = None


def _worker_count(config):
    env = os.environ.get("RECYCLE_OPT_THREADS")
    cap = int(env) if env else None
    workers = config.workers if config.workers else (cap or 1)
    if cap:
        workers = min(workers, cap)
    return max(1, workers)


def _split_indices(config, n, rep):
    split_rep = 0 if config.fixed_test_split else rep
    rng = SplitMix64(derive_seed(config.base_seed, "split", split_rep))
    perm = rng.permutation(n)
    n_test = _round_half_up(config.test_fraction * n)
    if not 0 < n_test < n:
        raise ValueError("degenerate test split")
    return np.array(perm[:n_test]), np.array(perm[n_test:])


def _sample_without_replacement(rng, items, k):
    """First k entries of a partial Fisher-Yates shuffle of items."""
    pool = list(items)
    n = len(pool)
    for i in range(k):
        j = i + rng.next_below(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def _stepsize_from_mult(mult, lam, n_train, gamma):
    if mult is None:
        return None
    return mult / (1.0 / gamma + lam * n_train)


def _cell_error(config, pool, train_pool_idx, test_data, T, c, lam, mult, cell_seed):
    """Run one cell repetition; everything derives from cell_seed."""
    n_train = _round_half_up(c * T)
    rng = SplitMix64(derive_seed(cell_seed, "subset"))
    chosen = _sample_without_replacement(rng, train_pool_idx, n_train)
    train = pool.subset(chosen)
    stepsize = _stepsize_from_mult(mult, lam, n_train, config.gamma)
    solver_config = SolverConfig(
        algorithm=config.algorithm,
        lam=lam,
        budget=T,
        seed=derive_seed(cell_seed, "solver"),
        sampler=config.sampler,
        stepsize=stepsize,
        svrg_inner_multiplier=config.svrg_inner_multiplier,
        gamma=config.gamma,
    )
    w, _ = run_solver(solver_config, train)
    return zero_one_error(w, test_data), n_train, stepsize


def _grid_cells(config):
    mults = config.stepsize_grid if config.stepsize_grid is not None else (None,)
    for ti, T in enumerate(config.budgets):
        for ci, c in enumerate(config.c_grid):
            if _round_half_up(c * T) < 1:
                continue
            for li, lam in enumerate(config.lambda_grid):
                for si, mult in enumerate(mults):
                    yield (ti, T, ci, c, li, lam, si, mult)


def _rep_records(config, pool, rep):
    test_idx, train_pool_idx = _split_indices(config, len(pool), rep)
    test_data = pool.subset(test_idx)
    records = []
    for ti, T, ci, c, li, lam, si, mult in _grid_cells(config):
        cell_seed = derive_seed(config.base_seed, "cell", ti, ci, li, si, rep)
        error, n_train, stepsize = _cell_error(
            config, pool, train_pool_idx, test_data, T, c, lam, mult, cell_seed
        )
        records.append(CellRecord(T, c, lam, mult, stepsize, rep, cell_seed, n_train, error))
    return records


_WORKER_STATE = {}


def _init_worker(config, pool):
    _WORKER_STATE["config"] = config
    _WORKER_STATE["pool"] = pool


def _worker_rep(rep):
    return _rep_records(_WORKER_STATE["config"], _WORKER_STATE["pool"], rep)


def run_sweep(config, pool):
    """Full grid sweep; deterministic given (config, pool).

    Per repetition: a seeded test split, then for every grid cell a fresh
    without-replacement draw of round(c*T) training rows, a budgeted
    solver run, and the zero-one error on the test split.  Cells with
    round(c*T) < 1 are reported as N/A rows.  Lambda (and stepsize, where
    applicable) is selected per (T, c) by minimal mean test error.
    """
    n = len(pool)
    n_test = _round_half_up(config.test_fraction * n)
    max_train = max(
        _round_half_up(c * T) for T in config.budgets for c in config.c_grid
    )
    if max_train > n - n_test:
        raise ValueError(
            "pool too small: need %d training rows, have %d after the test split"
            % (max_train, n - n_test)
        )

    workers = _worker_count(config)
    reps = range(config.repetitions)
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(config, pool)
        ) as pool_exec:
            per_rep = list(pool_exec.map(_worker_rep, reps))
    else:
        per_rep = [_rep_records(config, pool, rep) for rep in reps]
    runs = [record for records in per_rep for record in records]
    return _aggregate(config, runs)


def _aggregate(config, runs):
    by_key = {}
    for record in runs:
        by_key.setdefault(
            (record.T, record.c, record.lam, record.stepsize_mult), []
        ).append(record)

    mults = config.stepsize_grid if config.stepsize_grid is not None else (None,)
    rows = []
    for T in config.budgets:
        for c in config.c_grid:
            if _round_half_up(c * T) < 1:
                rows.append(SweepRow(T, c, math.nan, math.nan, math.nan, math.nan, 0))
                continue
            best = None
            for lam in config.lambda_grid:
                for mult in mults:
                    cell = by_key[(T, c, lam, mult)]
                    errors = np.array([r.test_error for r in cell])
                    mean = float(errors.mean())
                    std = float(errors.std(ddof=1)) if len(errors) > 1 else 0.0
                    se = std / math.sqrt(len(errors))
                    candidate = SweepRow(T, c, lam,
                                         cell[0].stepsize if mult is not None else math.nan,
                                         mean, se, len(errors))
                    if best is None or candidate.mean_test_error < best.mean_test_error:
                        best = candidate
            rows.append(best)

    optimal = []
    for T in config.budgets:
        live = [r for r in rows if r.T == T and r.reps > 0]
        if not live:
            continue
        best = min(live, key=lambda r: r.mean_test_error)
        at_c1 = next((r for r in live if r.c == 1.0), None)
        optimal.append(OptimalRow(
            T, best.c, best.mean_test_error,
            at_c1.mean_test_error if at_c1 is not None else math.nan,
        ))
    return SweepResult(rows=rows, optimal=optimal, runs=runs, config=config)


def rerun_cell(pool, config, record):
    """Re-run one recorded cell from its manifest seed; bit-exact."""
    if isinstance(config, dict):
        config = SweepConfig.from_mapping(config)
    test_idx, train_pool_idx = _split_indices(config, len(pool), record.rep)
    test_data = pool.subset(test_idx)
    error, _, _ = _cell_error(
        config, pool, train_pool_idx, test_data,
        record.T, record.c, record.lam, record.stepsize_mult, record.seed,
    )
    return error


# ---------------------------------------------------------------------------
# heuristic generalization-bound explorer
# ---------------------------------------------------------------------------

@dataclass
class BoundParams:
    """Inputs to the error-decomposition bounds.

    norm_w0 is the norm (not squared) of the reference predictor; risk_w0
    its expected loss, added as a constant offset.  `c` and `lam` are the
    point used by `bound_value`; curve evaluation sweeps c and optionally
    minimizes over lam.
    """

    norm_w0: float
    d: int
    T: int
    lam: float = 1e-3
    c: float = 1.0
    risk_w0: float = 0.0

    def __post_init__(self):
        if not (self.norm_w0 > 0 and self.d >= 1 and self.T >= 1):
            raise ValueError("norm_w0, d and T must be positive")
        if not (self.lam > 0 and 0 < self.c <= 1):
            raise ValueError("lam must be positive and c in (0, 1]")


@dataclass
class BoundCurve:
    mode: str
    lambda_policy: str
    c_values: np.ndarray
    values: np.ndarray
    lambdas: np.ndarray


def _bound_terms(mode, c, lam, params):
    if mode == "sgd":
        opt = 1.0 / (lam * params.T)
    else:
        opt = np.exp(-params.T / (1.0 / lam + c * params.T))
    norm = 0.5 * lam * params.norm_w0 ** 2
    est = np.sqrt(params.d / (c * params.T))
    return params.risk_w0 + opt + norm + est


def bound_value(params, mode):
    """The bound at a single (c, lam) point; mode is 'sgd' or 'rv'."""
    if mode not in ("sgd", "rv"):
        raise ValueError("mode must be 'sgd' or 'rv'")
    return float(_bound_terms(mode, params.c, params.lam, params))


def bound_curves(params, mode, lambda_policy="fixed", c_grid=None, lambda_grid=None):
    """Evaluate the bound across a c grid, with lam fixed or minimized per c.

    All big-O constants are taken as 1; the curves reproduce qualitative
    shape (where the argmin over c sits, how it moves with T), not
    calibrated error values.
    """
    if mode not in ("sgd", "rv"):
        raise ValueError("mode must be 'sgd' or 'rv'")
    if lambda_policy not in ("fixed", "minimized"):
        raise ValueError("lambda_policy must be 'fixed' or 'minimized'")
    c_values = np.asarray(DEFAULT_C_GRID if c_grid is None else c_grid, dtype=float)
    if lambda_policy == "fixed":
        values = np.array([_bound_terms(mode, c, params.lam, params) for c in c_values])
        lambdas = np.full_like(c_values, params.lam)
    else:
        lams = np.asarray(
            10.0 ** np.arange(-12.0, 2.0001, 0.05) if lambda_grid is None else lambda_grid,
            dtype=float,
        )
        values = np.empty_like(c_values)
        lambdas = np.empty_like(c_values)
        for k, c in enumerate(c_values):
            evals = _bound_terms(mode, c, lams, params)
            j = int(np.argmin(evals))
            values[k] = evals[j]
            lambdas[k] = lams[j]
    return BoundCurve(mode, lambda_policy, c_values, values, lambdas)
