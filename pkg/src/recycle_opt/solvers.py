"""Stochastic solvers for the regularized smoothed-hinge objective.

Four single-step update rules over a shared sparse-row data layout:

* SGD   -- primal subgradient steps with the 1/(lam*(t+1)) schedule,
           the iterate kept as scale * v so each step touches O(nnz).
* SDCA  -- exact coordinate maximization of the dual; maintains the
           primal-dual link w = w(alpha) incrementally.
* SAG   -- one cached loss-gradient slot per example plus their running
           sum; steps along the average of the cached slots.
* SVRG  -- periodic full-gradient snapshots; inner steps correct the
           stochastic gradient with the snapshot difference.

`run_solver` drives any of them for an exact budget of stochastic steps,
recording primal/dual diagnostics along the way.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import dual_objective, primal_terms
from .sampling import IndexSampler, SamplerKind, SplitMix64, derive_seed

ALGORITHMS = ("sgd", "sdca", "sag", "svrg")


@dataclass
class SolverConfig:
    """Algorithm choice plus everything needed to reproduce a run."""

    algorithm: str
    lam: float
    budget: int
    seed: int = 0
    sampler: SamplerKind = SamplerKind.IID
    stepsize: float | None = None
    svrg_inner_multiplier: float = 2.0
    gamma: float = 1.0
    averaging: bool = False  # SGD tail averaging; off by default

    def __post_init__(self):
        self.algorithm = str(self.algorithm).lower()
        if self.algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm %r" % (self.algorithm,))
        if not self.lam > 0.0:
            raise ValueError("lam must be positive")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        self.sampler = SamplerKind.parse(self.sampler)
        needs_step = self.algorithm in ("sag", "svrg")
        if needs_step and (self.stepsize is None or not self.stepsize > 0.0):
            raise ValueError("%s requires a positive stepsize" % self.algorithm)
        if not needs_step and self.stepsize is not None:
            raise ValueError("stepsize is only meaningful for sag/svrg")


def _loss_deriv_scalar(a, gamma):
    if a >= 1.0:
        return 0.0
    if a <= 1.0 - gamma:
        return -1.0
    return (a - 1.0) / gamma


class SGDSolver:
    """Pegasos-style primal SGD; final iterate by default."""

    def __init__(self, data, lam, gamma=1.0, averaging=False):
        self.data = data
        self.lam = lam
        self.gamma = gamma
        self.averaging = averaging
        self.v = np.zeros(data.dim)
        self.scale = 1.0
        self.t = 0
        self._wsum = np.zeros(data.dim) if averaging else None

    @property
    def w(self):
        return self.scale * self.v

    def step(self, i):
        """w <- (1 - eta*lam) w - eta * loss'(y<w,x>) y x with eta = 1/(lam (t+1))."""
        data = self.data
        s, e = data.indptr[i], data.indptr[i + 1]
        sl = data.indices[s:e]
        vl = data.values[s:e]
        y = data.labels[i]
        a = y * self.scale * np.dot(self.v[sl], vl)
        g = _loss_deriv_scalar(a, self.gamma)
        t = self.t
        eta = 1.0 / (self.lam * (t + 1))
        shrink = t / (t + 1.0)  # = 1 - eta*lam
        if shrink == 0.0:
            self.scale = 1.0
            self.v[:] = 0.0
        else:
            self.scale *= shrink
        if g != 0.0:
            self.v[sl] -= (eta * g * y / self.scale) * vl
        self.t = t + 1
        if self.averaging:
            self._wsum += self.w

    def final_w(self):
        if self.averaging and self.t > 0:
            return self._wsum / self.t
        return self.w


class SDCASolver:
    """Stochastic dual coordinate ascent with exact coordinate updates."""

    def __init__(self, data, lam, gamma=1.0):
        self.data = data
        self.lam = lam
        self.gamma = gamma
        self.alpha = np.zeros(len(data))
        self.w = np.zeros(data.dim)
        self.t = 0
        self._inv_lm = 1.0 / (lam * len(data))
        self._norms = data.row_norms_sq

    def step(self, i):
        """Maximize the dual over coordinate i in closed form.

        With margin a = y_i <w, x_i> and curvature q = ||x_i||^2/(lam m) + gamma,
        the maximizer is delta = clamp((1 - a - gamma*alpha_i)/q, -alpha_i,
        1 - alpha_i); both alpha_i and the linked w move by delta.
        """
        data = self.data
        s, e = data.indptr[i], data.indptr[i + 1]
        sl = data.indices[s:e]
        vl = data.values[s:e]
        y = data.labels[i]
        w = self.w
        a = y * np.dot(w[sl], vl)
        ai = self.alpha[i]
        q = self._norms[i] * self._inv_lm + self.gamma
        delta = (1.0 - a - self.gamma * ai) / q
        if delta < -ai:
            delta = -ai
        elif delta > 1.0 - ai:
            delta = 1.0 - ai
        if delta != 0.0:
            self.alpha[i] = ai + delta
            w[sl] += (delta * y * self._inv_lm) * vl
        self.t += 1

    def final_w(self):
        return self.w.copy()

    def dual_value(self):
        return dual_objective(self.data, self.alpha, self.lam, self.gamma)


class SAGSolver:
    """Stochastic average gradient with one cached slot per example.

    Slot i stores the scalar loss'(y_i <w, x_i>) * y_i, which determines
    the cached sparse gradient slot_i * x_i; `grad_sum` keeps their exact
    running sum, refreshed incrementally.
    """

    def __init__(self, data, lam, stepsize, gamma=1.0):
        self.data = data
        self.lam = lam
        self.eta = stepsize
        self.gamma = gamma
        self.grad_coef = np.zeros(len(data))
        self.grad_sum = np.zeros(data.dim)
        self.w = np.zeros(data.dim)
        self.t = 0

    def step(self, i):
        """Refresh slot i, then w <- w - eta ((1/m) grad_sum + lam w)."""
        data = self.data
        s, e = data.indptr[i], data.indptr[i + 1]
        sl = data.indices[s:e]
        vl = data.values[s:e]
        y = data.labels[i]
        w = self.w
        a = y * np.dot(w[sl], vl)
        gnew = _loss_deriv_scalar(a, self.gamma) * y
        dg = gnew - self.grad_coef[i]
        if dg != 0.0:
            self.grad_sum[sl] += dg * vl
            self.grad_coef[i] = gnew
        w *= 1.0 - self.eta * self.lam
        w -= (self.eta / len(data)) * self.grad_sum
        self.t += 1

    def final_w(self):
        return self.w.copy()


class SVRGSolver:
    """Variance reduction via periodic full-gradient snapshots."""

    def __init__(self, data, lam, stepsize, gamma=1.0, inner_multiplier=2.0):
        self.data = data
        self.lam = lam
        self.eta = stepsize
        self.gamma = gamma
        self.inner_length = max(1, int(math.floor(inner_multiplier * len(data) + 0.5)))
        self.w = np.zeros(data.dim)
        self.snapshot_w = None
        self.full_grad = None
        self.deriv_snapshot = None
        self.inner_count = 0
        self.t = 0
        self.snapshot_passes = 0
        self._shift = None  # eta * (full_grad - lam * snapshot_w), fixed per snapshot

    def snapshot(self):
        """Recompute the full gradient at the current iterate."""
        data = self.data
        margins = data.margins(self.w)
        derivs = np.where(margins >= 1.0, 0.0,
                          np.where(margins <= 1.0 - self.gamma, -1.0,
                                   (margins - 1.0) / self.gamma))
        mu = data.matrix.T @ (derivs * data.labels) / len(data) + self.lam * self.w
        self.snapshot_w = self.w.copy()
        self.full_grad = mu
        self.deriv_snapshot = derivs
        self.inner_count = 0
        self.snapshot_passes += 1
        self._shift = self.eta * (mu - self.lam * self.snapshot_w)

    def initialize(self, order):
        """One pass of SGD over the given index order, then a first snapshot."""
        warm = SGDSolver(self.data, self.lam, self.gamma)
        for i in order:
            warm.step(i)
        self.w = warm.w
        self.snapshot()

    def step(self, i):
        """Inner step along the variance-corrected gradient.

        g = (loss'(y<w,x>) - loss'(y<w~,x>)) y x + lam w - lam w~ + mu.
        """
        if self.snapshot_w is None:
            raise RuntimeError("svrg step requires a snapshot; call snapshot() first")
        data = self.data
        s, e = data.indptr[i], data.indptr[i + 1]
        sl = data.indices[s:e]
        vl = data.values[s:e]
        y = data.labels[i]
        w = self.w
        a = y * np.dot(w[sl], vl)
        dg = _loss_deriv_scalar(a, self.gamma) - self.deriv_snapshot[i]
        w *= 1.0 - self.eta * self.lam
        w -= self._shift
        if dg != 0.0:
            w[sl] -= (self.eta * dg * y) * vl
        self.inner_count += 1
        self.t += 1

    def final_w(self):
        return self.w.copy()


def make_solver(config, data):
    algo = config.algorithm
    if algo == "sgd":
        return SGDSolver(data, config.lam, config.gamma, config.averaging)
    if algo == "sdca":
        return SDCASolver(data, config.lam, config.gamma)
    if algo == "sag":
        return SAGSolver(data, config.lam, config.stepsize, config.gamma)
    return SVRGSolver(data, config.lam, config.stepsize, config.gamma,
                      config.svrg_inner_multiplier)


@dataclass
class TrajectoryRecord:
    """Diagnostics sampled along one solver run.

    Suboptimalities are measured against a certified reference when one is
    supplied (NaN otherwise); the duality gap and the dual suboptimality
    are NaN for solvers that keep no dual variables.  `alpha_snapshots`
    holds (epoch, alpha-copy) pairs at epoch boundaries for SDCA.
    """

    t: np.ndarray
    epoch: np.ndarray
    primal_subopt: np.ndarray
    dual_subopt: np.ndarray
    gap: np.ndarray
    loss_term: np.ndarray
    norm_term: np.ndarray
    alpha_snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)


def _record_points(budget, m, record_every):
    if record_every is None:
        return set()
    if record_every < 1:
        raise ValueError("record_every must be a positive integer")
    points = {0, budget}
    points.update(range(0, budget + 1, record_every))
    for boundary in range(m, budget + 1, m):
        points.update((boundary - 1, boundary, boundary + 1))
    return {p for p in points if 0 <= p <= budget}


def run_solver(config, data, record_every=None, reference=None):
    """Run for exactly `config.budget` stochastic steps, recording metrics.

    With a positive record_every, records at t=0, at multiples of
    record_every, at every epoch boundary +/- 1 step, and at the final
    step; record_every=None disables recording entirely (the lean path
    used by sweeps).  For SVRG the budget counts inner steps only: the
    one-pass SGD initialization and the snapshot passes are extra work,
    reported in `meta`.

    Returns (final w, TrajectoryRecord).
    """
    m = len(data)
    sampler = IndexSampler(config.sampler, m, derive_seed(config.seed, "sampler"))
    solver = make_solver(config, data)
    budget = config.budget

    is_svrg = config.algorithm == "svrg"
    is_sdca = config.algorithm == "sdca"
    if is_svrg:
        init_rng = SplitMix64(derive_seed(config.seed, "svrg-init"))
        solver.initialize(init_rng.permutation(m))

    points = _record_points(budget, m, record_every)
    p_star = reference.primal_estimate if reference is not None else None

    rows = []
    alpha_snaps = []

    def record(t):
        loss, norm = primal_terms(data, solver.w, config.lam, config.gamma)
        primal = loss + norm
        if is_sdca:
            dual = solver.dual_value()
            gap = primal - dual
            dsub = p_star - dual if p_star is not None else math.nan
        else:
            gap = math.nan
            dsub = math.nan
        psub = primal - p_star if p_star is not None else math.nan
        rows.append((t, t // m, psub, dsub, gap, loss, norm))
        if is_sdca and t and t % m == 0:
            alpha_snaps.append((t // m, solver.alpha.copy()))

    if 0 in points:
        record(0)
    nxt = sampler.next_index
    step = solver.step
    if is_svrg:
        inner_length = solver.inner_length
        for t in range(1, budget + 1):
            if solver.inner_count >= inner_length:
                solver.snapshot()
            step(nxt())
            if t in points:
                record(t)
    else:
        for t in range(1, budget + 1):
            step(nxt())
            if t in points:
                record(t)

    cols = list(zip(*rows)) if rows else [[]] * 7
    trajectory = TrajectoryRecord(
        t=np.array(cols[0], dtype=np.int64),
        epoch=np.array(cols[1], dtype=np.int64),
        primal_subopt=np.array(cols[2], dtype=np.float64),
        dual_subopt=np.array(cols[3], dtype=np.float64),
        gap=np.array(cols[4], dtype=np.float64),
        loss_term=np.array(cols[5], dtype=np.float64),
        norm_term=np.array(cols[6], dtype=np.float64),
        alpha_snapshots=alpha_snaps,
        meta={
            "algorithm": config.algorithm,
            "sampler": config.sampler.value,
            "lam": config.lam,
            "budget": budget,
            "m": m,
            "sampler_draws": sampler.count,
            "init_steps": m if is_svrg else 0,
            "snapshot_passes": solver.snapshot_passes if is_svrg else 0,
        },
    )
    return solver.final_w(), trajectory
