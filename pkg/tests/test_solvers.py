import numpy as np
import pytest

from recycle_opt.core import (
    Dataset,
    LabeledExample,
    SparseVector,
    conjugate_term,
    dual_objective,
    dual_to_primal,
    duality_gap,
    loss_derivative,
    primal_objective,
)
from recycle_opt.experiments import reference_optimum, synth_gaussian
from recycle_opt.sampling import IndexSampler, derive_seed
from recycle_opt.solvers import (
    SAGSolver,
    SDCASolver,
    SGDSolver,
    SVRGSolver,
    SolverConfig,
    make_solver,
    run_solver,
)


def single_example_data():
    return Dataset([LabeledExample(SparseVector([(0, 1.0)], 1), 1)])


def random_dataset(rng, m, d):
    X = rng.normal(size=(m, d))
    X /= np.maximum(1.0, np.linalg.norm(X, axis=1))[:, None]
    y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    return Dataset.from_dense(X, y)


def full_gradient(data, w, lam, gamma=1.0):
    # brute-force loop, independent of any solver code
    g = lam * np.asarray(w, dtype=float).copy()
    for i in range(len(data)):
        ex = data[i]
        margin = ex.y * ex.x.dot(w)
        coef = loss_derivative(margin, gamma) * ex.y / len(data)
        g[ex.x.indices] += coef * ex.x.values
    return g


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_solver_config_validation():
    SolverConfig("sdca", 0.1, 10)
    with pytest.raises(ValueError):
        SolverConfig("nope", 0.1, 10)
    with pytest.raises(ValueError):
        SolverConfig("sdca", -1.0, 10)
    with pytest.raises(ValueError):
        SolverConfig("sag", 0.1, 10)  # missing stepsize
    with pytest.raises(ValueError):
        SolverConfig("sgd", 0.1, 10, stepsize=0.5)  # stepsize meaningless
    cfg = SolverConfig("svrg", 0.1, 10, stepsize=0.5, sampler="perm")
    assert cfg.sampler.value == "perm"


# ---------------------------------------------------------------------------
# SGD
# ---------------------------------------------------------------------------

def test_sgd_first_step_hand_value():
    data = single_example_data()
    solver = SGDSolver(data, lam=1.0)
    solver.step(0)
    assert solver.w == pytest.approx(np.array([1.0]))


def test_sgd_zero_gradient_keeps_zero():
    # empty feature row: no loss gradient ever, so w never leaves 0
    data = Dataset([LabeledExample(SparseVector([], 1), 1)])
    solver = SGDSolver(data, lam=1.0)
    for _ in range(5):
        solver.step(0)
    assert np.array_equal(solver.w, np.zeros(1))


def test_sgd_flat_margin_only_shrinks():
    data = Dataset([LabeledExample(SparseVector([(0, 1.0)], 1), 1)])
    solver = SGDSolver(data, lam=1.0)
    solver.step(0)  # w = 1, margin 1 => flat region
    w_before = solver.w
    solver.step(0)
    assert solver.w == pytest.approx(w_before * (1.0 / 2.0))  # only the shrink acts


def test_sgd_step_stays_in_span():
    rng = np.random.default_rng(1)
    data = random_dataset(rng, 6, 5)
    solver = SGDSolver(data, lam=0.5)
    for i in (2, 4, 1):
        solver.step(i)
    w_old = solver.w
    i = 3
    solver.step(i)
    x = data[i].x.to_dense()
    basis = np.stack([w_old, x])
    # residual of w_new after projecting onto span{w_old, x}
    coeffs, *_ = np.linalg.lstsq(basis.T, solver.w, rcond=None)
    residual = solver.w - basis.T @ coeffs
    assert np.linalg.norm(residual) < 1e-12


def test_sgd_averaging_returns_mean_iterate():
    rng = np.random.default_rng(2)
    data = random_dataset(rng, 5, 3)
    solver = SGDSolver(data, lam=0.3, averaging=True)
    iterates = []
    for i in [0, 1, 2, 3, 4, 0, 1]:
        solver.step(i)
        iterates.append(solver.w)
    assert solver.final_w() == pytest.approx(np.mean(iterates, axis=0))


def test_sgd_rate_trend():
    # median suboptimality at 2T should be at most 0.7x the one at T
    lam = 0.01
    data = synth_gaussian(200, 5, margin_noise=0.1, seed=3)
    ref = reference_optimum(data, lam, 1e-10, seed=44)
    T = 2000  # >= 10 / lam
    med = {}
    for budget in (T, 2 * T):
        subs = []
        for seed in range(31):
            cfg = SolverConfig("sgd", lam, budget, seed=seed)
            w, _ = run_solver(cfg, data)
            subs.append(primal_objective(data, w, lam) - ref.primal_estimate)
        med[budget] = float(np.median(subs))
    assert med[2 * T] <= 0.7 * med[T]


# ---------------------------------------------------------------------------
# SDCA
# ---------------------------------------------------------------------------

def test_sdca_single_example_closed_form():
    data = single_example_data()
    solver = SDCASolver(data, lam=1.0)
    solver.step(0)
    assert solver.alpha[0] == pytest.approx(0.5)
    assert solver.w[0] == pytest.approx(0.5)
    assert duality_gap(data, solver.w, solver.alpha, 1.0) <= 1e-15


def test_sdca_fixed_point():
    data = single_example_data()
    solver = SDCASolver(data, lam=1.0)
    solver.step(0)
    w_before, a_before = solver.w.copy(), solver.alpha.copy()
    solver.step(0)
    assert np.array_equal(solver.w, w_before)
    assert np.array_equal(solver.alpha, a_before)


def test_sdca_update_matches_grid_search_oracle():
    # brute-force maximization of the dual restricted to one coordinate,
    # built from dual-objective pieces only (conjugate terms + norm algebra)
    rng = np.random.default_rng(5)
    for trial in range(8):
        m, d = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        data = random_dataset(rng, m, d)
        lam = float(rng.uniform(0.05, 1.0))
        solver = SDCASolver(data, lam)
        for i in rng.integers(0, m, size=12):
            solver.step(int(i))
        i = int(rng.integers(0, m))
        alpha = solver.alpha.copy()
        w = dual_to_primal(data, alpha, lam)
        x = data[i].x.to_dense()
        u = data.labels[i] * x / (lam * m)
        deltas = np.linspace(-alpha[i], 1.0 - alpha[i], 1_000_001)
        payoff = (np.sum(conjugate_term(np.delete(alpha, i)))
                  + conjugate_term(alpha[i] + deltas)) / m
        norm_sq = (np.dot(w, w) + 2.0 * deltas * np.dot(w, u)
                   + deltas ** 2 * np.dot(u, u))
        dual_vals = payoff - 0.5 * lam * norm_sq
        delta_grid = float(deltas[np.argmax(dual_vals)])
        solver.step(i)
        delta_solver = solver.alpha[i] - alpha[i]
        assert abs(delta_solver - delta_grid) <= 2e-6


def test_sdca_dual_monotone_all_samplers():
    rng = np.random.default_rng(6)
    data = random_dataset(rng, 40, 4)
    lam = 0.05
    for kind in ("iid", "perm", "cyclic"):
        solver = SDCASolver(data, lam)
        sampler = IndexSampler(kind, len(data), seed=9)
        previous = dual_objective(data, solver.alpha, lam)
        for _ in range(5 * len(data)):
            solver.step(sampler.next_index())
            assert np.all(solver.alpha >= 0.0) and np.all(solver.alpha <= 1.0)
            current = dual_objective(data, solver.alpha, lam)
            assert current >= previous - 1e-12
            previous = current


def test_sdca_representation_after_many_steps():
    rng = np.random.default_rng(7)
    data = random_dataset(rng, 50, 6)
    lam = 0.02
    solver = SDCASolver(data, lam)
    sampler = IndexSampler("iid", len(data), seed=10)
    for _ in range(100_000):
        solver.step(sampler.next_index())
    rebuilt = dual_to_primal(data, solver.alpha, lam)
    assert np.linalg.norm(solver.w - rebuilt) <= 1e-8 * max(1.0, np.linalg.norm(rebuilt))


# ---------------------------------------------------------------------------
# SAG
# ---------------------------------------------------------------------------

def test_sag_zero_slots_zero_w_stays_zero():
    # an empty feature row leaves both the cache and w untouched
    data = Dataset([
        LabeledExample(SparseVector([], 2), 1),
        LabeledExample(SparseVector([(0, 1.0)], 2), -1),
    ])
    solver = SAGSolver(data, lam=0.1, stepsize=0.5)
    solver.step(0)
    assert np.array_equal(solver.w, np.zeros(2))
    assert np.array_equal(solver.grad_sum, np.zeros(2))


def test_sag_m1_matches_full_gradient_descent():
    data = single_example_data()
    eta, lam = 0.3, 0.2
    solver = SAGSolver(data, lam, eta)
    solver.step(0)
    w1 = solver.w.copy()
    # after the first visit the cached average is the full gradient
    manual = np.zeros(1)
    g = full_gradient(data, manual, lam)
    # SAG refreshes the slot first, so step 1 already uses the true gradient
    expected = manual - eta * g
    assert w1 == pytest.approx(expected)
    solver.step(0)
    expected = expected - eta * full_gradient(data, expected, lam)
    assert solver.w == pytest.approx(expected)


def test_sag_running_sum_matches_recompute():
    rng = np.random.default_rng(8)
    data = random_dataset(rng, 30, 5)
    solver = SAGSolver(data, lam=0.05, stepsize=0.1)
    sampler = IndexSampler("iid", len(data), seed=12)
    for _ in range(10_000):
        solver.step(sampler.next_index())
    recomputed = np.zeros(data.dim)
    for i in range(len(data)):
        ex = data[i]
        recomputed[ex.x.indices] += solver.grad_coef[i] * ex.x.values
    assert np.linalg.norm(solver.grad_sum - recomputed) <= 1e-10


# ---------------------------------------------------------------------------
# SVRG
# ---------------------------------------------------------------------------

def test_svrg_snapshot_gradient_matches_brute_force():
    rng = np.random.default_rng(9)
    data = random_dataset(rng, 12, 4)
    solver = SVRGSolver(data, lam=0.1, stepsize=0.05)
    solver.w = rng.normal(size=data.dim)
    solver.snapshot()
    brute = full_gradient(data, solver.snapshot_w, 0.1)
    assert np.linalg.norm(solver.full_grad - brute) <= 1e-12


def test_svrg_full_grad_zero_at_exact_optimum():
    data = single_example_data()
    solver = SVRGSolver(data, lam=1.0, stepsize=0.1)
    solver.w = np.array([0.5])  # exact optimum of the m=1 instance
    solver.snapshot()
    assert np.linalg.norm(solver.full_grad) <= 1e-8


def test_svrg_full_grad_zero_on_paired_data():
    x = SparseVector([(0, 0.7), (1, -0.2)], 2)
    x_neg = SparseVector([(0, -0.7), (1, 0.2)], 2)
    data = Dataset([LabeledExample(x, 1), LabeledExample(x_neg, 1)])
    solver = SVRGSolver(data, lam=0.3, stepsize=0.1)
    solver.snapshot()  # at w = 0 the paired gradients cancel
    assert np.linalg.norm(solver.full_grad) == 0.0


def test_svrg_inner_step_at_snapshot_is_full_gradient_step():
    rng = np.random.default_rng(10)
    data = random_dataset(rng, 8, 3)
    eta = 0.07
    solver = SVRGSolver(data, lam=0.2, stepsize=eta)
    solver.w = rng.normal(size=data.dim)
    solver.snapshot()
    w_before = solver.w.copy()
    solver.step(5)
    expected = w_before - eta * full_gradient(data, w_before, 0.2)
    assert solver.w == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_svrg_fixed_point_at_optimum():
    data = single_example_data()
    solver = SVRGSolver(data, lam=1.0, stepsize=0.25)
    solver.w = np.array([0.5])
    solver.snapshot()
    solver.step(0)
    assert abs(solver.w[0] - 0.5) <= 1e-12


def test_svrg_unbiasedness_exhaustive():
    rng = np.random.default_rng(11)
    data = random_dataset(rng, 5, 3)
    lam = 0.15
    solver = SVRGSolver(data, lam, stepsize=0.1)
    solver.w = rng.normal(size=data.dim)
    solver.snapshot()
    for _ in range(3):
        w = rng.normal(size=data.dim)
        # average the correction direction over all i at fixed w
        total = np.zeros(data.dim)
        for i in range(len(data)):
            ex = data[i]
            margin = ex.y * ex.x.dot(w)
            snap_margin = ex.y * ex.x.dot(solver.snapshot_w)
            g = np.zeros(data.dim)
            g[ex.x.indices] += (
                (loss_derivative(margin) - loss_derivative(snap_margin)) * ex.y
            ) * ex.x.values
            g += lam * w - lam * solver.snapshot_w + solver.full_grad
            total += g
        mean_direction = total / len(data)
        assert mean_direction == pytest.approx(full_gradient(data, w, lam), rel=1e-12, abs=1e-13)


def test_svrg_requires_snapshot():
    data = single_example_data()
    solver = SVRGSolver(data, lam=1.0, stepsize=0.1)
    with pytest.raises(RuntimeError):
        solver.step(0)


# ---------------------------------------------------------------------------
# run_solver
# ---------------------------------------------------------------------------

def test_run_solver_budget_exactness():
    rng = np.random.default_rng(12)
    data = random_dataset(rng, 9, 3)
    for algo, step in (("sgd", None), ("sdca", None), ("sag", 0.1), ("svrg", 0.1)):
        cfg = SolverConfig(algo, 0.1, budget=47, seed=5, stepsize=step)
        _, record = run_solver(cfg, data, record_every=10)
        assert record.meta["sampler_draws"] == 47


def test_run_solver_zero_budget_records_initial_state():
    data = single_example_data()
    ref = reference_optimum(data, 1.0, 1e-12)
    cfg = SolverConfig("sdca", 1.0, budget=0, seed=1)
    w, record = run_solver(cfg, data, record_every=1, reference=ref)
    assert len(record) == 1 and record.t[0] == 0
    assert record.primal_subopt[0] >= 0.0
    assert record.primal_subopt[0] == pytest.approx(0.25, abs=1e-9)


def test_run_solver_sdca_m1_one_step_gap():
    data = single_example_data()
    cfg = SolverConfig("sdca", 1.0, budget=1, seed=2)
    _, record = run_solver(cfg, data, record_every=1)
    assert record.gap[-1] < 1e-12


def test_run_solver_sdca_dual_values_non_decreasing():
    rng = np.random.default_rng(13)
    data = random_dataset(rng, 20, 4)
    ref = reference_optimum(data, 0.1, 1e-10)
    cfg = SolverConfig("sdca", 0.1, budget=200, seed=3)
    _, record = run_solver(cfg, data, record_every=1, reference=ref)
    assert np.all(np.diff(record.dual_subopt) <= 1e-12)


def test_run_solver_records_epoch_boundaries():
    rng = np.random.default_rng(14)
    data = random_dataset(rng, 10, 3)
    cfg = SolverConfig("sdca", 0.1, budget=35, seed=4)
    _, record = run_solver(cfg, data, record_every=1000)
    ts = set(record.t.tolist())
    for boundary in (9, 10, 11, 19, 20, 21, 29, 30, 31):
        assert boundary in ts
    assert 0 in ts and 35 in ts


def test_run_solver_gap_identity_with_reference():
    rng = np.random.default_rng(15)
    data = random_dataset(rng, 15, 4)
    ref = reference_optimum(data, 0.2, 1e-10)
    cfg = SolverConfig("sdca", 0.2, budget=60, seed=6)
    _, record = run_solver(cfg, data, record_every=7, reference=ref)
    assert np.all(np.abs(record.primal_subopt + record.dual_subopt - record.gap) <= 1e-12)


def test_run_solver_alpha_snapshots_every_epoch():
    rng = np.random.default_rng(16)
    data = random_dataset(rng, 8, 3)
    cfg = SolverConfig("sdca", 0.1, budget=27, seed=7)
    _, record = run_solver(cfg, data, record_every=5)
    epochs = [e for e, _ in record.alpha_snapshots]
    assert epochs == [1, 2, 3]
    assert all(saved.shape == (8,) for _, saved in record.alpha_snapshots)


def test_run_solver_svrg_budget_and_snapshots():
    rng = np.random.default_rng(17)
    data = random_dataset(rng, 10, 3)
    cfg = SolverConfig("svrg", 0.1, budget=65, seed=8, stepsize=0.05)
    _, record = run_solver(cfg, data, record_every=20)
    # inner length is 2m = 20: snapshots at init and after 20, 40, 60 inner steps
    assert record.meta["sampler_draws"] == 65
    assert record.meta["init_steps"] == 10
    assert record.meta["snapshot_passes"] == 4


def test_run_solver_without_reference_has_nan_subopts():
    data = single_example_data()
    cfg = SolverConfig("sgd", 1.0, budget=3, seed=9)
    _, record = run_solver(cfg, data, record_every=1)
    assert np.all(np.isnan(record.primal_subopt))
    assert np.all(np.isnan(record.gap))
    assert np.all(np.isfinite(record.loss_term))


def test_make_solver_dispatch():
    data = single_example_data()
    assert isinstance(make_solver(SolverConfig("sgd", 0.1, 1), data), SGDSolver)
    assert isinstance(make_solver(SolverConfig("sdca", 0.1, 1), data), SDCASolver)
    assert isinstance(make_solver(SolverConfig("sag", 0.1, 1, stepsize=0.1), data), SAGSolver)
    assert isinstance(make_solver(SolverConfig("svrg", 0.1, 1, stepsize=0.1), data), SVRGSolver)
