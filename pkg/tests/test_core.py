import numpy as np
import pytest

from recycle_opt.core import (
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


def single_example_data():
    return Dataset([LabeledExample(SparseVector([(0, 1.0)], 1), 1)])


def random_dataset(rng, m, d):
    X = rng.normal(size=(m, d))
    X[rng.random(size=(m, d)) < 0.3] = 0.0
    X[:, 0] += 0.01  # keep at least most rows non-empty
    y = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    return Dataset.from_dense(X, y)


# ---------------------------------------------------------------------------
# loss pieces
# ---------------------------------------------------------------------------

def test_loss_value_piecewise():
    assert loss_value(1.5) == 0.0
    assert loss_value(0.5) == 0.125
    assert loss_value(-0.5) == 1.0


def test_loss_derivative_piecewise():
    assert loss_derivative(2.0) == 0.0
    assert loss_derivative(0.5) == -0.5
    assert loss_derivative(-3.0) == -1.0


@pytest.mark.parametrize("gamma", [0.25, 0.5, 1.0, 2.0])
def test_loss_continuous_at_knots(gamma):
    eps = 1e-12
    for knot in (1.0, 1.0 - gamma):
        lo = loss_value(knot - eps, gamma)
        hi = loss_value(knot + eps, gamma)
        assert abs(lo - hi) < 1e-10
        dlo = loss_derivative(knot - eps, gamma)
        dhi = loss_derivative(knot + eps, gamma)
        assert abs(dlo - dhi) < 1e-10


def test_loss_gradient_check():
    # central differences against the analytic derivative; the difference
    # quotient straddling a knot of the piecewise definition carries an
    # O(h) error, so the grid skips the two knots themselves
    h = 1e-5
    for a in np.linspace(-3.0, 3.0, 601):
        if min(abs(a - 1.0), abs(a - 0.0)) <= 2 * h:
            continue
        numeric = (loss_value(a + h) - loss_value(a - h)) / (2.0 * h)
        assert abs(loss_derivative(a) - numeric) <= 1e-6


def test_loss_lipschitz_and_smooth():
    rng = np.random.default_rng(7)
    for gamma in (0.5, 1.0):
        a = rng.uniform(-4, 4, size=10_000)
        b = rng.uniform(-4, 4, size=10_000)
        assert np.all(np.abs(loss_value(a, gamma) - loss_value(b, gamma))
                      <= np.abs(a - b) + 1e-12)
        assert np.all(np.abs(loss_derivative(a, gamma) - loss_derivative(b, gamma))
                      <= np.abs(a - b) / gamma + 1e-12)


def test_loss_convex_midpoint():
    rng = np.random.default_rng(8)
    a = rng.uniform(-4, 4, size=10_000)
    b = rng.uniform(-4, 4, size=10_000)
    mid = loss_value((a + b) / 2.0)
    assert np.all(mid <= (loss_value(a) + loss_value(b)) / 2.0 + 1e-12)


def test_conjugate_term_values():
    assert conjugate_term(0.0) == 0.0
    assert conjugate_term(1.0) == 0.5
    assert conjugate_term(0.5) == 0.375


def test_conjugate_term_rejects_out_of_range():
    with pytest.raises(ValueError):
        conjugate_term(-0.1)
    with pytest.raises(ValueError):
        conjugate_term(1.1)
    with pytest.raises(ValueError):
        conjugate_term(np.array([0.2, 1.5]))


def test_fenchel_young():
    # loss(a) >= conjugate_term(alpha) - a*alpha, equality at alpha = -loss'(a)
    rng = np.random.default_rng(9)
    for _ in range(2000):
        a = rng.uniform(-4, 4)
        alpha = rng.uniform(0, 1)
        assert loss_value(a) >= conjugate_term(alpha) - a * alpha - 1e-12
    for a in np.linspace(-3, 3, 121):
        alpha = -loss_derivative(a)
        lhs = loss_value(a)
        rhs = conjugate_term(alpha) - a * alpha
        assert abs(lhs - rhs) < 1e-12


def test_loss_model_wraps_functions():
    model = LossModel(gamma=0.5)
    assert model.value(0.9) == loss_value(0.9, 0.5)
    assert model.derivative(0.9) == loss_derivative(0.9, 0.5)
    assert model.conjugate(0.3) == conjugate_term(0.3, 0.5)
    with pytest.raises(ValueError):
        LossModel(gamma=0.0)


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------

def test_sparse_vector_invariants():
    v = SparseVector([(0, 0.5), (2, -2.0)], 3)
    assert v.entries == [(0, 0.5), (2, -2.0)]
    assert v.dot(np.array([1.0, 1.0, 1.0])) == -1.5
    assert v.norm_sq() == 0.25 + 4.0
    with pytest.raises(ValueError):
        SparseVector([(2, 1.0), (1, 1.0)], 3)  # not increasing
    with pytest.raises(ValueError):
        SparseVector([(1, 1.0), (1, 2.0)], 3)  # duplicate
    with pytest.raises(ValueError):
        SparseVector([(3, 1.0)], 3)  # out of range
    # stored zeros are dropped
    assert SparseVector([(0, 0.0), (1, 2.0)], 3).entries == [(1, 2.0)]


def test_labeled_example_validates_label():
    x = SparseVector([(0, 1.0)], 2)
    LabeledExample(x, -1)
    with pytest.raises(ValueError):
        LabeledExample(x, 2)
    with pytest.raises(ValueError):
        LabeledExample(x, 0)


def test_dataset_checks_dims():
    a = LabeledExample(SparseVector([(0, 1.0)], 2), 1)
    b = LabeledExample(SparseVector([(2, 1.0)], 3), -1)
    with pytest.raises(ValueError):
        Dataset([a, b])
    data = Dataset([a, b], dim=3)
    assert data.dim == 3 and len(data) == 2
    with pytest.raises(ValueError):
        Dataset([])


def test_dataset_round_trips_examples():
    rng = np.random.default_rng(11)
    data = random_dataset(rng, 20, 6)
    again = Dataset(list(data))
    assert np.array_equal(again.indices, data.indices)
    assert np.array_equal(again.values, data.values)
    assert np.array_equal(again.labels, data.labels)
    assert np.allclose(again.row_norms_sq, data.row_norms_sq)


def test_dataset_subset_picks_rows():
    rng = np.random.default_rng(12)
    data = random_dataset(rng, 30, 5)
    sub = data.subset(np.array([4, 2, 9]))
    assert len(sub) == 3
    assert sub[0].x.entries == data[4].x.entries
    assert sub[1].y == data[2].y


def test_primal_dual_point_checks_link():
    data = single_example_data()
    good = PrimalDualPoint(np.array([0.5]), np.array([0.5]), 1.0)
    good.check(data)
    bad = PrimalDualPoint(np.array([0.7]), np.array([0.5]), 1.0)
    with pytest.raises(ValueError):
        bad.check(data)
    with pytest.raises(ValueError):
        PrimalDualPoint(np.array([0.5]), np.array([1.5]), 1.0)


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def test_primal_objective_at_zero_is_half():
    rng = np.random.default_rng(13)
    data = random_dataset(rng, 17, 4)
    assert primal_objective(data, np.zeros(4), 0.3) == pytest.approx(0.5, abs=1e-15)


def test_primal_objective_hand_value():
    data = single_example_data()
    assert primal_objective(data, np.array([0.5]), 1.0) == pytest.approx(0.25, abs=1e-15)


def test_primal_objective_lambda_scaling():
    rng = np.random.default_rng(14)
    data = random_dataset(rng, 9, 5)
    w = rng.normal(size=5)
    base = primal_objective(data, w, 0.5)
    doubled = primal_objective(data, w, 1.0)
    assert doubled - base == pytest.approx(0.25 * float(np.dot(w, w)), rel=1e-12)


def test_primal_objective_dim_mismatch():
    data = single_example_data()
    with pytest.raises(ValueError):
        primal_objective(data, np.zeros(3), 1.0)


def test_primal_terms_sum_to_objective():
    rng = np.random.default_rng(15)
    data = random_dataset(rng, 9, 5)
    w = rng.normal(size=5)
    loss, norm = primal_terms(data, w, 0.7)
    assert loss + norm == pytest.approx(primal_objective(data, w, 0.7), rel=1e-15)


def test_dual_objective_values():
    data = single_example_data()
    assert dual_objective(data, np.zeros(1), 1.0) == 0.0
    assert dual_objective(data, np.array([0.5]), 1.0) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        dual_objective(data, np.array([1.5]), 1.0)


def test_dual_to_primal():
    data = single_example_data()
    assert np.array_equal(dual_to_primal(data, np.zeros(1), 1.0), np.zeros(1))
    assert dual_to_primal(data, np.array([0.5]), 1.0)[0] == pytest.approx(0.5)


def test_weak_duality_random():
    rng = np.random.default_rng(16)
    for _ in range(50):
        m, d = rng.integers(1, 8), rng.integers(1, 6)
        data = random_dataset(rng, int(m), int(d))
        alpha = rng.uniform(0, 1, size=len(data))
        lam = float(rng.uniform(0.05, 2.0))
        w = dual_to_primal(data, alpha, lam)
        assert dual_objective(data, alpha, lam) <= primal_objective(data, w, lam) + 1e-12


def test_duality_gap_at_optimum_and_at_zero():
    data = single_example_data()
    assert duality_gap(data, np.array([0.5]), np.array([0.5]), 1.0) == pytest.approx(0.0, abs=1e-15)
    rng = np.random.default_rng(17)
    other = random_dataset(rng, 12, 3)
    assert duality_gap(other, np.zeros(3), np.zeros(12), 0.4) == pytest.approx(0.5, abs=1e-15)


def test_zero_one_error_tie_rule_and_flip():
    rng = np.random.default_rng(18)
    data = random_dataset(rng, 25, 4)
    assert zero_one_error(np.zeros(4), data) == 1.0
    w = rng.normal(size=4)
    margins = data.margins(w)
    if np.all(margins != 0.0):  # tie-free: flipping w flips every decision
        e = zero_one_error(w, data)
        assert zero_one_error(-w, data) == pytest.approx(1.0 - e)


def test_zero_one_error_separating_w_on_pathological():
    from recycle_opt.experiments import synth_pathological

    data = synth_pathological(10, seed=4)
    w = np.zeros(data.dim)
    w[-1] = 1.0  # the last coordinate carries the label
    assert zero_one_error(w, data) == 0.0
