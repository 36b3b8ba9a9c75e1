"""Sparse data model, smoothed hinge loss, and primal/dual objectives.

The learning problem is L2-regularized linear classification:

    P(w) = (1/m) * sum_i loss(y_i <w, x_i>) + (lam/2) ||w||^2

with the gamma-smoothed hinge as the surrogate loss.  The matching dual is

    D(alpha) = (1/m) * sum_i (alpha_i - gamma alpha_i^2 / 2) - (lam/2) ||w(alpha)||^2

over alpha in [0,1]^m, linked to the primal through
w(alpha) = (1/(lam m)) * sum_i alpha_i y_i x_i.  The duality gap
P(w) - D(alpha) is a computable certificate of suboptimality.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


# ---------------------------------------------------------------------------
# smoothed hinge loss
# ---------------------------------------------------------------------------

def loss_value(a, gamma=1.0):
    """Smoothed hinge loss of the margin ``a``.

    Piecewise: 0 for a >= 1, quadratic (1-a)^2/(2 gamma) on the middle
    segment, and the linear tail 1 - a - gamma/2 for a <= 1 - gamma.
    1-Lipschitz and (1/gamma)-smooth.  Accepts scalars or arrays.
    """
    a = np.asarray(a, dtype=float)
    out = np.where(
        a >= 1.0,
        0.0,
        np.where(a <= 1.0 - gamma, 1.0 - a - 0.5 * gamma, (1.0 - a) ** 2 / (2.0 * gamma)),
    )
    return float(out) if out.ndim == 0 else out


def loss_derivative(a, gamma=1.0):
    """Derivative of the smoothed hinge; continuous, with values in [-1, 0]."""
    a = np.asarray(a, dtype=float)
    out = np.where(a >= 1.0, 0.0, np.where(a <= 1.0 - gamma, -1.0, (a - 1.0) / gamma))
    return float(out) if out.ndim == 0 else out


def conjugate_term(alpha, gamma=1.0):
    """Per-example dual payoff alpha - gamma*alpha^2/2 for alpha in [0, 1].

    This is -loss*(-alpha), the negated convex conjugate of the smoothed
    hinge evaluated at -alpha; feasible dual variables live in [0, 1].
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0.0) or np.any(alpha > 1.0):
        raise ValueError("dual variable outside [0, 1]")
    out = alpha - 0.5 * gamma * alpha ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LossModel:
    """Smoothed hinge with smoothing parameter gamma (> 0, default 1)."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")

    def value(self, a):
        return loss_value(a, self.gamma)

    def derivative(self, a):
        return loss_derivative(a, self.gamma)

    def conjugate(self, alpha):
        return conjugate_term(alpha, self.gamma)


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------

class SparseVector:
    """Sparse feature vector: strictly increasing indices, no stored zeros."""

    __slots__ = ("indices", "values", "dim")

    def __init__(self, entries, dim):
        if dim < 1:
            raise ValueError("dim must be positive")
        entries = [(int(i), float(v)) for i, v in entries]
        # stored zeros are dropped rather than rejected
        entries = [(i, v) for i, v in entries if v != 0.0]
        idx = np.array([i for i, _ in entries], dtype=np.int64)
        val = np.array([v for _, v in entries], dtype=np.float64)
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= dim:
                raise ValueError("index out of range for dim=%d" % dim)
        self.indices = idx
        self.values = val
        self.dim = int(dim)

    @property
    def entries(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def dot(self, w):
        if len(w) != self.dim:
            raise ValueError("dimension mismatch")
        return float(np.dot(w[self.indices], self.values))

    def norm_sq(self):
        return float(np.dot(self.values, self.values))

    def to_dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def __repr__(self):
        return "SparseVector(%r, dim=%d)" % (self.entries, self.dim)


@dataclass(frozen=True)
class LabeledExample:
    """A sparse feature row with a binary label in {-1, +1}."""

    x: SparseVector
    y: int

    def __post_init__(self):
        if self.y not in (-1, 1):
            raise ValueError("label must be -1 or +1")


class Dataset:
    """A sample of labeled sparse rows sharing one feature dimension.

    Rows are held in CSR form (`indptr`, `indices`, `values`) with a dense
    label vector, so solvers touch one row in O(nnz) and bulk evaluations
    use sparse matrix-vector products.  Instances are read-only after
    construction and safe to share across workers.
    """

    def __init__(self, examples, dim=None):
        examples = list(examples)
        if not examples:
            raise ValueError("dataset must contain at least one example")
        dims = {ex.x.dim for ex in examples}
        if dim is None:
            if len(dims) != 1:
                raise ValueError("examples disagree on dim; pass dim explicitly")
            dim = dims.pop()
        elif any(d > dim for d in dims):
            raise ValueError("example dim exceeds requested dim")
        indptr = np.zeros(len(examples) + 1, dtype=np.int64)
        for k, ex in enumerate(examples):
            indptr[k + 1] = indptr[k] + ex.x.indices.size
        indices = np.concatenate([ex.x.indices for ex in examples]) if indptr[-1] else np.zeros(0, np.int64)
        values = np.concatenate([ex.x.values for ex in examples]) if indptr[-1] else np.zeros(0, np.float64)
        labels = np.array([ex.y for ex in examples], dtype=np.float64)
        self._init_from(indptr, indices, values, labels, int(dim))

    def _init_from(self, indptr, indices, values, labels, dim):
        self.indptr = indptr
        self.indices = indices
        self.values = values
        self.labels = labels
        self.dim = dim
        self._matrix = None
        self._row_norms_sq = None

    @classmethod
    def from_arrays(cls, indptr, indices, values, labels, dim, validate=True):
        """Build from CSR arrays; labels must be +/-1, rows sorted, no zeros."""
        obj = cls.__new__(cls)
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if validate:
            if len(labels) < 1:
                raise ValueError("dataset must contain at least one example")
            if not np.all(np.isin(labels, (-1.0, 1.0))):
                raise ValueError("labels must be -1 or +1")
            if indices.size and (indices.min() < 0 or indices.max() >= dim):
                raise ValueError("index out of range")
            if np.any(values == 0.0):
                raise ValueError("explicit zero values not allowed")
            if indices.size >= 2:
                within = np.ones(indices.size - 1, dtype=bool)
                cuts = indptr[1:-1]  # pairs straddling a row boundary
                cuts = cuts[(cuts > 0) & (cuts < indices.size)]
                within[cuts - 1] = False
                if np.any(np.diff(indices)[within] <= 0):
                    raise ValueError("row indices must be strictly increasing")
        obj._init_from(indptr, indices, values, labels, int(dim))
        return obj

    @classmethod
    def from_dense(cls, X, y):
        """Build from a dense (n, d) matrix, dropping exact zeros."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        mask = X != 0.0
        counts = mask.sum(axis=1)
        indptr = np.zeros(len(y) + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        cols = np.broadcast_to(np.arange(X.shape[1], dtype=np.int64), X.shape)
        return cls.from_arrays(indptr, cols[mask], X[mask], y, X.shape[1])

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i):
        s, e = self.indptr[i], self.indptr[i + 1]
        vec = SparseVector(zip(self.indices[s:e], self.values[s:e]), self.dim)
        return LabeledExample(vec, int(self.labels[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def matrix(self):
        """The rows as a scipy CSR matrix (cached)."""
        if self._matrix is None:
            self._matrix = sp.csr_matrix(
                (self.values, self.indices, self.indptr), shape=(len(self), self.dim)
            )
        return self._matrix

    @property
    def row_norms_sq(self):
        if self._row_norms_sq is None:
            row_ids = np.repeat(np.arange(len(self)), np.diff(self.indptr))
            self._row_norms_sq = np.bincount(
                row_ids, weights=self.values ** 2, minlength=len(self)
            )
        return self._row_norms_sq

    def margins(self, w):
        """y_i <w, x_i> for every row."""
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.dim,):
            raise ValueError("dimension mismatch: w has %d entries, data dim is %d"
                             % (w.size, self.dim))
        return self.labels * (self.matrix @ w)

    def subset(self, idx):
        """New Dataset holding rows idx (in the given order)."""
        idx = np.asarray(idx, dtype=np.int64)
        sub = self.matrix[idx]
        return Dataset.from_arrays(
            sub.indptr.astype(np.int64), sub.indices.astype(np.int64), sub.data,
            self.labels[idx], self.dim, validate=False,
        )


@dataclass
class PrimalDualPoint:
    """A primal iterate w with dual variables alpha for a given lam.

    For SDCA-produced points the primal-dual link w = w(alpha) holds to
    1e-8 relative accuracy; `check` verifies feasibility and that link.
    """

    w: np.ndarray
    alpha: np.ndarray
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lam must be positive")
        if np.any(self.alpha < 0.0) or np.any(self.alpha > 1.0):
            raise ValueError("dual variables outside [0, 1]")

    def check(self, data, rtol=1e-8):
        w_alpha = dual_to_primal(data, self.alpha, self.lam)
        scale = max(float(np.linalg.norm(w_alpha)), 1.0)
        if float(np.linalg.norm(self.w - w_alpha)) > rtol * scale:
            raise ValueError("w does not match w(alpha) to rtol=%g" % rtol)


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def primal_objective(data, w, lam, gamma=1.0):
    """(1/m) sum_i loss(y_i <w, x_i>) + (lam/2) ||w||^2."""
    if not lam > 0.0:
        raise ValueError("lam must be positive")
    w = np.asarray(w, dtype=np.float64)
    loss = float(np.mean(loss_value(data.margins(w), gamma)))
    return loss + 0.5 * lam * float(np.dot(w, w))


def primal_terms(data, w, lam, gamma=1.0):
    """The loss and norm parts of the primal objective, separately."""
    w = np.asarray(w, dtype=np.float64)
    loss = float(np.mean(loss_value(data.margins(w), gamma)))
    return loss, 0.5 * lam * float(np.dot(w, w))


def dual_to_primal(data, alpha, lam):
    """w(alpha) = (1/(lam m)) sum_i alpha_i y_i x_i."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (len(data),):
        raise ValueError("alpha must have one entry per example")
    coef = alpha * data.labels / (lam * len(data))
    return data.matrix.T @ coef


def dual_objective(data, alpha, lam, gamma=1.0):
    """(1/m) sum_i conjugate_term(alpha_i) - (lam/2) ||w(alpha)||^2."""
    if not lam > 0.0:
        raise ValueError("lam must be positive")
    payoff = float(np.mean(conjugate_term(alpha, gamma)))
    w = dual_to_primal(data, alpha, lam)
    return payoff - 0.5 * lam * float(np.dot(w, w))


def duality_gap(data, w, alpha, lam, gamma=1.0):
    """primal_objective(w) - dual_objective(alpha); >= 0 for linked pairs."""
    return primal_objective(data, w, lam, gamma) - dual_objective(data, alpha, lam, gamma)


def zero_one_error(w, data):
    """Fraction of examples with y <w, x> <= 0 (ties count as errors)."""
    if len(data) == 0:
        raise ValueError("empty dataset")
    return float(np.mean(data.margins(np.asarray(w, dtype=np.float64)) <= 0.0))
