"""Smoothed hinge loss, its conjugate, and the duality-gap certificate.

Walks through the pieces that every solver in the package builds on: the
piecewise loss, the primal and dual objectives, and how the gap between
them certifies solution quality without knowing the true optimum.
"""

import numpy as np

from recycle_opt import (
    SDCASolver,
    IndexSampler,
    conjugate_term,
    dual_objective,
    duality_gap,
    loss_derivative,
    loss_value,
    primal_objective,
    synth_gaussian,
)

# The loss is flat above margin 1, quadratic in the middle, linear below.
print("margin     loss   derivative")
for a in (-1.0, 0.0, 0.25, 0.5, 0.9, 1.0, 1.5):
    print("%6.2f   %6.4f   %8.4f" % (a, loss_value(a), loss_derivative(a)))

# The dual payoff alpha - alpha^2/2 peaks at alpha = 1/2.
alphas = np.linspace(0, 1, 5)
print("\nalpha:", alphas)
print("dual payoff:", conjugate_term(alphas))

# On real data: start from w = 0, alpha = 0 and watch the gap close.
data = synth_gaussian(500, 5, margin_noise=0.1, seed=1)
lam = 0.05
solver = SDCASolver(data, lam)
sampler = IndexSampler("iid", len(data), seed=2)

print("\nepoch   primal     dual       gap")
for epoch in range(8):
    p = primal_objective(data, solver.w, lam)
    d = dual_objective(data, solver.alpha, lam)
    print("%4d   %8.6f   %8.6f   %.2e" % (epoch, p, d, p - d))
    for _ in range(len(data)):
        solver.step(sampler.next_index())

gap = duality_gap(data, solver.w, solver.alpha, lam)
print("\nfinal gap %.3e: the iterate is certified within %.3e of optimal" % (gap, gap))
