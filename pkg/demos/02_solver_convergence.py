"""All four solvers under the same step budget.

SGD decays polynomially; SDCA, SAG and SVRG are linearly convergent on
the (strongly convex, smooth) objective, which is what makes revisiting
a smaller sample worthwhile for them.
"""

import numpy as np

from recycle_opt import SolverConfig, reference_optimum, run_solver, synth_gaussian
from recycle_opt.core import primal_objective

data = synth_gaussian(1000, 8, margin_noise=0.1, seed=3)
lam = 1e-2
m = len(data)
ref = reference_optimum(data, lam, tol=1e-12, seed=9)
print("certified optimum in [%.10f, %.10f]" % (ref.lower, ref.upper))

budget = 20 * m
# constant stepsize for SAG/SVRG at the 1/(L + lam*m) scale
eta = 1.0 / (1.0 + lam * m)
configs = {
    "sgd": SolverConfig("sgd", lam, budget, seed=5),
    "sdca": SolverConfig("sdca", lam, budget, seed=5),
    "sag": SolverConfig("sag", lam, budget, seed=5, stepsize=eta),
    "svrg": SolverConfig("svrg", lam, budget, seed=5, stepsize=eta),
}

print("\nalgo    suboptimality after %d steps" % budget)
for name, config in configs.items():
    w, record = run_solver(config, data, record_every=5 * m, reference=ref)
    final = primal_objective(data, w, lam) - ref.primal_estimate
    print("%-6s  %.3e" % (name, final))
    trail = "   ".join(
        "t=%d: %.1e" % (t, s)
        for t, s in zip(record.t[:: max(1, len(record) // 5)],
                        record.primal_subopt[:: max(1, len(record) // 5)])
    )
    print("        %s" % trail)
