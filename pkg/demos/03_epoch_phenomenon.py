"""Within-epoch non-monotonicity of SDCA under ordered sampling.

On a small adversarial dataset (each point has a private coordinate plus
a shared labeling coordinate), SDCA visited in order sets the early dual
variables too aggressively; near the end of each epoch the primal
objective *rises* because the norm of w grows with no offsetting loss
reduction.  The dual, by contrast, never decreases.  Stopping exactly at
an epoch boundary is therefore a bad habit: a few steps into the next
epoch fix the overshoot.

Writes the trajectory to epoch_phenomenon.csv (plot with the companion
plots package: `recycle-opt-plot trajectory --in ... --m 10`).
"""

import numpy as np

from recycle_opt import SolverConfig, reference_optimum, run_solver, synth_pathological
from recycle_opt.dataio import write_trajectory_csv

m, lam = 10, 0.1
data = synth_pathological(m, seed=0)
ref = reference_optimum(data, lam, tol=1e-12, seed=99)

config = SolverConfig("sdca", lam, budget=4 * m, seed=0, sampler="cyclic")
_, record = run_solver(config, data, record_every=1, reference=ref)

print("t   primal_subopt   dual_subopt   loss      norm      (* = primal rose)")
for k in range(1, len(record)):
    rose = "*" if record.primal_subopt[k] > record.primal_subopt[k - 1] else " "
    boundary = "  <- epoch %d ends" % record.epoch[k] if record.t[k] % m == 0 else ""
    print("%3d   %.6f     %.6f     %.6f  %.6f  %s%s"
          % (record.t[k], record.primal_subopt[k], record.dual_subopt[k],
             record.loss_term[k], record.norm_term[k], rose, boundary))

write_trajectory_csv(record, "epoch_phenomenon.csv")
print("\nwrote epoch_phenomenon.csv")

# The same non-monotonicity, averaged over fresh permutations: the mean
# suboptimality just past the boundary is well below the boundary value.
m = 100
data = synth_pathological(m, seed=0)
ref = reference_optimum(data, lam, tol=1e-12, seed=99)
boundary, past = [], []
for seed in range(50):
    config = SolverConfig("sdca", lam, budget=2 * m + 10, seed=seed, sampler="perm")
    _, rec = run_solver(config, data, record_every=2 * m + 10, reference=ref)
    lookup = {int(t): i for i, t in enumerate(rec.t)}
    boundary.append(rec.primal_subopt[lookup[2 * m]])
    past.append(rec.primal_subopt[lookup[2 * m + 10]])
print("\nSDCA-Perm, m=100: mean subopt %.2e at t=2m  vs  %.2e at t=2m+10"
      % (np.mean(boundary), np.mean(past)))
