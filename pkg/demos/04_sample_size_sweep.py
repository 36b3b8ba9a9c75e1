"""How test error depends on the training-set size m = c*T under a budget.

A desk-scale version of the main experiment harness: fix the step budget
T, draw c*T training rows from a large pool, tune lambda per cell, and
average test error over seeded repetitions.  Writes sweep.csv and
sweep_optimal_c.csv plus a manifest from which any cell can be re-run
bit-exactly.
"""

from recycle_opt import SweepConfig, run_sweep, synth_gaussian
from recycle_opt.dataio import write_manifest, write_sweep_csv

pool = synth_gaussian(20_000, 4, margin_noise=0.1, seed=11)

config = SweepConfig(
    budgets=[1000, 4000],
    c_grid=[0.1, 0.25, 0.5, 0.75, 1.0],
    lambda_grid=[1e-1, 1e-2, 1e-3, 1e-4],
    repetitions=10,
    algorithm="sdca",
    sampler="iid",
    base_seed=7,
)

result = run_sweep(config, pool)

print("T      c      lambda   mean err   (se)")
for row in result.rows:
    print("%-6d %-6.2f %-8g %.4f     (%.4f)"
          % (row.T, row.c, row.lam, row.mean_test_error, row.std_error))

print("\nper-budget optima:")
for opt in result.optimal:
    print("T=%-6d optimal c=%-5g err=%.4f   err at c=1: %.4f"
          % (opt.T, opt.optimal_c, opt.error_at_optimal_c, opt.error_at_c1))

write_sweep_csv(result, "sweep.csv")
write_manifest(result, "manifest.json", data_path="(synth_gaussian seed=11)")
print("\nwrote sweep.csv, sweep_optimal_c.csv, manifest.json")
