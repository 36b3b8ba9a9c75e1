"""The heuristic error decomposition behind the sample-size question.

Generalization error splits into an optimization term (how suboptimal the
solver leaves the empirical objective), a regularization term, and an
estimation term shrinking with the sample size m = c*T.  For SGD the
optimization term ignores m, so more data never hurts and the best c is 1.
For linearly convergent methods the optimization term explodes as c -> 1
(less recycling), which pushes the optimal c below 1 once T is large and
the estimation term is small (low dimension).
"""

import numpy as np

from recycle_opt import BoundParams, bound_curves
from recycle_opt.dataio import write_bounds_csv

params = BoundParams(norm_w0=10.0, d=5, T=10 ** 6)

sgd = bound_curves(params, "sgd", "minimized")
rv = bound_curves(params, "rv", "minimized")

print("c      sgd bound   rv bound")
for k in range(0, len(sgd.c_values), 4):
    print("%-5g  %.4f      %.4f" % (sgd.c_values[k], sgd.values[k], rv.values[k]))

print("\nsgd argmin c = %g" % sgd.c_values[np.argmin(sgd.values)])
print("rv  argmin c = %g" % rv.c_values[np.argmin(rv.values)])

print("\nrv argmin c as the budget grows:")
for T in (10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7, 10 ** 8):
    curve = bound_curves(BoundParams(norm_w0=10.0, d=5, T=T), "rv", "minimized")
    print("  T=1e%d: c* = %g" % (int(np.log10(T)), curve.c_values[np.argmin(curve.values)]))

write_bounds_csv(sgd, rv, "bounds.csv")
print("\nwrote bounds.csv")
