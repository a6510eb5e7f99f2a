# %% [markdown]
# # The dynamical determinant and topological pressure
#
# Traces over periodic points give the power-series coefficients of
# `d(z) = exp(-sum b_n z^n / n)`.  For analytic maps they decay faster than
# any geometric rate, so a dozen terms pin down the leading zero `z* = e^{-P}`.

# %%
import numpy as np

from dyndet import (
    Observable,
    TrigMapFamily,
    det_coefficient_partials,
    det_series,
    find_smallest_zero,
    flat_trace,
    trace_table,
)
from dyndet.response import convergence_report

family = TrigMapFamily.sine_perturbation()
series = det_coefficient_partials(trace_table(family, Observable.cosine(), 12, tau=0.05), 12)
for n, a in enumerate(series.a):
    print(f"a_{n:<2d} = {a: .3e}")
print("fitted decay rate:", convergence_report(series).rates["a"])

# %% [markdown]
# For the weight `-log T'` the leading zero is exactly 1 (zero pressure).

# %%
print(find_smallest_zero(series))

# %% [markdown]
# With the potential `phi = 0.3 cos(2 pi x)` the pressure is positive and the
# zero moves inside the unit disc.  Truncation at 10 and 12 terms agree.

# %%
phi = Observable.cosine(amplitude=0.3)
for n_max in (8, 10, 12):
    b = [flat_trace(family, phi, 0.05, n) for n in range(1, n_max + 1)]
    z = find_smallest_zero(det_series(b, n_max))
    print(f"n_max={n_max}: z* = {z.z_star:.15f}, P = {z.pressure:.15f}")
print("log 2 =", np.log(2))
