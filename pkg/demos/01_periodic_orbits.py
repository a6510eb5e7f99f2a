# %% [markdown]
# # Periodic orbits of a perturbed doubling map
#
# The family `L(x) = 2x + tau sin(2 pi x) / (2 pi)` is a small deformation of
# the doubling map.  Every fixed point of `T^n` is labelled by the branches
# its orbit visits, so we can find all of them by running composed inverse
# branches, which contract.

# %%
import numpy as np

from dyndet import TrigMapFamily, branch_partition, brute_fixed_points, enumerate_fixed_points

family = TrigMapFamily.sine_perturbation()
tau = 0.05
part = branch_partition(family, tau)
print("branch cuts:", part.cuts)

# %% [markdown]
# Period 3: seven points, one per admissible itinerary (000 and 111 both land
# on the fixed point 0 and are merged).

# %%
fps = enumerate_fixed_points(family, tau, 3)
for itinerary, x, residual in fps.records():
    print("".join(map(str, itinerary)), f"{x:.15f}", f"{residual:.1e}")

# %% [markdown]
# Independent check: scan `L^n(x) - x` on a fine grid for integer crossings.

# %%
for n in (4, 8, 10):
    ours = np.sort(enumerate_fixed_points(family, tau, n).points.astype(float))
    scan = np.array(brute_fixed_points(family, tau, n))
    print(f"n={n:2d}: {len(ours)} points, max |ours - scan| = {np.max(np.abs(ours - scan)):.1e}")

# %% [markdown]
# Residuals stay at the 1e-15 level even at period 14, where `(T^n)'` is about 2e4.

# %%
fps = enumerate_fixed_points(family, tau, 14, workers=4)
print(len(fps), "points, max residual", fps.residuals.max())
