"""Two ways to get the same random profile.

The direct route simulates the walk. The Ray-Knight route chains independent
auxiliary processes site by site and never simulates the walk at all. Their
marginals should agree; here we compare a few of them with two-sample KS.
"""
import numpy as np

from tsaw import StepTwoLevel, build_profiles, simulate_stopped
from tsaw.stats import ks_two_sample

model = StepTwoLevel(1.0, 2.0)
j, r, n = 0, 2.0, 3000
sites = [-1, 1, 2]

direct = simulate_stopped(model, j, r, n, seed=1, max_range=400, sites=sites)
rk = build_profiles(model, j, r, n, 1, max_range=400, sites=sites)
a, b = direct.complete, rk.complete
print(f"runs inside the 400-site window: direct {a.sum()}, ray-knight {b.sum()}")

for m, k in enumerate(sites):
    d, p = ks_two_sample(direct.values[a, m], rk.values[b, m])
    print(f"site {k:3d}: mean {direct.values[a, m].mean():.3f} vs {rk.values[b, m].mean():.3f}"
          f"   KS {d:.4f}  p={p:.3f}")
d, p = ks_two_sample(direct.T[a], rk.T[b])
print(f"total time: KS {d:.4f}  p={p:.3f}")
print("mean events per direct run:", np.mean(direct.events).round(1))
