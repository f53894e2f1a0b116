"""Where is the walk at an exponential time?

Observe the walk at an independent exponential time of mean A. After scaling
by A^(2/3) its position has a density given by a Laplace transform of the
reflected-BM area law. We estimate that density at a few points and compare
with the walk histogram. Coarse settings keep the run to a couple of minutes.
"""
import numpy as np

from tsaw import StepTwoLevel, compute_sigma2, estimate_phi_hat, simulate_positions
from tsaw.walk import exponential_times

model = StepTwoLevel(1.0, 2.0)
A, n = 200.0, 50_000
g = compute_sigma2(model) ** (1 / 3)
scale = A ** (2 / 3)

pos, _ = simulate_positions(model, exponential_times(n, A, 3), 3)
for x in (0.0, 0.5, 1.0, 2.0):
    k = int(round(x * scale / g))
    empirical = np.mean(np.abs(pos) == k) / (2 if k else 1) * scale
    est = estimate_phi_hat(1.0, x, 1000, 4, dy=1e-2)
    print(f"x = {x:3.1f}  walk {empirical:.4f}   limit {g * est.estimate:.4f} +- {g * est.stderr:.4f}")
