"""The auxiliary process forgets its start and settles on exp(-W)/Z.

For the two-level step rate the stationary law is the standard Laplace
density. We watch the L1 distance to it shrink with time and then compare
the long-time sample with the exact CDF.
"""
import numpy as np

from tsaw import StepTwoLevel, build_tables
from tsaw.auxiliary import convergence_probe, eta_samples
from tsaw.stats import ks_one_sample

model = StepTwoLevel(1.0, 2.0)
tables = build_tables(model)
print(f"Z = {tables.Z:.10f}, sigma^2 = {tables.sigma2:.10f}")

for t in (0.5, 1, 2, 5, 10):
    d = convergence_probe(model, "delta0", t, 200_000, 7, tables)
    print(f"t = {t:5.1f}  L1 distance {d:.4f}")

late = eta_samples(model, "Q0", [200.0], 10_000, 8)[:, 0]
d, p = ks_one_sample(late, tables.rho_cdf)
print(f"eta(200): KS {d:.4f}, p = {p:.3f}, sample mean {np.mean(late):+.3f}")
