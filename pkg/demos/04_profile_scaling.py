"""Rescaled profiles look like reflected Brownian motion.

Start the local time at the origin at sigma*sqrt(A)*h, rescale sites by A and
heights by sigma*sqrt(A). The support endpoints and the area should then
follow the zeros of |B| with B(0) = h. A = 100 keeps this quick, at the
price of a visible finite-A distance (the acceptance run uses A = 400).
"""
import math

from tsaw import StepTwoLevel, build_profiles, compute_sigma2, simulate_rbm_batch
from tsaw.stats import censor, ks_two_sample

model = StepTwoLevel(1.0, 2.0)
sigma = math.sqrt(compute_sigma2(model))
A, h, cap = 100, 1.0, 8.0

rk = build_profiles(model, 0, sigma * math.sqrt(A) * h, 3000, 5,
                    left_cap=-int(cap * A), right_cap=int(cap * A))
bm = simulate_rbm_batch(0.0, h, 3000, 6, dy=1e-3, span_cap=cap)

right_rk = censor(rk.right_end / A, (rk.status & 2) > 0, cap)
right_bm = censor(bm.right_zero, (bm.status & 1) > 0, cap)
d, p = ks_two_sample(right_rk, right_bm)
print(f"right end / A vs first zero of |B|: KS {d:.4f} (p={p:.3f})")

left_rk = censor(-rk.left_end / A, (rk.status & 4) > 0, cap)
left_bm = censor(-bm.left_zero, (bm.status & 2) > 0, cap)
d, p = ks_two_sample(left_rk, left_bm)
print(f"left end / A: KS {d:.4f} (p={p:.3f})")
