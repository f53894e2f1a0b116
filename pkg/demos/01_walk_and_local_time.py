"""Run the self-repelling walk until the local time at a site reaches a level.

The walk starts at 0. It is stopped at the first moment its local time at
site j equals r, and the resulting occupation profile is printed and saved.
"""
from tsaw import StepTwoLevel, Stream, local_time_profile, run_until_inverse_local_time
from tsaw.profiles import write_profile_csv

model = StepTwoLevel(low=1.0, high=2.0)
j, r = 2, 3.0

T, traj = run_until_inverse_local_time(model, j, r, Stream(2024, tag="demo"))
profile = local_time_profile(traj, j, r)

print(f"stopped at time {T:.4f} after {len(traj.positions)} jumps")
print(f"visited sites {profile.left_end}..{profile.right_end}")
# profiles can be long; show the window around j
for k in range(j - 6, j + 7):
    v = profile[k]
    print(f"{k:4d} {v:9.4f} " + "#" * min(60, int(5 * v)))

# total occupation equals the stopping time
print("sum of local times:", profile.values.sum())
write_profile_csv(profile, "walk_profile.csv")
