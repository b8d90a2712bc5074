"""
Diffusion profile
=================

For large t the solution approaches P0 G0 + P1 G1. The gap, divided by the
decay rate of the solution itself, should shrink to zero.
"""

from sigmadamp import REFERENCE, ProblemConfig
from sigmadamp import solver, verify

data = solver.gaussian_data(1.0, 1.0, 2)
rep = verify.run_profile(REFERENCE, data, times=verify.log_times(1e2, 1e5, 1))
for t, g, ratio in zip(rep.times, rep.gap_norms, rep.ratios):
    print(f"t={t:8.0f}  gap {g:.3e}  gap / t^-1/3 = {ratio:.4f}")
print("verdict:", rep.verdict, " band:", tuple(round(float(b), 4) for b in rep.band))

# with zero total mass the profile vanishes and the solution decays faster
zero_mass = solver.gaussian_data(1.0, 1.0, 2) + solver.gaussian_data(-0.25, 2.0, 2)
print("\nP1 of the mixed data:", round(zero_mass.P1, 12))
fast = verify.run_linear_decay(REFERENCE, verify.linear_reference_queries(REFERENCE)[0], zero_mass)
print(f"slope with P1 = 0: {fast.fitted_slope:.3f} ({fast.verdict})")

# the low-zone kernel gap decays at its own rate
gap = verify.run_profile_gap_rate(REFERENCE)
print(f"K1 vs G1 gap slope {gap.fitted_slope:.3f}, predicted {gap.predicted.exponent}")
