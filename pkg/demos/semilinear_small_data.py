"""
Small data, cubic nonlinearity
==============================

A coarse 64x64 run of u_tt + (-Delta) u + (-Delta)^{1/4} u_t + (-Delta)^{3/4} u_t = |u|^3.
Small data decay like the linear problem; large data blow up.
"""

from sigmadamp import REFERENCE, check_global_existence_hypotheses
from sigmadamp import solver, verify

cubic = REFERENCE.with_(nonlinearity_p=3.0)
print("admissible:", check_global_existence_hypotheses(cubic, 1.0).admissible)

grid = solver.GridSpec(2, 64, 256.0)
res = verify.run_semilinear(cubic, grid, dt=0.5, horizon=300.0, window=(3.0, 300.0))
for rep in res.decay:
    print(f"{rep.query:28s} fitted {rep.fitted_slope:+.3f} predicted {rep.predicted.exponent:+.3f}")
m = res.mass
print(f"space-time mass {m.value + m.tail_estimate:.3e}, tail {100 * m.tail_fraction:.1f}%")

# p = 2 lies outside the admissible window; with large data the run blows up
quad = REFERENCE.with_(nonlinearity_p=2.0)
print("\np = 2 admissible:", check_global_existence_hypotheses(quad, 1.0).admissible)
big = solver.gaussian_data(10.0, 2.0, 2)
traj = solver.evolve(quad, solver.GridSpec(2, 64, 128.0), big, 0.05, 20.0, [1.0])
print(traj.blowup)
