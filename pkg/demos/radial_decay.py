"""
Measured decay on the radial path
=================================

Norms of the exact linear solution are computed by quadrature in |xi| at
each time, no time stepping involved. Slopes over three decades are
compared with the predicted exponents.
"""

from sigmadamp import REFERENCE
from sigmadamp import solver, verify

data = solver.gaussian_data(1.0, 1.0, 2, slot="u1")
print(f"P0 = {data.P0:.4f}, P1 = {data.P1:.4f}")

for q in verify.linear_reference_queries(REFERENCE):
    rep = verify.run_linear_decay(REFERENCE, q, data)
    print(f"s={q.s:<4g} j={q.j}: fitted {rep.fitted_slope:+.4f}, "
          f"predicted {rep.predicted.exponent:+.4f} -> {rep.verdict}")

# raw samples of the first query
t = verify.log_times(1e2, 1e5, 1)
for ti in t:
    print(f"  t={ti:8.0f}  ||u|| = {solver.linear_norm_radial(REFERENCE, data, ti):.6e}")
