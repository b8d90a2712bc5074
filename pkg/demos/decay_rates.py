"""
Closed-form decay exponents
===========================

The rates module returns exact fractions whenever the parameters are short
decimals, so tables like the one below are free of rounding.
"""

from sigmadamp import REFERENCE, EstimateKind, RateQuery
from sigmadamp import rates

print("linear estimates, L^1 data, reference parameters")
for s, j in [(0, 0), (0.5, 0), (1.5, 0), (0, 1), (0.5, 1)]:
    pred = rates.linear_decay_exponent(REFERENCE, RateQuery(1.0, s, j, EstimateKind.LmL2))
    print(f"  s={s:<4} j={j}  exponent {str(pred.exact):>5}   ({pred.regime_note})")

energy = rates.linear_decay_exponent(REFERENCE, RateQuery(2.0, 0.0, 0, EstimateKind.L2L2))
print("L^2 data only: exponent", energy.exact, "(growth)")

# one dimension lower, n = 2 m0 sigma1 and a logarithm appears
crit = rates.linear_decay_exponent(REFERENCE.with_(dim_n=1), RateQuery(1.0, 0.0, 0))
print("n = 1:", crit.exponent, "with log factor" if crit.log_factor else "")

print("\nlow-frequency kernel pieces")
for name, pred in rates.kernel_piece_rates(REFERENCE).items():
    print(f"  {name}: {pred.exact}")
print("profile", rates.profile_rate(REFERENCE).exact,
      " K1 gap", rates.profile_gap_rate(REFERENCE).exact,
      " Gamma(0)", rates.gamma_s(REFERENCE).exact)

cubic = REFERENCE.with_(nonlinearity_p=3.0)
print("\nsemilinear, p = 3")
for name, pred in rates.semilinear_decay_exponents(cubic).items():
    print(f"  {name}: {pred.exact}")
print("  integrand of the space-time mass decays like t^-" + str(rates.nonlinear_mass_decay(cubic).exact))
