"""
Characteristic roots and per-mode kernels
=========================================

Each Fourier mode of the linear problem is a damped oscillator. This script
walks through the three root regimes for the reference parameters and checks
the kernels against a direct matrix exponential.
"""

import numpy as np
from scipy.linalg import expm

from sigmadamp import REFERENCE, ProblemConfig
from sigmadamp import symbol

# reference: damping r^{1/2} + r^{3/2}, stiffness r^2, so the roots factor
r = np.array([1e-3, 0.1, 0.5, 1.0, 2.0, 10.0])
roots = symbol.char_roots(REFERENCE, r)
for ri, l1, l2, reg in zip(r, roots.lambda1, roots.lambda2, roots.regime):
    print(f"r={ri:7.3f}  lambda1={l1.real:+.6f}  lambda2={l2.real:+.6f}  {symbol.Regime(reg).name}")

# halving the damping opens a window of complex roots around r = 1
weak = ProblemConfig(1.0, 0.25, 0.75, mu1=0.3, mu2=0.3, dim_n=2)
zeros = symbol.discriminant_zeros(weak)
print("\ndiscriminant zeros:", ["%.6f" % z for z in zeros])
zb = symbol.find_eps_star(weak)
print("low/high zone radius eps* =", round(zb.eps_star, 6))

# kernels vs the 2x2 matrix exponential of [[0, 1], [-c, -b]]
t = 3.0
for ri in (0.05, 1.0, 20.0):
    b = float(symbol.damping(weak, ri))
    c = float(symbol.stiffness(weak, ri))
    E = expm(np.array([[0.0, 1.0], [-c, -b]]) * t)
    ours = np.array(symbol.kernel_matrix(weak, t, np.array([ri]))).reshape(2, 2)
    print(f"r={ri:5.2f}  max |kernel - expm| = {np.max(np.abs(ours - E)):.2e}")

# the cut-offs form a partition of unity
rr = np.linspace(0, 4, 9)
parts = [symbol.cutoff(z, rr, zb) for z in "LMH"]
print("\nchi_L + chi_M + chi_H =", np.round(sum(parts), 15))
