"""
Solving the Gaussian characterizing equation
============================================

Behind every bound in the package sits a one-dimensional ODE: given a test
function h, find phi with phi'(x) - x*phi(x) = h(x) - E h(Z), Z standard
Gaussian.  The solver produces phi and phi', and universal constants cap
phi' and phi'' in terms of the Lipschitz constant of h — which is exactly
what converts coefficient fluctuations into Wasserstein distance.
"""

import numpy as np

from steinlab.gaussian import (
    TestFunction,
    gaussian_expectation,
    stein_constant_check,
    stein_solve,
)

# ---------------------------------------------------------------------------
# 1. Solve for h(t) = |t|.  E|Z| = sqrt(2/pi), and the solution phi is
#    smooth away from the kink at zero.

sol = stein_solve(abs, 1.0)
print(f"h(t) = |t|:  E h(Z) = {gaussian_expectation(abs):.6f}"
      f"  (sqrt(2/pi) = {np.sqrt(2 / np.pi):.6f})")
print("  x      phi(x)     phi'(x)    residual phi'(x) - x*phi(x) - (h - Eh)")
mean = gaussian_expectation(abs)
for x in (-2.0, -0.5, 0.5, 2.0):
    resid = sol.phi_prime(x) - x * sol.phi(x) - (abs(x) - mean)
    print(f"  {x:+.1f}   {sol.phi(x):+.6f}  {sol.phi_prime(x):+.6f}   {resid:+.2e}")

# ---------------------------------------------------------------------------
# 2. The universal constants: for 1-Lipschitz h, |phi'| <= sqrt(2/pi) and
#    |phi''| <= 2 wherever h is differentiable.  Probe them on a family of
#    kinked and smooth test functions.

family = [
    TestFunction(abs, np.sign, 1.0),
    TestFunction(lambda t: max(t, 0.0), lambda t: float(t > 0), 1.0),
    TestFunction(np.tanh, lambda t: 1.0 / np.cosh(t) ** 2, 1.0),
    TestFunction(lambda t: abs(t - 0.7), lambda t: np.sign(t - 0.7), 1.0),
    TestFunction(np.sin, np.cos, 1.0),
]
report = stein_constant_check(family, np.linspace(-6.0, 6.0, 481))
print(f"\nconstants over {report.functions} test functions,"
      f" {report.grid_points} grid points:")
print(f"  max |phi'| / Lip(h)  = {report.max_first_ratio:.4f}"
      f"   (universal cap sqrt(2/pi) = {np.sqrt(2 / np.pi):.4f})")
print(f"  max |phi''| / Lip(h) = {report.max_second_ratio:.4f}"
      f"   (universal cap 2)")

# ---------------------------------------------------------------------------
# 3. Why it matters: for any 1-Lipschitz h, |E h(W) - E h(Z)| expands via
#    the equation into terms controlled by the resampling coefficient, with
#    these two constants as the only price.  Taking the supremum over h
#    gives the Wasserstein bounds reported everywhere else in the package.
