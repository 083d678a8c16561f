"""Growth recipes from the continuous-resonant trilinear operator.

A two-mode pump F = h_0 + beta h_1 makes h_0 a stationary profile of the
pumped resonant flow up to the Gaussian symmetries (dilation, phases);
dilating with N = e^{mu s} then yields solutions of i f_s = T[F] f with
exponentially growing H^1 norm, and a decaying potential built from F.
"""

import math

import numpy as np

from resonant_oscillator import (
    ChiTensor,
    cr_potential,
    cr_residual,
    modulation_odes,
    scaling_solution,
    sobolev_norm,
    solve_mode_equation,
)

tensor = ChiTensor.build(64)
mu = 0.1
sol = solve_mode_equation(0.0, mu, 0.0, tensor)
print(f"mode equation at mu = {mu}: beta = {sol.beta:.8f} (exact -4i mu/pi = "
      f"{-4*mu/math.pi:.8f} i), lambda = {sol.lam:.8f} "
      f"(exact pi/2 + 4 mu^2/pi = {math.pi/2 + 4*mu**2/math.pi:.8f})")
print(f"mode-equation residual on the truncated basis: {sol.residual:.2e}")

report = cr_residual(mu, np.linspace(0.0, 5.0, 11), 64, tensor)
print(f"\nscaling solution on s in [0, 5]: max ||i d_s f - T[F] f||_L2 = "
      f"{report.max_residual:.2e}")
for s in (0.0, 2.5, 5.0):
    f, _ = scaling_solution(mu, s, 64, tensor)
    n_val = math.exp(mu * s)
    print(f"  s = {s:3.1f}: ||f||^2_H1 = {sobolev_norm(f, 1.0)**2:8.5f} "
          f"(closed form N^2 + 1/N^2 = {n_val**2 + 1/n_val**2:8.5f})")

path = modulation_odes(0.0, 0.0, mu, sol.lam, (1.0, 0.0, 0.0, 0.0), (0.0, 5.0))
print(f"\nmodulation parameters: N(5) = {path.N[-1]:.5f} (e^0.5 = {math.exp(0.5):.5f}), "
      f"gamma(5) = {path.gamma[-1]:.5f} (-5 lambda = {-5*sol.lam:.5f})")

family = lambda s: scaling_solution(mu, s, 64, tensor)[1]  # noqa: E731
radii = np.linspace(0.0, 8.0, 81)
print("\npotential decay |e^{-itH} F|^2 / (t log t):")
for t in (4.0, 40.0, 400.0, 4000.0):
    sample = cr_potential(family, t, radii)
    print(f"  t = {t:7.1f}: sup V = {sample.sup_value:.3e}")
