"""Radial Laguerre-Hermite calculus: closed forms against the quadrature oracle.

The whole library rests on the radial eigenbasis h_k of -Delta + |x|^2 on R^2
and a handful of product integrals with closed forms.  This script builds the
Gauss-Laguerre rule for radial integrals, verifies orthonormality, and compares
the closed-form triple/quadruple products and the resonant chi coefficients
against plain quadrature.
"""

import math

import numpy as np

from resonant_oscillator import (
    ChiTensor,
    RadialQuadrature,
    hermite_radial_table,
    inner_h_h0_h,
    inner_h_h0sq_h,
)

rule = RadialQuadrature.for_max_index(30)
print(f"radial rule: {rule.n_nodes} nodes, largest radius {rule.nodes[-1]:.2f}")

table = hermite_radial_table(40, rule.nodes)
gram = (table * rule.weights) @ table.T
print(f"orthonormality of h_0..h_40: max |G - I| = {np.abs(gram - np.eye(41)).max():.2e}")

print("\nclosed forms vs quadrature (n, k, closed, oracle, delta):")
for n, k in [(1, 0), (0, 0), (7, 3), (24, 18)]:
    oracle = rule.integrate(table[n] * table[0] * table[k])
    closed = inner_h_h0_h(n, k)
    print(f"  (h_{n}, h_0 h_{k}):   {closed:+.12e}  {oracle:+.12e}  {abs(closed-oracle):.1e}")
for n, k in [(1, 1), (0, 0), (9, 4)]:
    oracle = rule.integrate(table[n] * table[0] ** 2 * table[k])
    closed = inner_h_h0sq_h(n, k)
    print(f"  (h_{n}, h_0^2 h_{k}): {closed:+.12e}  {oracle:+.12e}  {abs(closed-oracle):.1e}")

print(f"\nreference values: (h_1, h_0 h_0) = 2/(9 sqrt(pi)) = {2/(9*math.sqrt(math.pi)):.12f}")
print(f"                  ||h_1 h_0||^2  = 1/(4 pi)       = {1/(4*math.pi):.12f}")

tensor = ChiTensor.build(16)
print("\nresonant coefficients chi (pi^2 times the quadruple product):")
print(f"  chi_0000 = {tensor.value(0,0,0,0):.12f}   (pi/2 = {math.pi/2:.12f})")
print(f"  chi_1100 = {tensor.value(1,1,0,0):.12f}   (pi/4 = {math.pi/4:.12f})")
print(f"  full permutation symmetry, e.g. chi_0110 - chi_1100 = "
      f"{tensor.value(0,1,1,0) - tensor.value(1,1,0,0):.1e}")
