"""Operator actions on radial coefficient sequences and modulated Gaussians.

Band actions on f = sum c_n h_n follow from the recurrences

    |x|^2 h_k = -(k+1) h_{k+1} + (2k+1) h_k - k h_{k-1}
    Delta h_k = -(k+1) h_{k+1} - (2k+1) h_k - k h_{k-1}
    Lambda h_k = (k+1) h_{k+1} - h_k - k h_{k-1},      Lambda = x . grad

so that (-Delta + |x|^2) h_k = (4k+2) h_k exactly in integer band
arithmetic.  Multiplication by h_0 is the dense symmetric matrix of triple
products (h_n, h_0 h_k), whose entries decay geometrically.

The second half of the module handles the explicit modulated Gaussians
S_N e^{i m |x|^2} e^{i c Delta} h_0 and the lens (pseudo-conformal) change
of variables u = e^{i gamma} S_L e^{-i b |y|^2 / 4} v, which are the bubble
states whose H^1 norm the closed form `modulated_gaussian_h1_sq` tracks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .basis import RadialState, SQRT_PI, eigenvalue, inner_h_h0_h

__all__ = [
    "apply_x2",
    "apply_laplacian",
    "apply_lambda",
    "h0_mult_matrix",
    "apply_h0_mult",
    "free_flow",
    "gaussian_fourier",
    "ModulatedGaussianParams",
    "modulated_gaussian_h1_sq",
    "modulated_gaussian_profile",
    "complex_gaussian_coeffs",
    "lens_transform",
    "grid_l2_norm",
    "grid_h1_norm_sq",
]


def _band_apply(state: RadialState, lower, diag, upper) -> RadialState:
    """d_n = lower(n) c_{n-1} + diag(n) c_n + upper(n) c_{n+1}, with spill at K."""
    c = state.coeffs
    n = np.arange(c.size)
    d = diag(n) * c
    d[1:] += lower(n[1:]) * c[:-1]
    d[:-1] += upper(n[:-1]) * c[1:]
    # the h_{K} component generated from c_{K-1} is reported, not stored
    spill = abs(lower(c.size) * c[-1]) if c.size else 0.0
    return RadialState(d, spill=float(spill))


def apply_x2(state: RadialState) -> RadialState:
    """Multiplication by |x|^2: tridiagonal with d_n = -n c_{n-1} + (2n+1) c_n - (n+1) c_{n+1}."""
    return _band_apply(state, lambda n: -n, lambda n: 2 * n + 1, lambda n: -(n + 1))


def apply_laplacian(state: RadialState) -> RadialState:
    """Laplacian: tridiagonal with d_n = -n c_{n-1} - (2n+1) c_n - (n+1) c_{n+1}."""
    return _band_apply(state, lambda n: -n, lambda n: -(2 * n + 1), lambda n: -(n + 1))


def apply_lambda(state: RadialState) -> RadialState:
    """Dilation generator Lambda = x . grad: d_n = n c_{n-1} - c_n - (n+1) c_{n+1}."""
    return _band_apply(state, lambda n: n, lambda n: -np.ones_like(n), lambda n: -(n + 1))


@lru_cache(maxsize=8)
def h0_mult_matrix(n_modes: int) -> np.ndarray:
    """Symmetric matrix M[n, k] = (h_n, h_0 h_k), cached and read-only."""
    m = np.empty((n_modes, n_modes))
    for n in range(n_modes):
        for k in range(n + 1):
            m[n, k] = m[k, n] = inner_h_h0_h(n, k)
    m.setflags(write=False)
    return m


def apply_h0_mult(state: RadialState) -> RadialState:
    """Multiplication by h_0 through the dense triple-product matrix.

    The matrix is truncated at K x K; the dropped tail decays like 3^{-n}
    and is accounted to `spill`.
    """
    m = h0_mult_matrix(state.n_modes)
    d = m @ state.coeffs
    # next row of the matrix, dotted with the state, is what index K receives
    k = state.n_modes
    tail_row = np.array([inner_h_h0_h(k, j) for j in range(k)])
    return RadialState(d, spill=float(abs(tail_row @ state.coeffs)))


def free_flow(state: RadialState, t: float) -> RadialState:
    """Free propagator e^{i t H}: phase e^{i t (4n+2)} on mode n; norm preserving."""
    phases = np.exp(1j * t * eigenvalue(np.arange(state.n_modes)))
    return RadialState(phases * state.coeffs, spill=state.spill)


def gaussian_fourier(u: complex, xi_sq: float) -> complex:
    """2D Fourier transform of exp(-u |x|^2) at |xi|^2 = xi_sq.

    Normalisation (1/2pi) integral e^{-i x.xi}: the transform is
    (1/2u) exp(-xi_sq / 4u).  Requires Re u >= 0 and u != 0.
    """
    u = complex(u)
    if u == 0:
        raise ValueError("u must be nonzero")
    if u.real < 0:
        raise ValueError("need Re u >= 0 for an integrable Gaussian")
    return 1.0 / (2.0 * u) * np.exp(-xi_sq / (4.0 * u))


@dataclass(frozen=True)
class ModulatedGaussianParams:
    """Parameters (N, m, c) of the modulated Gaussian S_N e^{i m |x|^2} e^{i c Delta} h_0.

    The derived complex numbers eta = 1 + 2ic and z = 1 + 4cm - 2im satisfy
    Re(z * conj(eta)) = 1 identically; checked on construction.
    """

    N: float
    m: float = 0.0
    c: float = 0.0

    def __post_init__(self) -> None:
        if self.N <= 0:
            raise ValueError("dilation N must be positive")
        if abs((self.z * np.conj(self.eta)).real - 1.0) > 1e-12:
            raise AssertionError("modulation identity Re(z conj(eta)) = 1 violated")

    @property
    def eta(self) -> complex:
        return 1.0 + 2.0j * self.c

    @property
    def z(self) -> complex:
        return 1.0 + 4.0 * self.c * self.m - 2.0j * self.m


def modulated_gaussian_h1_sq(p: ModulatedGaussianParams) -> float:
    """Exact H^1 norm squared N^2 (1 + 4c^2) + (1/N^2) ((1+4cm)^2 + 4m^2)."""
    return p.N**2 * (1.0 + 4.0 * p.c**2) + (
        (1.0 + 4.0 * p.c * p.m) ** 2 + 4.0 * p.m**2
    ) / p.N**2


def modulated_gaussian_profile(p: ModulatedGaussianParams, r: np.ndarray) -> np.ndarray:
    """Explicit Gaussian (1/(N eta sqrt(pi))) exp(-z r^2 / (2 eta N^2))."""
    r = np.asarray(r, dtype=float)
    return np.exp(-p.z * r * r / (2.0 * p.eta * p.N**2)) / (p.N * p.eta * SQRT_PI)


def complex_gaussian_coeffs(prefactor: complex, sigma: complex, n_modes: int) -> RadialState:
    """Expansion of prefactor * exp(-sigma r^2 / 2) in the h_n basis.

    From the generating function sum t^n h_n = (1/sqrt(pi)) (1/(1-t))
    exp(-(1+t) r^2 / (2(1-t))): with t = (sigma-1)/(sigma+1) (|t| < 1 for
    Re sigma > 0) the coefficients are prefactor * sqrt(pi) * (1-t) * t^n.
    The dropped geometric tail past the truncation is reported as spill.
    """
    sigma = complex(sigma)
    if sigma.real <= 0:
        raise ValueError("need Re sigma > 0 for an L^2 Gaussian")
    t = (sigma - 1.0) / (sigma + 1.0)
    scale = prefactor * SQRT_PI * (1.0 - t)
    coeffs = scale * t ** np.arange(n_modes)
    tail = abs(scale) * abs(t) ** n_modes
    tail_l2 = tail / math.sqrt(max(1.0 - abs(t) ** 2, 1e-300))
    return RadialState(coeffs, spill=float(tail_l2))


def lens_transform(
    v_radii: np.ndarray,
    v_values: np.ndarray,
    L: float,
    b: float,
    gamma: float,
    radii: np.ndarray,
) -> np.ndarray:
    """Pseudo-conformal (lens) image u(r) = (1/L) e^{i gamma} e^{-i b (r/L)^2 / 4} v(r/L).

    The sampled profile v is interpolated cubically; requesting r/L outside
    its sampled domain raises.
    """
    if L <= 0:
        raise ValueError("scale L must be positive")
    v_radii = np.asarray(v_radii, dtype=float)
    radii = np.asarray(radii, dtype=float)
    y = radii / L
    if y.min() < v_radii[0] - 1e-12 or y.max() > v_radii[-1] + 1e-12:
        raise ValueError(
            f"rescaled radius r/L spans [{y.min():.3g}, {y.max():.3g}] outside the "
            f"sampled domain [{v_radii[0]:.3g}, {v_radii[-1]:.3g}] of v"
        )
    spline = CubicSpline(v_radii, v_values)
    phase = np.exp(1j * gamma - 0.25j * b * y * y)
    return phase * spline(y) / L


def grid_l2_norm(radii: np.ndarray, values: np.ndarray) -> float:
    """L^2 norm of a radial profile: sqrt(2 pi integral |u|^2 r dr), Simpson rule."""
    radii = np.asarray(radii, dtype=float)
    return math.sqrt(2.0 * math.pi * simpson(np.abs(values) ** 2 * radii, x=radii))


def _radial_derivative(radii: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Fourth-order centered first derivative on a uniform radial grid."""
    h = radii[1] - radii[0]
    if not np.allclose(np.diff(radii), h, rtol=1e-9):
        raise ValueError("fourth-order differences need a uniform grid")
    d = np.empty_like(values)
    d[2:-2] = (-values[4:] + 8 * values[3:-1] - 8 * values[1:-3] + values[:-4]) / (12 * h)
    # one-sided fourth-order stencils at the edges
    edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    d[0] = edge @ values[:5]
    d[1] = edge @ values[1:6]
    d[-1] = -(edge @ values[-1:-6:-1])
    d[-2] = -(edge @ values[-2:-7:-1])
    return d


def grid_h1_norm_sq(radii: np.ndarray, values: np.ndarray) -> float:
    """Grid H^1 norm squared ||grad u||^2 + ||x u||^2 of a radial profile.

    Cross-check only; spectral norms on coefficients are authoritative.
    """
    radii = np.asarray(radii, dtype=float)
    du = _radial_derivative(radii, np.asarray(values))
    grad_sq = 2.0 * math.pi * simpson(np.abs(du) ** 2 * radii, x=radii)
    x_sq = 2.0 * math.pi * simpson(np.abs(values) ** 2 * radii**3, x=radii)
    return float(grad_sq + x_sq)
