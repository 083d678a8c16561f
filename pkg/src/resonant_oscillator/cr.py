"""The continuous-resonant trilinear operator on radial modes and its
scaling solutions.

On the radial basis the operator acts through the resonance condition
n4 = n1 - n2 + n3 (second slot conjugated) with totally symmetric positive
coefficients

    chi_{n1 n2 n3 n4} = pi^2 * integral_{R^2} h_{n1} h_{n2} h_{n3} h_{n4} dx,

e.g. chi_1100 = pi^2 ||h_1 h_0||^2 = pi/4.  A two-mode pump F = h_0 + beta h_1
turns the mode equation

    (nu Delta + i mu (1 + Lambda) + kappa |x|^2) h_0 + T[F] h_0 = lambda h_0

into the 2x2 system chi_0000 + |beta|^2 chi_1100 = nu - kappa + lambda,
beta chi_0110 = nu + kappa - i mu, always solvable since chi_1100 > 0.
Dilation of the resulting stationary profile by N(s) = e^{mu s} yields the
exponentially growing solutions i f_s = T[F] f whose residual this module
measures, and the associated decaying potential
V(t, x) = |e^{-itH} F(log log t, x)|^2 / (t log t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .basis import (
    RadialQuadrature,
    RadialState,
    SQRT_PI,
    hermite_radial_table,
    sobolev_norm,
)
from .operators import (
    apply_lambda,
    apply_laplacian,
    apply_x2,
    complex_gaussian_coeffs,
    free_flow,
)
from .basis import synthesize

__all__ = [
    "ChiTensor",
    "CrModeSolution",
    "CrResidualReport",
    "ModulationPath",
    "CrPotentialSample",
    "chi",
    "cr_apply",
    "solve_mode_equation",
    "scaling_solution",
    "sn_h1_coeffs",
    "sn_h1_coeffs_series",
    "cr_residual",
    "modulation_odes",
    "cr_potential",
]


@dataclass(frozen=True)
class ChiTensor:
    """Dense table of resonant coefficients chi_{m n p q}, q = m - n + p.

    table[m, n, p] holds the coefficient for all m, n, p < max_index with
    q >= 0 (q may exceed max_index; those entries feed the spill estimate of
    :func:`cr_apply`).  Entries are quadrature values of a product of four
    basis functions: totally symmetric and strictly positive.
    """

    max_index: int
    table: np.ndarray
    rule: RadialQuadrature

    def __post_init__(self) -> None:
        self.table.setflags(write=False)

    @classmethod
    def build(cls, max_index: int, rule: RadialQuadrature | None = None) -> "ChiTensor":
        if max_index < 1:
            raise ValueError("need at least two modes")
        k = max_index
        top = 2 * k - 2  # largest output index reachable from inputs below k
        if rule is None:
            rule = RadialQuadrature.for_max_index(top)
        table = np.zeros((k, k, k))
        h = hermite_radial_table(top, rule.nodes)
        w = rule.weights
        p_idx = np.arange(k)
        for m in range(k):
            for n in range(k):
                q_idx = m - n + p_idx
                ok = q_idx >= 0
                pair = h[p_idx[ok]] * h[q_idx[ok]]
                table[m, n, ok] = math.pi**2 * (pair @ (w * h[m] * h[n]))
        return cls(max_index=k, table=table, rule=rule)

    def value(self, n1: int, n2: int, n3: int, n4: int) -> float:
        """chi for an arbitrary quadruple (resonant or not) by quadrature."""
        if min(n1, n2, n3, n4) < 0:
            raise ValueError("indices must be nonnegative")
        if n4 == n1 - n2 + n3 and max(n1, n2, n3) < self.max_index:
            return float(self.table[n1, n2, n3])
        return chi(n1, n2, n3, n4, rule=self.rule)


_chi_cache: dict[tuple[int, int, int, int], float] = {}


def chi(n1: int, n2: int, n3: int, n4: int, rule: RadialQuadrature | None = None) -> float:
    """Quadrature value of pi^2 integral h_{n1} h_{n2} h_{n3} h_{n4}; cached.

    The cache key is the sorted quadruple: the integrand is a plain product,
    so the value is invariant under any permutation of the four indices.
    """
    key = tuple(sorted((n1, n2, n3, n4)))
    if min(key) < 0:
        raise ValueError("indices must be nonnegative")
    if key not in _chi_cache:
        use = rule if rule is not None else RadialQuadrature.for_max_index(max(key))
        if use.n_nodes < 2 * max(key) + 16:
            use = RadialQuadrature.for_max_index(max(key))
        h = hermite_radial_table(max(key), use.nodes)
        prod = h[key[0]] * h[key[1]] * h[key[2]] * h[key[3]]
        _chi_cache[key] = math.pi**2 * float(use.integrate(prod))
    return _chi_cache[key]


def cr_apply(F: RadialState, v: RadialState, tensor: ChiTensor) -> RadialState:
    """(T[F] v)_k = sum over k = m - n + p of chi_{k m n p} F_m conj(F_n) v_p.

    Contributions whose output index lands at or beyond the shared
    truncation are reported as spill.
    """
    k_max = tensor.max_index
    if F.n_modes != k_max or v.n_modes != k_max:
        raise ValueError(
            f"states must share the tensor truncation {k_max}; "
            f"got {F.n_modes} and {v.n_modes}"
        )
    out = np.zeros(k_max, dtype=np.complex128)
    spilled = np.zeros(k_max, dtype=np.complex128)  # output indices k_max .. 2 k_max - 2
    fc, vc = F.coeffs, v.coeffs
    p_all = np.arange(k_max)
    for m in range(k_max):
        for n in range(k_max):
            weight = fc[m] * np.conj(fc[n])
            if weight == 0.0:
                continue
            d = m - n
            q = p_all + d
            inside = (q >= 0) & (q < k_max)
            out[q[inside]] += weight * tensor.table[m, n, inside] * vc[inside]
            beyond = q >= k_max
            if np.any(beyond):
                spilled[q[beyond] - k_max] += (
                    weight * tensor.table[m, n, beyond] * vc[beyond]
                )
    return RadialState(out, spill=float(np.linalg.norm(spilled)))


@dataclass(frozen=True)
class CrModeSolution:
    """Solution (beta, lambda) of the two-mode pump equation, with its residual."""

    beta: complex
    lam: float
    nu: float
    mu: float
    kappa: float
    residual: float

    def __post_init__(self) -> None:
        chi0000 = chi(0, 0, 0, 0)
        chi1100 = chi(1, 1, 0, 0)
        lhs1 = chi0000 + abs(self.beta) ** 2 * chi1100
        rhs1 = self.nu - self.kappa + self.lam
        lhs2 = self.beta * chi(0, 1, 1, 0)
        rhs2 = self.nu + self.kappa - 1j * self.mu
        if abs(lhs1 - rhs1) > 1e-12 or abs(lhs2 - rhs2) > 1e-12:
            raise AssertionError("mode-equation system violated beyond 1e-12")


def solve_mode_equation(
    nu: float, mu: float, kappa: float, tensor: ChiTensor
) -> CrModeSolution:
    """beta = (nu + kappa - i mu)/chi_0110, lambda = chi_0000 + |beta|^2 chi_1100 - nu + kappa.

    The residual of the full mode equation applied to h_0 is evaluated in the
    truncated basis with the exact band actions and :func:`cr_apply`.
    """
    # the same cached quadrature values the solution validates itself against
    chi0110 = chi(0, 1, 1, 0, rule=tensor.rule)
    chi0000 = chi(0, 0, 0, 0, rule=tensor.rule)
    chi1100 = chi(1, 1, 0, 0, rule=tensor.rule)
    beta = (nu + kappa - 1j * mu) / chi0110
    lam = chi0000 + abs(beta) ** 2 * chi1100 - nu + kappa

    k = tensor.max_index
    h0 = RadialState.basis_state(0, k)
    pump = RadialState(h0.coeffs + beta * RadialState.basis_state(1, k).coeffs)
    lhs = (
        nu * apply_laplacian(h0).coeffs
        + 1j * mu * (h0.coeffs + apply_lambda(h0).coeffs)
        + kappa * apply_x2(h0).coeffs
        + cr_apply(pump, h0, tensor).coeffs
        - lam * h0.coeffs
    )
    residual = float(np.linalg.norm(lhs))
    return CrModeSolution(
        beta=beta, lam=float(lam), nu=nu, mu=mu, kappa=kappa, residual=residual
    )


def sn_h1_coeffs(N: float, n_modes: int, rule: RadialQuadrature | None = None) -> np.ndarray:
    """Coefficients of the dilated first mode S_N h_1 by quadrature projection."""
    if rule is None or rule.n_nodes < 2 * n_modes + 16:
        rule = RadialQuadrature.for_max_index(n_modes)
    r_sq = (rule.nodes / N) ** 2
    profile = (1.0 - r_sq) * np.exp(-r_sq / 2.0) / (N * SQRT_PI)
    h = hermite_radial_table(n_modes - 1, rule.nodes)
    return (h * rule.weights) @ profile


def sn_h1_coeffs_series(N: float, n_modes: int) -> np.ndarray:
    """Cross-check for :func:`sn_h1_coeffs` from the generating-function derivative.

    With sigma = 1/N^2, t0 = (sigma-1)/(sigma+1) and kappa = 4 sigma/(sigma+1)^2,
    the n-th coefficient is
    (1/N) [ (1 - t0) t0^n - kappa t0^n + (1 - t0) n kappa t0^{n-1} ].
    """
    sigma = 1.0 / N**2
    t0 = (sigma - 1.0) / (sigma + 1.0)
    kap = 4.0 * sigma / (sigma + 1.0) ** 2
    n = np.arange(n_modes)
    powers = t0**n
    prev = np.zeros(n_modes)
    prev[1:] = t0 ** (n[1:] - 1)
    return ((1.0 - t0) * powers - kap * powers + (1.0 - t0) * kap * n * prev) / N


def scaling_solution(
    mu: float,
    s: float,
    n_modes: int,
    tensor: ChiTensor | None = None,
    tail_tol: float = 1e-12,
) -> tuple[RadialState, RadialState]:
    """The dilated pair f = e^{-is lambda} S_N h_0, F = e^{-is lambda} S_N (h_0 + beta h_1).

    N = e^{mu s}; (beta, lambda) solve the mode equation with nu = kappa = 0.
    Raises when the geometric coefficient tail of the dilation exceeds
    tail_tol at the truncation.  mu = 0 degenerates to the stationary pair.
    """
    if mu < 0:
        raise ValueError("growth exponent mu must be nonnegative")
    if tensor is None:
        tensor = ChiTensor.build(n_modes)
    mode = solve_mode_equation(0.0, mu, 0.0, tensor)
    N = math.exp(mu * s)
    phase = np.exp(-1j * mode.lam * s)
    base = complex_gaussian_coeffs(1.0 / (N * SQRT_PI), 1.0 / N**2, n_modes)
    if base.spill > tail_tol:
        raise ValueError(
            f"dilation N = {N:.4g} leaves tail {base.spill:.2e} > {tail_tol:.1e} "
            f"past {n_modes} modes; increase the truncation"
        )
    f = RadialState(phase * base.coeffs)
    first = sn_h1_coeffs(N, n_modes)
    F = RadialState(phase * (base.coeffs + mode.beta * first))
    return f, F


@dataclass(frozen=True)
class CrResidualReport:
    s_samples: np.ndarray
    residuals: np.ndarray
    max_residual: float
    h1_growth_rate: float     # fitted alpha in ||f||_{H^1} ~ c e^{alpha s}
    beta: complex
    lam: float


def cr_residual(
    mu: float, s_samples: np.ndarray, n_modes: int, tensor: ChiTensor | None = None
) -> CrResidualReport:
    """max_s || i d_s f - T[F] f ||_{L^2} for the scaling solution.

    The time derivative is analytic: i d_s f = lambda f - i mu e^{-is lambda} S_N h_1,
    since (1 + Lambda) h_0 = h_1 and d_s S_N = -(N_s / N) S_N (1 + Lambda).
    """
    if tensor is None:
        tensor = ChiTensor.build(n_modes)
    mode = solve_mode_equation(0.0, mu, 0.0, tensor)
    s_samples = np.asarray(s_samples, dtype=float)
    residuals = np.empty_like(s_samples)
    h1 = np.empty_like(s_samples)
    for i, s in enumerate(s_samples):
        f, F = scaling_solution(mu, s, n_modes, tensor)
        N = math.exp(mu * s)
        phase = np.exp(-1j * mode.lam * s)
        dilated_h1 = phase * sn_h1_coeffs(N, n_modes)
        i_ds_f = mode.lam * f.coeffs - 1j * mu * dilated_h1
        residuals[i] = float(np.linalg.norm(i_ds_f - cr_apply(F, f, tensor).coeffs))
        h1[i] = sobolev_norm(f, 1.0)
    design = np.column_stack([s_samples, np.ones_like(s_samples)])
    (rate, _), *_ = np.linalg.lstsq(design, np.log(h1), rcond=None)
    return CrResidualReport(
        s_samples=s_samples,
        residuals=residuals,
        max_residual=float(residuals.max()),
        h1_growth_rate=float(rate),
        beta=mode.beta,
        lam=mode.lam,
    )


@dataclass(frozen=True)
class ModulationPath:
    """Integrated modulation parameters (N, m, c, gamma) of the dilation family."""

    s: np.ndarray
    N: np.ndarray
    m: np.ndarray
    c: np.ndarray
    gamma: np.ndarray


def modulation_odes(
    kappa,
    nu,
    mu,
    lam,
    initial: tuple[float, float, float, float],
    span: tuple[float, float],
    n_samples: int = 201,
    rtol: float = 1e-11,
    atol: float = 1e-12,
) -> ModulationPath:
    """Integrate the modulation system of the dilated two-mode family:

        N_s / N = mu + 4 kappa c,
        m_s     = kappa + 2 m (N_s / N),
        c_s     = nu - 2 c mu - 4 kappa c^2,
        gamma_s = -lambda.

    The m and c lines are forced by the commutator bookkeeping
    kappa = m_s - 2 m N_s/N and nu = c_s + 2 c N_s/N - 4 kappa c^2 (they keep
    the physical curvature m/N^2 and spread c N^2 steady when kappa = nu = 0);
    only with them does the rebuilt family satisfy the resonant equation, see
    the consistency test.  Coefficients may be constants or callables of s.
    """

    def as_fun(x):
        return x if callable(x) else (lambda s, _x=float(x): _x)

    f_kappa, f_nu, f_mu, f_lam = map(as_fun, (kappa, nu, mu, lam))

    def rhs(s, y):
        big_n, m, c, _ = y
        ka = f_kappa(s)
        mu_s = f_mu(s)
        growth = mu_s + 4.0 * ka * c
        return [
            growth * big_n,
            ka + 2.0 * m * growth,
            f_nu(s) - 2.0 * c * mu_s - 4.0 * ka * c**2,
            -f_lam(s),
        ]

    s_eval = np.linspace(span[0], span[1], n_samples)
    sol = solve_ivp(rhs, span, list(initial), t_eval=s_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise ArithmeticError(f"modulation integration failed: {sol.message}")
    return ModulationPath(
        s=sol.t, N=sol.y[0], m=sol.y[1], c=sol.y[2], gamma=sol.y[3]
    )


@dataclass(frozen=True)
class CrPotentialSample:
    t: float
    radii: np.ndarray
    values: np.ndarray     # real, nonnegative
    sup_value: float


def cr_potential(F_of_s, t: float, radii: np.ndarray) -> CrPotentialSample:
    """V(t, x) = |e^{-itH} F(log log t, x)|^2 / (t log t), defined for t > e."""
    if t <= math.e:
        raise ValueError(f"t = {t} must exceed e so log log t is positive")
    radii = np.asarray(radii, dtype=float)
    state = F_of_s(math.log(math.log(t)))
    rotated = free_flow(state, -t)
    profile = synthesize(rotated, radii)
    values = np.abs(profile) ** 2 / (t * math.log(t))
    return CrPotentialSample(
        t=t, radii=radii, values=values, sup_value=float(values.max())
    )
