"""The finite-dimensional bubble modulation system and its resonant trajectory.

The lens change of variables maps the free oscillator flow onto a planar
Hamiltonian system for the scale L and phase curvature b.  In canonical
coordinates (b, ell) with ell = 1/(4 L^2) the Hamiltonian is

    E(b, ell) = ell b^2 + 4 ell + 1/(4 ell) >= 2,

and action-angle coordinates (a, theta) on E > 2 satisfy E = 4a with

    ell = (1/4) (2a - sqrt(4a^2-1) cos(theta)),
    b ell = (1/2) sqrt(4a^2-1) sin(theta).

(The 1/2 in the second relation is forced by E = 4a together with
ell_s = 2 ell b; see the round-trip and Hamiltonian tests.)  The unperturbed
flow is theta_s = 4, a_s = 0.  Under the resonant perturbation

    beta(s) = -sin(4s) / (s log s)

the action drifts like a(s) = (1/4) log s + O(1/log s); the distinguished
trajectory is constructed by shooting backward from (rho, psi) = (0, 0) at
a large horizon M in the regularized variables

    2a = cosh(rho + log log s),   theta = 4s + psi,

and taking the Cauchy limit M -> infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ._dp45 import shoot_bubble

__all__ = [
    "ActionAngle",
    "ModulationFrame",
    "ResonantTrajectory",
    "TrajectoryDiagnostics",
    "DEFAULT_S0",
    "energy",
    "to_action_angle",
    "from_action_angle",
    "l_squared_closed",
    "l_squared_fourier",
    "free_bubble",
    "beta",
    "perturbed_hamiltonian",
    "rhs_modbeta",
    "rhs_syslap",
    "syslap_f",
    "backward_shoot",
    "time_map",
    "trajectory_diagnostics",
]

DEFAULT_S0 = 20.0


@dataclass(frozen=True)
class ActionAngle:
    """Action-angle coordinates; a >= 1/2, theta kept unwrapped."""

    a: float
    theta: float

    def __post_init__(self) -> None:
        if self.a < 0.5:
            raise ValueError(f"action a = {self.a} violates a >= 1/2")

    @property
    def theta_mod(self) -> float:
        return self.theta % (2.0 * math.pi)


@dataclass(frozen=True)
class ModulationFrame:
    """Scale/phase-curvature/global-phase chart (L, b, gamma) of a bubble."""

    L: float
    b: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError(f"scale L = {self.L} violates L > 0")

    @property
    def ell(self) -> float:
        return 1.0 / (4.0 * self.L**2)


def energy(frame: ModulationFrame) -> float:
    """Hamiltonian E(b, ell) = ell b^2 + 4 ell + 1/(4 ell); always >= 2."""
    ell = frame.ell
    return ell * frame.b**2 + 4.0 * ell + 1.0 / (4.0 * ell)


def to_action_angle(frame: ModulationFrame) -> ActionAngle:
    """Invert the chart: (L, b) with E > 2 to (a, theta)."""
    e = energy(frame)
    if e <= 2.0:
        raise ValueError(f"E(b, ell) = {e} violates E > 2 (fixed point of the chart)")
    a = e / 4.0
    q = math.sqrt(4.0 * a * a - 1.0)
    ell = frame.ell
    cos_t = (2.0 * a - 4.0 * ell) / q
    sin_t = 2.0 * frame.b * ell / q
    return ActionAngle(a=a, theta=math.atan2(sin_t, cos_t))


def from_action_angle(aa: ActionAngle, gamma: float = 0.0) -> ModulationFrame:
    """Chart (a, theta) -> (L, b); a = 1/2 is the fixed point L = 1, b = 0."""
    q = math.sqrt(max(4.0 * aa.a**2 - 1.0, 0.0))
    ell = 0.25 * (2.0 * aa.a - q * math.cos(aa.theta))
    b = q * math.sin(aa.theta) / (2.0 * ell)
    return ModulationFrame(L=1.0 / (2.0 * math.sqrt(ell)), b=b, gamma=gamma)


def l_squared_closed(a: float, theta: float) -> float:
    """L^2(theta, a) = 1 / (2a - sqrt(4a^2-1) cos(theta))."""
    if a < 0.5:
        raise ValueError(f"action a = {a} violates a >= 1/2")
    return 1.0 / (2.0 * a - math.sqrt(4.0 * a * a - 1.0) * math.cos(theta))


def l_squared_fourier(a: float, theta: float, n_terms: int) -> float:
    """Partial Fourier sum 1 + 2 sum_{n=1}^{n_terms} ratio^{n/2} cos(n theta).

    ratio = (2a-1)/(2a+1); the sum converges geometrically to
    :func:`l_squared_closed`.
    """
    if a < 0.5:
        raise ValueError(f"action a = {a} violates a >= 1/2")
    root = math.sqrt((2.0 * a - 1.0) / (2.0 * a + 1.0))
    n = np.arange(1, n_terms + 1)
    return 1.0 + 2.0 * float(np.sum(root**n * np.cos(n * theta)))


def free_bubble(E: float, s: float) -> tuple[float, float, float]:
    """Closed-form unperturbed flow at energy E >= 2, with theta(0) = 0.

    Returns (L^2(s), b(s), t(s)); L^2 and b have period pi/2 in s and

        t(s) = s + sum_{n>0} (1/2n) ((E-2)/(E+2))^{n/2} sin(4ns).
    """
    if E < 2.0:
        raise ValueError(f"energy E = {E} violates E >= 2")
    disc = math.sqrt(max(E * E - 4.0, 0.0))
    denom = E - math.cos(4.0 * s) * disc
    l_sq = 2.0 / denom
    b = 2.0 * disc * math.sin(4.0 * s) / denom
    root = math.sqrt((E - 2.0) / (E + 2.0))
    t = s
    term = root
    n = 1
    while term > 1e-17 and n < 10_000:
        t += term * math.sin(4.0 * n * s) / (2.0 * n)
        term *= root
        n += 1
    return l_sq, b, t


def beta(s: float) -> float:
    """Resonant perturbation amplitude -sin(4s) / (s log s), defined for s > 1."""
    if s <= 1.0:
        raise ValueError(f"beta requires s > 1, got s = {s}")
    return -math.sin(4.0 * s) / (s * math.log(s))


def perturbed_hamiltonian(s: float, a: float, theta: float) -> float:
    """H(s, a, theta) = 4a + beta(s) (2a - sqrt(4a^2-1) cos(theta))."""
    return 4.0 * a + beta(s) * (2.0 * a - math.sqrt(4.0 * a * a - 1.0) * math.cos(theta))


_SINGULAR_GAP = 1e-9


def rhs_modbeta(s: float, aa: ActionAngle) -> tuple[float, float]:
    """(da/ds, dtheta/ds) of the perturbed action-angle system.

    da/ds = -beta sqrt(4a^2-1) sin(theta),
    dtheta/ds = 4 + 2 beta - 4 a beta cos(theta) / sqrt(4a^2-1).
    """
    a = aa.a
    if a <= 0.5 + _SINGULAR_GAP:
        raise ValueError(f"a = {a} violates a > 1/2 (angle equation singular)")
    bt = beta(s)
    q = math.sqrt(4.0 * a * a - 1.0)
    da = -bt * q * math.sin(aa.theta)
    dtheta = 4.0 + 2.0 * bt - bt * 4.0 * a * math.cos(aa.theta) / q
    return da, dtheta


def syslap_f(s: float, rho: float) -> float:
    """Regularizing factor f(s, rho) = 2 e^{-2 rho} / ((log s)^2 - e^{-2 rho})."""
    e2 = math.exp(-2.0 * rho)
    denom = math.log(s) ** 2 - e2
    if denom <= 0.0:
        raise ValueError(f"(log s)^2 <= e^(-2 rho) at s = {s}: chart singular")
    return 2.0 * e2 / denom


def rhs_syslap(s: float, rho: float, psi: float) -> tuple[float, float]:
    """(drho/ds, dpsi/ds) of the regularized system in (rho, psi).

    2a = cosh(rho + log log s) and theta = 4s + psi link it to the
    action-angle chart.
    """
    f = syslap_f(s, rho)  # validates the denominator
    bt = beta(s)
    c4, s4 = math.cos(4.0 * s), math.sin(4.0 * s)
    cp, sp = math.cos(psi), math.sin(psi)
    drho = -1.0 / (s * math.log(s)) - 2.0 * bt * (sp * c4 + cp * s4)
    dpsi = 2.0 * bt - 2.0 * bt * (1.0 + f) * (cp * c4 - sp * s4)
    return drho, dpsi


@dataclass(frozen=True)
class ResonantTrajectory:
    """Sampled backward-shot solution, s ascending; t filled by :func:`time_map`."""

    s: np.ndarray
    a: np.ndarray
    theta: np.ndarray       # unwrapped, = 4s + psi
    rho: np.ndarray
    psi: np.ndarray
    L: np.ndarray
    b: np.ndarray
    tau: np.ndarray         # slow part of the time map, integrated with the shoot
    t: np.ndarray
    s0: float
    M_used: float
    rtol: float
    atol: float
    n_steps: int

    def __post_init__(self) -> None:
        if not np.all(np.diff(self.s) > 0):
            raise ValueError("sample abscissae must be strictly increasing")
        for name in ("s", "a", "theta", "rho", "psi", "L", "b", "tau", "t"):
            getattr(self, name).setflags(write=False)
        object.__setattr__(self, "_interp_cache", {})

    @property
    def has_time(self) -> bool:
        return bool(np.all(np.isfinite(self.t)))

    def _slow_spline(self, name: str) -> CubicSpline:
        cache = self._interp_cache
        if name not in cache:
            cache[name] = CubicSpline(self.s, getattr(self, name))
        return cache[name]

    def frame_at(self, s: float) -> ModulationFrame:
        """(L, b) at arbitrary s by interpolating the slow variables (rho, psi)."""
        s = float(s)
        if not self.s[0] <= s <= self.s[-1]:
            raise ValueError(f"s = {s} outside stored range [{self.s[0]}, {self.s[-1]}]")
        rho = float(self._slow_spline("rho")(s))
        psi = float(self._slow_spline("psi")(s))
        a = 0.5 * math.cosh(rho + math.log(math.log(s)))
        return from_action_angle(ActionAngle(a=a, theta=4.0 * s + psi))

    def a_at(self, s: float) -> float:
        rho = float(self._slow_spline("rho")(s))
        return 0.5 * math.cosh(rho + math.log(math.log(float(s))))

    # --- time map accessors (valid once t is filled) ---------------------

    def t_of_s(self, s) -> np.ndarray | float:
        """t at arbitrary s: the closed-form oscillatory primitive evaluated on
        the interpolated slow variables (rho, psi, tau).  Exact at samples."""
        if not self.has_time:
            raise ValueError("time map not computed; call time_map first")
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if s_arr.min() < self.s[0] or s_arr.max() > self.s[-1]:
            raise ValueError(f"s outside stored range [{self.s[0]}, {self.s[-1]}]")
        rho = self._slow_spline("rho")(s_arr)
        psi = self._slow_spline("psi")(s_arr)
        tau = self._slow_spline("tau")(s_arr)
        a = 0.5 * np.cosh(rho + np.log(np.log(s_arr)))
        big_t = _oscillatory_time_primitive(4.0 * s_arr + psi, a)
        t0_anchor = _oscillatory_time_primitive(self.theta[0], self.a[0])
        out = self.s0 + (big_t - t0_anchor) - (tau - self.tau[0])
        return out if np.ndim(s) else float(out[0])

    def s_of_t(self, t) -> np.ndarray | float:
        """Inverse of t(s) by bracketed root solving (dt/ds = L^2 > 0)."""
        if not self.has_time:
            raise ValueError("time map not computed; call time_map first")
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        for i, ti in enumerate(t_arr):
            if not self.t[0] <= ti <= self.t[-1]:
                raise ValueError(f"t = {ti} outside mapped range [{self.t[0]}, {self.t[-1]}]")
            j = int(np.searchsorted(self.t, ti))
            lo = self.s[max(j - 1, 0)]
            hi = self.s[min(j, self.s.size - 1)]
            if lo == hi:
                out[i] = lo
                continue
            out[i] = brentq(lambda s: float(self.t_of_s(s)) - ti, lo, hi, xtol=1e-12)
        return out if np.ndim(t) else float(out[0])


def _default_grid(M: float, s0: float) -> np.ndarray:
    decades = math.log10(M / s0)
    n = max(1024, int(600 * decades))
    return np.geomspace(s0, M, n)


def backward_shoot(
    M: float,
    s0: float = DEFAULT_S0,
    tol: float = 1e-10,
    *,
    atol: float = 1e-13,
    s_grid: np.ndarray | None = None,
    max_step: float = math.pi / 8.0,
    perturbed: bool = True,
) -> ResonantTrajectory:
    """Integrate the regularized system backward from (rho, psi) = (0, 0) at s = M.

    The adaptive 5(4) pair keeps the local error per step below
    atol + tol * |y|; the step never exceeds max_step (pi/8 resolves the
    frequency-4 forcing with >= 4 stages per oscillation).  Alongside
    (rho, psi) the driver accumulates the slow component of dt/ds, so that
    :func:`time_map` can assemble the physical time without re-resolving the
    O(1)-amplitude oscillations of L^2.

    With perturbed=False the forcing is switched off and the shoot must
    reproduce the closed-form free flow at energy E = 2 cosh(log log M).
    """
    if M <= s0:
        raise ValueError(f"horizon M = {M} must exceed s0 = {s0}")
    if s0 <= math.e:
        raise ValueError(f"s0 = {s0} must exceed e so log log s is defined")
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    grid = _default_grid(M, s0) if s_grid is None else np.asarray(s_grid, dtype=float)
    if grid[0] < s0 or grid[-1] > M:
        raise ValueError("sample grid must lie inside [s0, M]")
    s_desc = grid[::-1].copy()

    samples, n_steps, status, s_fail = shoot_bubble(
        M, tol, atol, max_step, s_desc, 1.0 if perturbed else 0.0
    )
    if status == 1:
        raise ArithmeticError(f"singularity (log s)^2 <= e^(-2 rho) near s = {s_fail}")
    if status == 2:
        raise ArithmeticError(f"step size underflow near s = {s_fail}")

    psi = samples[::-1, 0].copy()
    rho = samples[::-1, 1].copy()
    tau = samples[::-1, 2].copy()
    s = grid.copy()
    r = rho + np.log(np.log(s))
    a = 0.5 * np.cosh(r)
    theta = 4.0 * s + psi
    q = np.sqrt(4.0 * a * a - 1.0)
    ell = 0.25 * (2.0 * a - q * np.cos(theta))
    L = 1.0 / (2.0 * np.sqrt(ell))
    b = q * np.sin(theta) / (2.0 * ell)
    return ResonantTrajectory(
        s=s,
        a=a,
        theta=theta,
        rho=rho,
        psi=psi,
        L=L,
        b=b,
        tau=tau,
        t=np.full_like(s, np.nan),
        s0=s0,
        M_used=M,
        rtol=tol,
        atol=atol,
        n_steps=int(n_steps),
    )


def _oscillatory_time_primitive(theta: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Primitive of L^2 d(theta)/4 at frozen action:
    T = (theta + 2 arctan(r sin(theta) / (1 - r cos(theta)))) / 4 with
    r = sqrt((2a-1)/(2a+1)); continuous since 1 - r cos(theta) > 0.
    """
    root = np.sqrt((2.0 * a - 1.0) / (2.0 * a + 1.0))
    return 0.25 * (
        theta + 2.0 * np.arctan(root * np.sin(theta) / (1.0 - root * np.cos(theta)))
    )


def time_map(traj: ResonantTrajectory) -> ResonantTrajectory:
    """Fill the physical-time column: t(s0) = s0 and dt/ds = L^2 > 0.

    t is the cumulative integral of L^2, assembled as the closed-form
    oscillatory primitive at frozen (a, psi) plus the slow correction
    integral accumulated during the shoot; the same assembly on interpolated
    slow variables evaluates t(s) between samples, and s(t) inverts it by
    bracketed root solving.
    """
    T = _oscillatory_time_primitive(traj.theta, traj.a)
    t = traj.s0 + (T - T[0]) - (traj.tau - traj.tau[0])
    if not np.all(np.diff(t) > 0):
        raise ArithmeticError("time map lost monotonicity; refine the sample grid")
    return replace(traj, t=t)


@dataclass(frozen=True)
class TrajectoryDiagnostics:
    """Fitted asymptotic constants of a resonant trajectory."""

    slope: float                 # least-squares slope of a against ln s
    intercept: float
    fit_window: tuple[float, float]
    envelope_s_rho: float        # sup of s |rho(s)|
    envelope_s_psi: float        # sup of s |psi(s)|, also bounds theta - 4s
    l2_log_bound: float          # max(sup L^2/log s, sup 1/(L^2 log s))
    energy_identity_max: float   # sup |E(b, L) - 4a| along the samples
    time_bound: float | None     # sup |t - s| / (log s)^2, when t is filled

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "fit_window": list(self.fit_window),
            "envelope_s_rho": self.envelope_s_rho,
            "envelope_s_psi": self.envelope_s_psi,
            "l2_log_bound": self.l2_log_bound,
            "energy_identity_max": self.energy_identity_max,
            "time_bound": self.time_bound,
        }


def trajectory_diagnostics(
    traj: ResonantTrajectory,
    fit_window: tuple[float, float] = (1e3, 1e6),
) -> TrajectoryDiagnostics:
    """Slope and envelope fits; requires at least two decades of samples."""
    if traj.s[-1] / traj.s[0] < 100.0:
        raise ValueError("trajectory must span at least two decades in s")
    lo = max(fit_window[0], traj.s[0])
    hi = min(fit_window[1], traj.s[-1])
    sel = (traj.s >= lo) & (traj.s <= hi)
    if sel.sum() < 16:
        raise ValueError(f"too few samples in fit window [{lo}, {hi}]")
    x = np.log(traj.s[sel])
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, traj.a[sel], rcond=None)

    logs = np.log(traj.s)
    l_sq = traj.L**2
    ell = 1.0 / (4.0 * l_sq)
    e_vals = ell * traj.b**2 + 4.0 * ell + 1.0 / (4.0 * ell)
    time_bound = None
    if traj.has_time:
        time_bound = float(np.max(np.abs(traj.t - traj.s) / logs**2))
    return TrajectoryDiagnostics(
        slope=float(slope),
        intercept=float(intercept),
        fit_window=(lo, hi),
        envelope_s_rho=float(np.max(np.abs(traj.s * traj.rho))),
        envelope_s_psi=float(np.max(np.abs(traj.s * traj.psi))),
        l2_log_bound=float(max(np.max(l_sq / logs), np.max(1.0 / (l_sq * logs)))),
        energy_identity_max=float(np.max(np.abs(e_vals - 4.0 * traj.a))),
        time_bound=time_bound,
    )
