"""Jitted Dormand-Prince 5(4) drivers for the two long oscillatory integrations.

Both the backward shoot of the modulation system and the backward
integration of the renormalized PDE resolve O(1)-frequency oscillations
over ranges of up to 10^6 in s, i.e. 10^6 .. 10^7 accepted steps per run.
A generic Python-loop integrator spends tens of microseconds per step on
bookkeeping alone, so the embedded 5(4) pair is compiled with numba; the
Butcher tableau and the step controller match the classical Dormand-Prince
scheme (error per step below atol + rtol * |y|, growth factor clamped to
[0.2, 5], safety 0.9).

Integration runs backward (decreasing s) from terminal data; steps are
clamped so every requested output abscissa is hit exactly.  Status codes:
0 ok, 1 singular right-hand side, 2 step underflow.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Dormand-Prince coefficients
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True, nogil=True)
def _bubble_rhs(s, rho, psi, beta_scale):
    """Right-hand side of the regularized modulation system plus the
    slow part of dt/ds (everything but the closed-form oscillatory
    primitive of L^2 at frozen action and phase shift).

    Returns (psi_s, rho_s, correction, singular_flag).
    """
    logs = math.log(s)
    slog = s * logs
    beta = -beta_scale * math.sin(4.0 * s) / slog
    e2 = math.exp(-2.0 * rho)
    denom = logs * logs - e2
    if denom <= 0.0:
        return 0.0, 0.0, 0.0, True
    f = 2.0 * e2 / denom
    c4 = math.cos(4.0 * s)
    s4 = math.sin(4.0 * s)
    cp = math.cos(psi)
    sp = math.sin(psi)
    psi_s = 2.0 * beta - 2.0 * beta * (1.0 + f) * (cp * c4 - sp * s4)
    rho_s = -1.0 / slog - 2.0 * beta * (sp * c4 + cp * s4)

    # slow remainder of dt/ds = L^2: L^2 - d/ds T(theta(s), a(s)) at the
    # current point equals -(L^2/4) psi_s - T_a a_s
    r = rho + math.log(logs)
    a = 0.5 * math.cosh(r)
    sq = math.sinh(r)
    theta = 4.0 * s + psi
    cth = math.cos(theta)
    sth = math.sin(theta)
    l2 = 1.0 / (2.0 * a - sq * cth)
    a_s = 0.5 * sq * (rho_s + 1.0 / slog)
    ratio = math.sqrt((2.0 * a - 1.0) / (2.0 * a + 1.0))
    ratio_a = 2.0 / (ratio * (2.0 * a + 1.0) ** 2)
    t_a = 0.5 * ratio_a * sth / (1.0 - 2.0 * ratio * cth + ratio * ratio)
    corr = 0.25 * l2 * psi_s + t_a * a_s
    return psi_s, rho_s, corr, False


@njit(cache=True, nogil=True)
def shoot_bubble(M, rtol, atol, max_step, s_out, beta_scale):
    """Integrate (psi, rho, tau) backward from (0, 0, 0) at s = M.

    s_out must be strictly decreasing with s_out[0] <= M; every entry is
    hit exactly.  Returns (samples[n, 3], n_steps, status, s_fail).
    """
    n_out = s_out.shape[0]
    out = np.empty((n_out, 3))
    s = M
    y0 = 0.0  # psi
    y1 = 0.0  # rho
    y2 = 0.0  # tau (slow time-map correction)
    k10, k11, k12, bad = _bubble_rhs(s, y1, y0, beta_scale)
    if bad:
        return out, 0, 1, s
    h = -1e-4
    i_out = 0
    n_steps = 0
    while i_out < n_out:
        target = s_out[i_out]
        if s <= target * (1.0 + 1e-12):
            out[i_out, 0] = y0
            out[i_out, 1] = y1
            out[i_out, 2] = y2
            i_out += 1
            continue
        if -h > max_step:
            h = -max_step
        if s + h < target:
            h = target - s
        if -h < 1e-14 * s:
            return out, n_steps, 2, s

        a0 = y0 + h * _A21 * k10
        a1 = y1 + h * _A21 * k11
        k20, k21, k22, bad = _bubble_rhs(s + 0.2 * h, a1, a0, beta_scale)
        if bad:
            return out, n_steps, 1, s
        a0 = y0 + h * (_A31 * k10 + _A32 * k20)
        a1 = y1 + h * (_A31 * k11 + _A32 * k21)
        k30, k31, k32, bad = _bubble_rhs(s + 0.3 * h, a1, a0, beta_scale)
        if bad:
            return out, n_steps, 1, s
        a0 = y0 + h * (_A41 * k10 + _A42 * k20 + _A43 * k30)
        a1 = y1 + h * (_A41 * k11 + _A42 * k21 + _A43 * k31)
        k40, k41, k42, bad = _bubble_rhs(s + 0.8 * h, a1, a0, beta_scale)
        if bad:
            return out, n_steps, 1, s
        a0 = y0 + h * (_A51 * k10 + _A52 * k20 + _A53 * k30 + _A54 * k40)
        a1 = y1 + h * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41)
        k50, k51, k52, bad = _bubble_rhs(s + 8.0 / 9.0 * h, a1, a0, beta_scale)
        if bad:
            return out, n_steps, 1, s
        a0 = y0 + h * (_A61 * k10 + _A62 * k20 + _A63 * k30 + _A64 * k40 + _A65 * k50)
        a1 = y1 + h * (_A61 * k11 + _A62 * k21 + _A63 * k31 + _A64 * k41 + _A65 * k51)
        k60, k61, k62, bad = _bubble_rhs(s + h, a1, a0, beta_scale)
        if bad:
            return out, n_steps, 1, s

        z0 = y0 + h * (_B1 * k10 + _B3 * k30 + _B4 * k40 + _B5 * k50 + _B6 * k60)
        z1 = y1 + h * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
        z2 = y2 + h * (_B1 * k12 + _B3 * k32 + _B4 * k42 + _B5 * k52 + _B6 * k62)
        k70, k71, k72, bad = _bubble_rhs(s + h, z1, z0, beta_scale)
        if bad:
            return out, n_steps, 1, s

        e0 = h * (_E1 * k10 + _E3 * k30 + _E4 * k40 + _E5 * k50 + _E6 * k60 + _E7 * k70)
        e1 = h * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
        e2 = h * (_E1 * k12 + _E3 * k32 + _E4 * k42 + _E5 * k52 + _E6 * k62 + _E7 * k72)
        sc0 = atol + rtol * max(abs(y0), abs(z0))
        sc1 = atol + rtol * max(abs(y1), abs(z1))
        sc2 = atol + rtol * max(abs(y2), abs(z2))
        err = math.sqrt(((e0 / sc0) ** 2 + (e1 / sc1) ** 2 + (e2 / sc2) ** 2) / 3.0)

        if err <= 1.0:
            s = s + h
            y0, y1, y2 = z0, z1, z2
            k10, k11, k12 = k70, k71, k72
            n_steps += 1
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err**-0.2)
        else:
            factor = max(0.2, 0.9 * err**-0.2)
        h = h * factor
    return out, n_steps, 0, s


@njit(cache=True, nogil=True)
def _pde_rhs(s, g, gen, source, freq, buf_w, buf_out):
    """g' = -i beta(s) [Phi (gen (Phi* g)) + Phi source] in the interaction picture.

    Phi = diag(e^{i freq_n s}); gen is the real coupling matrix |y|^2 - alpha h_0
    promoted to complex; source its action on the ground state.
    """
    logs = math.log(s)
    beta = -math.sin(4.0 * s) / (s * logs)
    n = g.shape[0]
    for j in range(n):
        ph = complex(math.cos(freq[j] * s), -math.sin(freq[j] * s))
        buf_w[j] = ph * g[j]
    for j in range(n):
        acc = 0.0 + 0.0j
        for k in range(n):
            acc += gen[j, k] * buf_w[k]
        acc += source[j]
        ph = complex(math.cos(freq[j] * s), math.sin(freq[j] * s))
        buf_out[j] = -1j * beta * ph * acc
    return buf_out


@njit(cache=True, nogil=True)
def evolve_pde(M, rtol, atol, max_step, s_out, gen, source, freq):
    """Backward integration of the interaction-picture remainder from g(M) = 0.

    Returns (samples[n_out, K] complex, n_steps, status, s_fail).
    """
    n = gen.shape[0]
    n_out = s_out.shape[0]
    out = np.empty((n_out, n), dtype=np.complex128)
    y = np.zeros(n, dtype=np.complex128)
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    k5 = np.empty(n, dtype=np.complex128)
    k6 = np.empty(n, dtype=np.complex128)
    k7 = np.empty(n, dtype=np.complex128)
    z = np.empty(n, dtype=np.complex128)
    arg = np.empty(n, dtype=np.complex128)
    buf_w = np.empty(n, dtype=np.complex128)

    s = M
    k1[:] = _pde_rhs(s, y, gen, source, freq, buf_w, k1)
    h = -1e-4
    i_out = 0
    n_steps = 0
    while i_out < n_out:
        target = s_out[i_out]
        if s <= target * (1.0 + 1e-12):
            out[i_out, :] = y
            i_out += 1
            continue
        if -h > max_step:
            h = -max_step
        if s + h < target:
            h = target - s
        if -h < 1e-14 * s:
            return out, n_steps, 2, s

        for j in range(n):
            arg[j] = y[j] + h * _A21 * k1[j]
        k2[:] = _pde_rhs(s + 0.2 * h, arg, gen, source, freq, buf_w, k2)
        for j in range(n):
            arg[j] = y[j] + h * (_A31 * k1[j] + _A32 * k2[j])
        k3[:] = _pde_rhs(s + 0.3 * h, arg, gen, source, freq, buf_w, k3)
        for j in range(n):
            arg[j] = y[j] + h * (_A41 * k1[j] + _A42 * k2[j] + _A43 * k3[j])
        k4[:] = _pde_rhs(s + 0.8 * h, arg, gen, source, freq, buf_w, k4)
        for j in range(n):
            arg[j] = y[j] + h * (_A51 * k1[j] + _A52 * k2[j] + _A53 * k3[j] + _A54 * k4[j])
        k5[:] = _pde_rhs(s + 8.0 / 9.0 * h, arg, gen, source, freq, buf_w, k5)
        for j in range(n):
            arg[j] = y[j] + h * (
                _A61 * k1[j] + _A62 * k2[j] + _A63 * k3[j] + _A64 * k4[j] + _A65 * k5[j]
            )
        k6[:] = _pde_rhs(s + h, arg, gen, source, freq, buf_w, k6)
        for j in range(n):
            z[j] = y[j] + h * (
                _B1 * k1[j] + _B3 * k3[j] + _B4 * k4[j] + _B5 * k5[j] + _B6 * k6[j]
            )
        k7[:] = _pde_rhs(s + h, z, gen, source, freq, buf_w, k7)

        err = 0.0
        for j in range(n):
            e = h * (
                _E1 * k1[j]
                + _E3 * k3[j]
                + _E4 * k4[j]
                + _E5 * k5[j]
                + _E6 * k6[j]
                + _E7 * k7[j]
            )
            sc = atol + rtol * max(abs(y[j]), abs(z[j]))
            err += (abs(e) / sc) ** 2
        err = math.sqrt(err / n)

        if err <= 1.0:
            s = s + h
            for j in range(n):
                y[j] = z[j]
                k1[j] = k7[j]
            n_steps += 1
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err**-0.2)
        else:
            factor = max(0.2, 0.9 * err**-0.2)
        h = h * factor
    return out, n_steps, 0, s
