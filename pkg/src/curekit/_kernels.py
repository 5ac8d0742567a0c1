"""Compiled inner loops for the transient 1-d solver.

Everything here works in degC and seconds on plain float64 arrays; the
public wrappers in :mod:`curekit.fe_core` own unit handling and object
construction.  The air program arrives as per-case piecewise-linear
breakpoints (minutes, degC); evaluation walks the segments with a rolling
index, so each step costs O(1).

The cure source uses the start-of-step state (implicit conduction, explicit
conversion).  The step rate is capped at (1 - alpha)/dt so a single step can
never release more enthalpy than the reaction has left.
"""

import math

import numpy as np
from numba import njit, prange

GAS_CONSTANT = 8.314462618
KELVIN_OFFSET = 273.15

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_SINGULAR = 2


@njit(cache=True)
def cure_rate_scalar(alpha, t_c, pre, ea, m_ord, n_ord, diff_c, ac0, act):
    """Rate law evaluated at one (alpha, T degC) point; mirrors material.cure_rate."""
    if alpha >= 1.0:
        return 0.0
    t_k = t_c + KELVIN_OFFSET
    gate = diff_c * (alpha - (ac0 + act * t_k))
    if gate > 500.0:
        gate = 500.0
    elif gate < -500.0:
        gate = -500.0
    arrhenius = pre * math.exp(-ea / (GAS_CONSTANT * t_k))
    conversion = alpha ** m_ord * (1.0 - alpha) ** n_ord
    return arrhenius * conversion / (1.0 + math.exp(gate))


@njit(cache=True)
def _integrate(temps, alpha,
               h1, len_part, len_tool, h2,
               rcp_part, k_part, rcp_tool, k_tool, rho_h,
               pre, ea, m_ord, n_ord, diff_c, ac0, act,
               n_el, dt, t0_min,
               bp_t, bp_v, n_bp,
               n_steps, rec_every,
               out_part, out_tool, out_air, out_alpha):
    """Advance ``temps``/``alpha`` in place over ``n_steps`` of ``dt`` seconds.

    Records part-centre, tool-bottom, air and centre conversion every
    ``rec_every`` steps (index 0 = initial state).  Returns (status, step of
    failure or -1).
    """
    n = 2 * n_el + 1
    iface = n_el
    ell_p = len_part / n_el
    ell_t = len_tool / n_el

    # lumped mass per node (J/(m^2 K))
    mass = np.empty(n)
    for i in range(n):
        mass[i] = 0.0
    for e in range(n_el):
        half = rcp_tool * ell_t * 0.5
        mass[e] += half
        mass[e + 1] += half
    for e in range(n_el):
        half = rcp_part * ell_p * 0.5
        mass[iface + e] += half
        mass[iface + e + 1] += half

    # tridiagonal stiffness with convective terms on the boundary diagonals
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    g_t = k_tool / ell_t
    for e in range(n_el):
        diag[e] += g_t
        diag[e + 1] += g_t
        upper[e] -= g_t
        lower[e + 1] -= g_t
    g_p = k_part / ell_p
    for e in range(n_el):
        diag[iface + e] += g_p
        diag[iface + e + 1] += g_p
        upper[iface + e] -= g_p
        lower[iface + e + 1] -= g_p
    diag[0] += h2
    diag[n - 1] += h1

    # constant left-hand side: factorise once (Thomas)
    fac_d = np.empty(n)
    fac_w = np.empty(n)
    for i in range(n):
        fac_d[i] = mass[i] / dt + diag[i]
    fac_w[0] = 0.0
    for i in range(1, n):
        if fac_d[i - 1] == 0.0:
            return STATUS_SINGULAR, 0
        fac_w[i] = lower[i] / fac_d[i - 1]
        fac_d[i] = fac_d[i] - fac_w[i] * upper[i - 1]
    if fac_d[n - 1] == 0.0:
        return STATUS_SINGULAR, 0

    # lumped source weights over part nodes
    src_w = np.empty(n_el + 1)
    src_w[0] = ell_p * 0.5
    for j in range(1, n_el):
        src_w[j] = ell_p
    src_w[n_el] = ell_p * 0.5

    # part-centre interpolation (exact node for even n_el)
    cpos = 0.5 * n_el
    c0 = int(cpos)
    if c0 > n_el - 1:
        c0 = n_el - 1
    cw = cpos - c0

    rhs = np.empty(n)
    rates = np.empty(n_el + 1)

    seg = 0
    t_min = t0_min
    while seg < n_bp - 2 and t_min > bp_t[seg + 1]:
        seg += 1
    air = _air_at(t_min, bp_t, bp_v, n_bp, seg)

    out_part[0] = (1.0 - cw) * temps[iface + c0] + cw * temps[iface + c0 + 1]
    out_tool[0] = temps[0]
    out_air[0] = air
    out_alpha[0] = (1.0 - cw) * alpha[c0] + cw * alpha[c0 + 1]
    k_out = 1

    for step in range(1, n_steps + 1):
        t_min = t0_min + step * dt / 60.0
        while seg < n_bp - 2 and t_min > bp_t[seg + 1]:
            seg += 1
        air = _air_at(t_min, bp_t, bp_v, n_bp, seg)

        if rho_h > 0.0:
            for j in range(n_el + 1):
                r = cure_rate_scalar(alpha[j], temps[iface + j], pre, ea, m_ord, n_ord, diff_c, ac0, act)
                cap = (1.0 - alpha[j]) / dt
                if r > cap:
                    r = cap
                rates[j] = r
        else:
            for j in range(n_el + 1):
                rates[j] = 0.0

        for i in range(n):
            rhs[i] = mass[i] / dt * temps[i]
        rhs[0] += h2 * air
        rhs[n - 1] += h1 * air
        for j in range(n_el + 1):
            rhs[iface + j] += rho_h * rates[j] * src_w[j]

        # forward elimination / back substitution
        for i in range(1, n):
            rhs[i] -= fac_w[i] * rhs[i - 1]
        temps[n - 1] = rhs[n - 1] / fac_d[n - 1]
        for i in range(n - 2, -1, -1):
            temps[i] = (rhs[i] - upper[i] * temps[i + 1]) / fac_d[i]

        for j in range(n_el + 1):
            a = alpha[j] + dt * rates[j]
            alpha[j] = 1.0 if a > 1.0 else a

        if step % rec_every == 0:
            centre = (1.0 - cw) * temps[iface + c0] + cw * temps[iface + c0 + 1]
            if not (math.isfinite(centre) and math.isfinite(temps[0])):
                return STATUS_NONFINITE, step
            out_part[k_out] = centre
            out_tool[k_out] = temps[0]
            out_air[k_out] = air
            out_alpha[k_out] = (1.0 - cw) * alpha[c0] + cw * alpha[c0 + 1]
            k_out += 1

    for i in range(n):
        if not math.isfinite(temps[i]):
            return STATUS_NONFINITE, n_steps
    return STATUS_OK, -1


@njit(cache=True, inline="always")
def _air_at(t_min, bp_t, bp_v, n_bp, seg):
    if t_min >= bp_t[n_bp - 1]:
        return bp_v[n_bp - 1]
    if t_min <= bp_t[0]:
        return bp_v[0]
    span = bp_t[seg + 1] - bp_t[seg]
    if span <= 0.0:
        return bp_v[seg + 1]
    w = (t_min - bp_t[seg]) / span
    return bp_v[seg] + w * (bp_v[seg + 1] - bp_v[seg])


@njit(cache=True, parallel=True)
def run_cases(h1s, l1s, l2s, h2s,
              rcp_part, k_part, rcp_tool, k_tool, rho_h,
              pre, ea, m_ord, n_ord, diff_c, ac0, act, alpha0,
              n_el, dt, t0_c,
              bp_t, bp_v, n_bp,
              n_steps, rec_every,
              out_part, out_tool, out_air, out_alpha,
              final_alpha, status, fail_step):
    """Independent transient solves, one per case, in parallel.

    Per-case air programs live in the padded rows of ``bp_t``/``bp_v``.
    Outputs are written into the first ``n_steps[b] // rec_every + 1``
    columns of each row; the rest keeps its NaN padding.
    """
    n_cases = h1s.shape[0]
    for b in prange(n_cases):
        temps = np.full(2 * n_el + 1, t0_c)
        alpha = np.full(n_el + 1, alpha0)
        st, fs = _integrate(temps, alpha,
                            h1s[b], l1s[b], l2s[b], h2s[b],
                            rcp_part, k_part, rcp_tool, k_tool, rho_h,
                            pre, ea, m_ord, n_ord, diff_c, ac0, act,
                            n_el, dt, 0.0,
                            bp_t[b], bp_v[b], n_bp[b],
                            n_steps[b], rec_every,
                            out_part[b], out_tool[b], out_air[b], out_alpha[b])
        status[b] = st
        fail_step[b] = fs
        for j in range(n_el + 1):
            final_alpha[b, j] = alpha[j]
