"""Compiled inner loops for the damper model and the time-history solver."""
import math

import numpy as np
from numba import njit

MODE_LINEAR = 0
MODE_BOUC_WEN = 1
LAW_PASSIVE_ON = 0
LAW_CLIPPED = 1

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_NON_FINITE = 2


@njit(cache=True, nogil=True)
def bw_rate(z, v, gamma, beta, a_bw, n_bw):
    az = abs(z)
    # integer exponents (the usual case) avoid pow()
    if n_bw == 2.0:
        p1 = az
    elif n_bw == 1.0:
        p1 = 1.0
    else:
        p1 = az ** (n_bw - 1.0)
    pn = p1 * az
    return -gamma * abs(v) * z * p1 - beta * v * pn + a_bw * v


@njit(cache=True, nogil=True)
def _pow_int_fast(x, p):
    if p == 1.0:
        return x
    if p == 0.0:
        return 1.0
    if p == 2.0:
        return x * x
    return x ** p


@njit(cache=True, nogil=True)
def bw_substeps(z, v, dt, gamma, beta, a_bw, n_bw):
    # RK4 step count from a bound on |d(zdot)/dz| so that h*L <= 0.2
    denom = abs(gamma) + abs(beta)
    if denom == 0.0:
        return 1
    zb = abs(a_bw) / denom
    if n_bw != 1.0:
        zb = zb ** (1.0 / n_bw) if n_bw != 2.0 else math.sqrt(zb)
    zref = max(abs(z), zb)
    lip = abs(v) * (n_bw * denom * _pow_int_fast(zref, n_bw - 1.0) + 1.0)
    n = int(math.ceil(lip * dt / 0.2))
    if n < 1:
        n = 1
    if n > 100000:
        n = 100000
    return n


@njit(cache=True, nogil=True)
def _rk4(z, v, h, gamma, beta, a_bw, n_bw):
    k1 = bw_rate(z, v, gamma, beta, a_bw, n_bw)
    k2 = bw_rate(z + 0.5 * h * k1, v, gamma, beta, a_bw, n_bw)
    k3 = bw_rate(z + 0.5 * h * k2, v, gamma, beta, a_bw, n_bw)
    k4 = bw_rate(z + h * k3, v, gamma, beta, a_bw, n_bw)
    return z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True, nogil=True)
def bw_advance(z, v, dt, gamma, beta, a_bw, n_bw, nsub):
    """Classical RK4 on the hysteretic state with ``v`` held constant."""
    if nsub <= 0:
        nsub = bw_substeps(z, v, dt, gamma, beta, a_bw, n_bw)
    if nsub == 1:
        return _rk4(z, v, dt, gamma, beta, a_bw, n_bw)
    h = dt / nsub
    for _ in range(nsub):
        z = _rk4(z, v, h, gamma, beta, a_bw, n_bw)
    return z


@njit(cache=True, nogil=True)
def single_damper(v, z, dt, command, mode, c0, alpha, gamma, beta, a_bw, n_bw, f_max, nsub):
    """Return ``(force, z_new)`` for one device."""
    if mode == MODE_LINEAR:
        f = -command * c0 * v
        z_new = z
    else:
        z_new = bw_advance(z, v, dt, gamma, beta, a_bw, n_bw, nsub)
        f = -command * (c0 * v + alpha * z_new)
    if f > f_max:
        f = f_max
    elif f < -f_max:
        f = -f_max
    return f, z_new


@njit(cache=True, nogil=True)
def _tri_factor(diag, off):
    # LDL-free Thomas elimination for a symmetric tridiagonal matrix
    n = diag.size
    cp = np.empty(n)
    dp = np.empty(n)
    dp[0] = diag[0]
    for i in range(1, n):
        cp[i] = off[i - 1] / dp[i - 1]
        dp[i] = diag[i] - cp[i] * off[i - 1]
    return cp, dp


@njit(cache=True, nogil=True)
def _tri_solve(cp, dp, off, rhs, out):
    n = rhs.size
    out[0] = rhs[0]
    for i in range(1, n):
        out[i] = rhs[i] - cp[i] * out[i - 1]
    out[n - 1] = out[n - 1] / dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = (out[i] - off[i] * out[i + 1]) / dp[i]


@njit(cache=True, nogil=True)
def _tri_matvec(diag, off, x, out):
    n = x.size
    for i in range(n):
        s = diag[i] * x[i]
        if i > 0:
            s += off[i - 1] * x[i - 1]
        if i < n - 1:
            s += off[i] * x[i + 1]
        out[i] = s


@njit(cache=True, nogil=True)
def _damper_forces(v, z, z_new, f_nl, f_tot, counts, cmd, dt, mode, c0, alpha, gamma, beta,
                   a_bw, n_bw, f_max):
    # f_tot: net device force per story; f_nl: the part not already carried
    # implicitly by the viscous term folded into the damping matrix
    n = v.size
    for i in range(n):
        if counts[i] == 0.0:
            f_nl[i] = 0.0
            f_tot[i] = 0.0
            z_new[i] = z[i]
            continue
        vrel = v[i] - (v[i - 1] if i > 0 else 0.0)
        fi, zi = single_damper(vrel, z[i], dt, cmd[i], mode, c0, alpha, gamma, beta, a_bw, n_bw, f_max, 0)
        f_tot[i] = counts[i] * fi
        f_nl[i] = counts[i] * (fi + cmd[i] * c0 * vrel)
        z_new[i] = zi


@njit(cache=True, nogil=True)
def _assemble_damping(c_diag, c_off, counts, cmd, c0, out_diag, out_off):
    n = c_diag.size
    for i in range(n):
        out_diag[i] = c_diag[i]
    for i in range(n - 1):
        out_off[i] = c_off[i]
    for i in range(n):
        if counts[i] == 0.0:
            continue
        ce = counts[i] * cmd[i] * c0
        out_diag[i] += ce
        if i > 0:
            out_diag[i - 1] += ce
            out_off[i - 1] -= ce


@njit(cache=True, nogil=True)
def _solve_step(cp, dp, keff_off, rhs, f_nl, u, v, a, dt, b0, b2, tmp, u1, v1, a1):
    n = u.size
    for i in range(n):
        tmp[i] = rhs[i] + f_nl[i] - (f_nl[i + 1] if i < n - 1 else 0.0)
    _tri_solve(cp, dp, keff_off, tmp, u1)
    for i in range(n):
        a1[i] = b0 * (u1[i] - u[i]) - b2 * v[i] - a[i]
        v1[i] = v[i] + 0.5 * dt * (a[i] + a1[i])


@njit(cache=True, nogil=True)
def newmark(mass, k_diag, k_off, c_diag, c_off, counts, ag, dt, stride, x0, v0,
            mode, c0, alpha, gamma, beta, a_bw, n_bw, f_max, law, tol, max_iter, store):
    """Average-acceleration Newmark with fixed-point iteration on damper forces.

    The viscous device term ``count * command * c0`` is folded into the
    damping matrix; the fixed-point iteration runs on the remaining
    (hysteretic and saturation) part of the device force, with tolerance
    ``tol`` relative to ``max(1 N, max |force|)``.

    ``ag`` is sampled at the integration step ``dt``; every ``stride``-th
    step (starting with step 0) is a record sample. With ``store`` true the
    full displacement/velocity/absolute-acceleration/device-force histories
    are returned at record samples, otherwise only per-story peak |drift|.
    Returns ``(status, failed_step, x, v, a_abs, fd, peak_drift)``.
    """
    n = mass.size
    nsteps = ag.size - 1
    nrec = nsteps // stride + 1
    rows = nrec if store else 1
    xs = np.zeros((rows, n))
    vs = np.zeros((rows, n))
    aa = np.zeros((rows, n))
    fs = np.zeros((rows, n))
    peak = np.zeros(n)

    b0 = 4.0 / (dt * dt)
    b1 = 2.0 / dt
    b2 = 4.0 / dt

    any_damper = False
    for i in range(n):
        if counts[i] != 0.0:
            any_damper = True

    cmd = np.ones(n)
    ct_diag = np.empty(n)
    ct_off = np.empty(max(n - 1, 0))
    _assemble_damping(c_diag, c_off, counts, cmd, c0, ct_diag, ct_off)
    keff_off = k_off + b1 * ct_off
    cp, dp = _tri_factor(k_diag + b0 * mass + b1 * ct_diag, keff_off)

    u = x0.copy()
    v = v0.copy()
    z = np.zeros(n)
    z_new = np.zeros(n)
    f_nl = np.zeros(n)
    f_try = np.zeros(n)
    f_tot = np.zeros(n)
    tmp = np.zeros(n)
    tmp2 = np.zeros(n)
    rhs = np.zeros(n)
    u1 = np.zeros(n)
    v1 = np.zeros(n)
    a1 = np.zeros(n)

    # initial acceleration from dynamic equilibrium, hysteretic state at rest
    _tri_matvec(k_diag, k_off, u, tmp)
    _tri_matvec(ct_diag, ct_off, v, tmp2)
    a = np.empty(n)
    for i in range(n):
        a[i] = (-mass[i] * ag[0] - tmp[i] - tmp2[i]) / mass[i]

    for i in range(n):
        d = u[i] - (u[i - 1] if i > 0 else 0.0)
        if abs(d) > peak[i]:
            peak[i] = abs(d)
    if store:
        for i in range(n):
            xs[0, i] = u[i]
            vs[0, i] = v[i]
            aa[0, i] = a[i] + ag[0]

    for step in range(1, nsteps + 1):
        g = ag[step]
        if law == LAW_CLIPPED and any_damper:
            changed = False
            for i in range(n):
                d = u[i] - (u[i - 1] if i > 0 else 0.0)
                vr = v[i] - (v[i - 1] if i > 0 else 0.0)
                c_new = 1.0 if d * vr > 0.0 else 0.0
                if c_new != cmd[i]:
                    changed = True
                cmd[i] = c_new
            if changed:
                _assemble_damping(c_diag, c_off, counts, cmd, c0, ct_diag, ct_off)
                keff_off = k_off + b1 * ct_off
                cp, dp = _tri_factor(k_diag + b0 * mass + b1 * ct_diag, keff_off)

        # effective load without the iterated device force
        for i in range(n):
            tmp[i] = b0 * u[i] + b2 * v[i] + a[i]
            tmp2[i] = b1 * u[i] + v[i]
        _tri_matvec(ct_diag, ct_off, tmp2, rhs)
        for i in range(n):
            rhs[i] += mass[i] * tmp[i] - mass[i] * g

        iters = 0
        while True:
            _solve_step(cp, dp, keff_off, rhs, f_nl, u, v, a, dt, b0, b2, tmp, u1, v1, a1)
            if not any_damper:
                break
            _damper_forces(v1, z, z_new, f_try, f_tot, counts, cmd, dt, mode, c0, alpha,
                           gamma, beta, a_bw, n_bw, f_max)
            err = 0.0
            scale = 1.0
            for i in range(n):
                e = abs(f_try[i] - f_nl[i])
                if e > err:
                    err = e
                if abs(f_tot[i]) > scale:
                    scale = abs(f_tot[i])
            iters += 1
            if err <= tol * scale:
                break
            for i in range(n):
                f_nl[i] = f_try[i]
            if iters >= max_iter:
                return STATUS_NO_CONVERGENCE, step, xs, vs, aa, fs, peak

        for i in range(n):
            if not math.isfinite(u1[i]) or not math.isfinite(v1[i]):
                return STATUS_NON_FINITE, step, xs, vs, aa, fs, peak
            u[i] = u1[i]
            v[i] = v1[i]
            a[i] = a1[i]
            z[i] = z_new[i]

        if step % stride == 0:
            for i in range(n):
                d = u[i] - (u[i - 1] if i > 0 else 0.0)
                if abs(d) > peak[i]:
                    peak[i] = abs(d)
            if store:
                r = step // stride
                for i in range(n):
                    xs[r, i] = u[i]
                    vs[r, i] = v[i]
                    aa[r, i] = a[i] + g
                    fs[r, i] = f_tot[i]
    return STATUS_OK, -1, xs, vs, aa, fs, peak
