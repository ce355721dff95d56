"""Compiled inner loops for ring integration.

Everything here works on flat float64 arrays so numba can compile tight
loops; the public modules wrap these in friendlier signatures.  All
window sums use circular prefix sums (O(N) per evaluation); the index
wrap is hoisted out of the inner loop by splitting the extended array
into three contiguous segments.

Status codes returned by the drivers:

    0  completed
    1  non-finite component encountered
    2  component magnitude exceeded the divergence bound
    3  tangent norm collapsed to zero at a renormalization
"""

import numpy as np
from numba import njit

OK = 0
NONFINITE = 1
DIVERGED = 2
ZERO_TANGENT = 3


@njit(cache=True, inline="always")
def _coupling_into(u, p, cs, out):
    # cs: scratch of length n + 2p + 1; out[i] = sum_{d=-p..p} u[i+d] - (2p+1) u[i]
    n = u.shape[0]
    w = 2 * p + 1
    cs[0] = 0.0
    idx = 0
    for j in range(n - p, n):
        cs[idx + 1] = cs[idx] + u[j]
        idx += 1
    for j in range(n):
        cs[idx + 1] = cs[idx] + u[j]
        idx += 1
    for j in range(p):
        cs[idx + 1] = cs[idx] + u[j]
        idx += 1
    for i in range(n):
        out[i] = cs[i + w] - cs[i] - w * u[i]


@njit(cache=True)
def coupling_sums(u, p):
    """Windowed coupling sums S_i = sum_{k=i-p}^{i+p} u_k - (2p+1) u_i."""
    n = u.shape[0]
    cs = np.empty(n + 2 * p + 1)
    out = np.empty(n)
    _coupling_into(u, p, cs, out)
    return out


@njit(cache=True, inline="always")
def _field_into(xs, p, a, b, c, g, cs, cpl, k, stage):
    # xs rows: x, y, z (and tangent components when present); writes k[stage].
    n = xs.shape[1]
    nq = xs.shape[0]
    for q in range(nq):
        _coupling_into(xs[q], p, cs, cpl[q])
    for i in range(n):
        k[stage, 0, i] = -xs[1, i] - xs[2, i] + g * cpl[0, i]
        k[stage, 1, i] = xs[0, i] + a * xs[1, i] + g * cpl[1, i]
        k[stage, 2, i] = b + xs[2, i] * (xs[0, i] - c) + g * cpl[2, i]
    if nq == 6:
        for i in range(n):
            k[stage, 3, i] = -xs[4, i] - xs[5, i] + g * cpl[3, i]
            k[stage, 4, i] = xs[3, i] + a * xs[4, i] + g * cpl[4, i]
            k[stage, 5, i] = xs[2, i] * xs[3, i] + (xs[0, i] - c) * xs[5, i] + g * cpl[5, i]


@njit(cache=True, inline="always")
def _check_state(cur, bound):
    # returns (status, oscillator) for the x/y/z rows of cur
    n = cur.shape[1]
    for q in range(3):
        for i in range(n):
            v = cur[q, i]
            if not np.isfinite(v):
                return NONFINITE, i
            if v > bound or v < -bound:
                return DIVERGED, i
    return OK, -1


@njit(cache=True, inline="always")
def _sample(cur, step, delta_every, delta_start, delta_sum, delta_cnt,
            xrow_every, xrow_out, xrow_cnt, traj_every, traj_out, traj_cnt):
    n = cur.shape[1]
    if delta_every > 0 and step >= delta_start and step % delta_every == 0:
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            im = i - 1 if i > 0 else n - 1
            d = 2.0 * cur[0, i] - cur[0, ip] - cur[0, im]
            delta_sum[i] += d * d
        delta_cnt[0] += 1
    if xrow_every > 0 and step % xrow_every == 0:
        r = xrow_cnt[0]
        if r < xrow_out.shape[0]:
            for i in range(n):
                xrow_out[r, i] = cur[0, i]
            xrow_cnt[0] = r + 1
    if traj_every > 0 and step % traj_every == 0:
        r = traj_cnt[0]
        if r < traj_out.shape[0]:
            for q in range(3):
                for i in range(n):
                    traj_out[r, q, i] = cur[q, i]
            traj_cnt[0] = r + 1


@njit(cache=True)
def rk4_drive(cur, nsteps, dt, a, b, c, sigma, p, bound,
              renorm_every, log_accum, ck_steps, ck_xi, ck_la,
              delta_every, delta_start, delta_sum, delta_cnt,
              xrow_every, xrow_out, xrow_cnt,
              traj_every, traj_out, traj_cnt):
    """Fixed-step 4th-order driver.

    cur has 3 rows (state only) or 6 rows (state + tangent); the same
    stage states feed both the field and its linearization, so state and
    tangent remain consistent.  Checkpoints are recorded after step
    ck_steps[j]; renormalization of the tangent rows happens every
    renorm_every steps, after checkpoint recording.
    """
    n = cur.shape[1]
    nq = cur.shape[0]
    g = sigma / (2.0 * p)
    cs = np.empty(n + 2 * p + 1)
    cpl = np.empty((nq, n))
    k = np.empty((4, nq, n))
    xs = np.empty((nq, n))
    n_ck = ck_steps.shape[0]
    ck_at = 0
    half = 0.5 * dt
    sixth = dt / 6.0

    for s in range(nsteps):
        _field_into(cur, p, a, b, c, g, cs, cpl, k, 0)
        for q in range(nq):
            for i in range(n):
                xs[q, i] = cur[q, i] + half * k[0, q, i]
        _field_into(xs, p, a, b, c, g, cs, cpl, k, 1)
        for q in range(nq):
            for i in range(n):
                xs[q, i] = cur[q, i] + half * k[1, q, i]
        _field_into(xs, p, a, b, c, g, cs, cpl, k, 2)
        for q in range(nq):
            for i in range(n):
                xs[q, i] = cur[q, i] + dt * k[2, q, i]
        _field_into(xs, p, a, b, c, g, cs, cpl, k, 3)
        for q in range(nq):
            for i in range(n):
                cur[q, i] += sixth * (k[0, q, i] + 2.0 * k[1, q, i]
                                      + 2.0 * k[2, q, i] + k[3, q, i])

        status, osc = _check_state(cur, bound)
        if status != OK:
            return status, s, osc, log_accum

        step = s + 1
        _sample(cur, step, delta_every, delta_start, delta_sum, delta_cnt,
                xrow_every, xrow_out, xrow_cnt, traj_every, traj_out, traj_cnt)

        if ck_at < n_ck and step == ck_steps[ck_at]:
            for q in range(3):
                for i in range(n):
                    ck_xi[ck_at, q, i] = cur[3 + q, i]
            ck_la[ck_at] = log_accum
            ck_at += 1

        if nq == 6 and renorm_every > 0 and step % renorm_every == 0:
            nrm = 0.0
            for q in range(3, 6):
                for i in range(n):
                    nrm += cur[q, i] * cur[q, i]
            nrm = np.sqrt(nrm)
            if nrm == 0.0:
                return ZERO_TANGENT, s, -1, log_accum
            inv = 1.0 / nrm
            for q in range(3, 6):
                for i in range(n):
                    cur[q, i] *= inv
            log_accum += np.log(nrm)

    return OK, nsteps, -1, log_accum


@njit(cache=True)
def em_drive(cur, nsteps, dt, a, b, c, sigma, p, bound,
             amp, shared, rng, drift_on,
             delta_every, delta_start, delta_sum, delta_cnt,
             xrow_every, xrow_out, xrow_cnt,
             traj_every, traj_out, traj_cnt):
    """Euler-Maruyama driver with additive Gaussian increments.

    amp[i] is the per-oscillator increment scale sqrt(2 D_i dt); the full
    N x 3 block of normals is drawn every step in oscillator-major order
    (components x, y, z per oscillator) so the stream never depends on
    the spatial mask.  With shared=True one draw per oscillator is used
    for all three components.  drift_on=False freezes the deterministic
    part (test hook for pure-diffusion checks).
    """
    n = cur.shape[1]
    g = sigma / (2.0 * p)
    cs = np.empty(n + 2 * p + 1)
    cpl = np.empty((3, n))
    k = np.empty((1, 3, n))

    for s in range(nsteps):
        if drift_on:
            _field_into(cur, p, a, b, c, g, cs, cpl, k, 0)
        else:
            for q in range(3):
                for i in range(n):
                    k[0, q, i] = 0.0
        if shared:
            for i in range(n):
                w = amp[i] * rng.standard_normal()
                cur[0, i] += dt * k[0, 0, i] + w
                cur[1, i] += dt * k[0, 1, i] + w
                cur[2, i] += dt * k[0, 2, i] + w
        else:
            for i in range(n):
                cur[0, i] += dt * k[0, 0, i] + amp[i] * rng.standard_normal()
                cur[1, i] += dt * k[0, 1, i] + amp[i] * rng.standard_normal()
                cur[2, i] += dt * k[0, 2, i] + amp[i] * rng.standard_normal()

        status, osc = _check_state(cur, bound)
        if status != OK:
            return status, s, osc

        _sample(cur, s + 1, delta_every, delta_start, delta_sum, delta_cnt,
                xrow_every, xrow_out, xrow_cnt, traj_every, traj_out, traj_cnt)

    return OK, nsteps, -1
