"""Hot numeric kernels: model right-hand sides, the adaptive RKF45 core,
dense output, event localization, and the 1-D Laplacian stencil.

Everything here is written in a numba-compilable numpy style and wrapped
with ``@jit_kernel``: compiled with numba by default, plain numpy when
``TYCLAB_NUMBA=0`` (see :mod:`tyclab.backend`). Keep this module free of
Python objects; the wrapping layers live in :mod:`tyclab.ode`,
:mod:`tyclab.pde` and :mod:`tyclab.models`.
"""
from __future__ import annotations

import numpy as np

from .backend import jit_kernel

# model kind codes (must match models.ModelKind.code)
KIND_CLASSIC3 = 0
KIND_MODIFIED_ALLEE = 1
KIND_MODIFIED_NOALLEE = 2
KIND_EXPLOGISTIC3 = 3
KIND_CLASSIC4 = 4

# boundary condition codes
BC_NEUMANN = 0
BC_DIRICHLET = 1

# integration status codes
STATUS_COMPLETED = 0
STATUS_BLOWUP = 1
STATUS_COLLAPSE = 2

# ring buffer length for the diverging-tail record used by the blow-up fit
RING_LEN = 64

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@jit_kernel
def eval_rhs_ode(kind, pvec, y, out):
    """Reaction rates of the spatially independent models.

    pvec layout: dimensionless kinds [r, gamma, allee, -];
    classic 4-species (dimensional) [beta, delta, K, mu].
    """
    if kind == 4:
        beta = pvec[0]
        delta = pvec[1]
        cap = pvec[2]
        mu = pvec[3]
        f = y[0]
        m = y[1]
        s = y[2]
        r4 = y[3]
        L = 1.0 - (f + m + s) / cap
        out[0] = 0.5 * beta * L * f * m - delta * f
        out[1] = (0.5 * f * m + 0.5 * r4 * m + f * s) * beta * L - delta * m
        out[2] = (0.5 * r4 * m + r4 * s) * beta * L - delta * s
        out[3] = mu - delta * r4
    else:
        r = pvec[0]
        gamma = pvec[1]
        a = pvec[2]
        f = y[0]
        m = y[1]
        s = y[2]
        if kind == 0:
            L = 1.0 - (f + m + s)
            mate = r * m * f * L
            out[0] = mate - f
            out[1] = mate + 2.0 * r * s * f * L - m
        elif kind == 3:
            L = np.exp(1.0 - (f + m + s))
            mate = r * m * f * L
            out[0] = mate - f
            out[1] = mate + 2.0 * r * s * f * L - m
        else:
            L = 1.0 - (f + m + s)
            ms = m + s
            if kind == 1:
                allee = f / a - 1.0
            else:
                allee = 1.0
            if ms == 0.0:
                # continuity limit: both mating terms vanish as m+s -> 0
                out[0] = -f
                out[1] = -m
            else:
                # quotients first: f/ms can overflow where (m*m+2*s*s)/ms
                # stays on the scale of m and s
                out[0] = r * L * allee * (m / ms) * f * m - f
                out[1] = r * L * f * allee * ((m * m + 2.0 * s * s) / ms) - m
        out[2] = gamma - s


@jit_kernel
def laplacian_core(u, h, bc, out):
    """Second-order central Laplacian on interior points of (0, 1).

    Dirichlet: boundary values are identically zero. Neumann: ghost value
    at the boundary from second-order zero-gradient extrapolation,
    g = (4*u_near - u_next) / 3 = u_near + (u_near - u_next) / 3.
    """
    inv = 1.0 / (h * h)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) * inv
    if bc == 0:
        # written so a constant field gives an exactly zero stencil
        gl = u[0] + (u[0] - u[1]) / 3.0
        gr = u[-1] + (u[-1] - u[-2]) / 3.0
    else:
        gl = 0.0
        gr = 0.0
    out[0] = (gl - 2.0 * u[0] + u[1]) * inv
    out[-1] = (u[-2] - 2.0 * u[-1] + gr) * inv


@jit_kernel
def eval_rhs_pde(kind, pvec, diffusion, bc, hgrid, nx, y, out):
    """Semi-discrete reaction-diffusion rates for the stacked field vector.

    y holds the species fields back to back, nx interior values each.
    """
    nspec = 4 if kind == 4 else 3
    for i in range(nspec):
        laplacian_core(y[i * nx:(i + 1) * nx], hgrid, bc, out[i * nx:(i + 1) * nx])
    out *= diffusion

    f = y[0:nx]
    m = y[nx:2 * nx]
    s = y[2 * nx:3 * nx]
    if kind == 4:
        beta = pvec[0]
        delta = pvec[1]
        cap = pvec[2]
        mu = pvec[3]
        r4 = y[3 * nx:4 * nx]
        L = 1.0 - (f + m + s) / cap
        out[0:nx] += 0.5 * beta * L * f * m - delta * f
        out[nx:2 * nx] += (0.5 * f * m + 0.5 * r4 * m + f * s) * beta * L - delta * m
        out[2 * nx:3 * nx] += (0.5 * r4 * m + r4 * s) * beta * L - delta * s
        out[3 * nx:4 * nx] += mu - delta * r4
    else:
        r = pvec[0]
        gamma = pvec[1]
        a = pvec[2]
        if kind == 0 or kind == 3:
            if kind == 3:
                L = np.exp(1.0 - (f + m + s))
            else:
                L = 1.0 - (f + m + s)
            mate = r * m * f * L
            out[0:nx] += mate - f
            out[nx:2 * nx] += mate + 2.0 * r * s * f * L - m
        else:
            L = 1.0 - (f + m + s)
            if kind == 1:
                allee = f / a - 1.0
            else:
                allee = np.ones(nx)
            ms = m + s
            safe = np.where(ms == 0.0, 1.0, ms)
            mate_f = np.where(ms == 0.0, 0.0, r * L * allee * (m / safe) * f * m)
            mate_m = np.where(ms == 0.0, 0.0,
                              r * L * f * allee * ((m * m + 2.0 * s * s) / safe))
            out[0:nx] += mate_f - f
            out[nx:2 * nx] += mate_m - m
        out[2 * nx:3 * nx] += gamma - s


@jit_kernel
def eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx, y, out):
    if spatial == 1:
        eval_rhs_pde(kind, pvec, diffusion, bc, hgrid, nx, y, out)
    else:
        eval_rhs_ode(kind, pvec, y, out)


@jit_kernel
def hermite_eval(y0, f0, y1, f1, h, theta, out):
    """Cubic Hermite dense output on an accepted step, theta in [0, 1]."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = 3.0 * t2 - 2.0 * t3
    h11 = t3 - t2
    out[:] = h00 * y0 + (h * h10) * f0 + h01 * y1 + (h * h11) * f1


@jit_kernel
def _error_ratio(y0, y1, err, abs_tol, rel_tol):
    sc = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    worst = np.max(np.abs(err) / sc)
    if np.isnan(worst):
        return np.inf
    return worst


@jit_kernel
def _species_min(y, idx, spatial, nx):
    if spatial == 1:
        return np.min(y[idx * nx:(idx + 1) * nx])
    return y[idx]


@jit_kernel
def _species_absmax(y, idx, spatial, nx):
    if spatial == 1:
        return np.max(np.abs(y[idx * nx:(idx + 1) * nx]))
    return abs(y[idx])


@jit_kernel
def _global_absmax(y):
    return np.max(np.abs(y))


@jit_kernel
def _neg_crossing_theta(y0, f0, y1, f1, h, idx, spatial, nx, level):
    """Bisect the dense output for the theta where a species extremum
    crosses ``level``; endpoints are assumed to straddle it."""
    tmp = np.empty(y0.shape[0])
    lo = 0.0
    hi = 1.0
    below_lo = _species_min(y0, idx, spatial, nx) <= level
    for _ in range(60):
        if (hi - lo) * h <= 1e-8:
            break
        mid = 0.5 * (lo + hi)
        hermite_eval(y0, f0, y1, f1, h, mid, tmp)
        below = _species_min(tmp, idx, spatial, nx) <= level
        if below == below_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@jit_kernel
def _cutoff_crossing_theta(y0, f0, y1, f1, h, cutoff):
    tmp = np.empty(y0.shape[0])
    lo = 0.0
    hi = 1.0
    for _ in range(60):
        if (hi - lo) * h <= 1e-10:
            break
        mid = 0.5 * (lo + hi)
        hermite_eval(y0, f0, y1, f1, h, mid, tmp)
        if _global_absmax(tmp) >= cutoff:
            hi = mid
        else:
            lo = mid
    return hi


@jit_kernel
def _diag_row(y, nspec, spatial, nx, hgrid, row):
    """Per-species spatial diagnostics: min, max-norm, L1-norm (midpoint
    rule with boundary half-cells)."""
    for i in range(nspec):
        if spatial == 1:
            u = y[i * nx:(i + 1) * nx]
            row[i] = np.min(u)
            row[nspec + i] = np.max(np.abs(u))
            au = np.abs(u)
            row[2 * nspec + i] = hgrid * np.sum(au) + 0.5 * hgrid * (au[0] + au[-1])
        else:
            row[i] = y[i]
            row[nspec + i] = abs(y[i])
            row[2 * nspec + i] = abs(y[i])


@jit_kernel
def integrate_core(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                   y0, t0, t_end, abs_tol, rel_tol,
                   h_init, h_min, h_max, cutoff, neg_eps, sample_dt,
                   snap_times, max_steps):
    """Adaptive RKF45 with per-step negativity scanning and blow-up capture.

    Propagates the fifth-order solution; the embedded fourth-order result
    drives step control. Records dense samples every ``sample_dt`` plus
    event times. For spatial problems the per-sample record holds species
    diagnostics and full fields are captured at ``snap_times``; otherwise
    the record holds the state itself.

    Returns (status, final_t, final_y, times, record, n_snaps, snaps,
    neg_events, blow_species, blow_sign, blow_t, tail_t, tail_mag,
    n_accept, n_reject).
    """
    dim = y0.shape[0]
    nspec = 4 if kind == 4 else 3
    rec_width = 3 * nspec if spatial == 1 else dim

    n_grid = int(np.floor((t_end - t0) / sample_dt + 1e-9)) + 1
    cap = n_grid + 600
    out_t = np.empty(cap)
    rec = np.empty((cap, rec_width))
    n_out = 0

    n_snap = snap_times.shape[0]
    snaps = np.empty((n_snap, dim))
    next_snap = 0

    neg_cap = 1024
    neg_rows = np.empty((neg_cap, 3))
    n_neg = 0
    in_neg = np.zeros(nspec, dtype=np.bool_)
    open_t = np.zeros(nspec)
    v_prev = np.empty(nspec)

    ring_t = np.empty(RING_LEN)
    ring_mag = np.empty((RING_LEN, nspec))
    ring_n = 0
    ring_head = 0

    y = y0.copy()
    t = t0
    k1 = np.empty(dim)
    eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx, y, k1)
    tmp = np.empty(dim)

    # initial record, events state, ring entry
    out_t[n_out] = t0
    if spatial == 1:
        _diag_row(y, nspec, spatial, nx, hgrid, rec[n_out])
    else:
        rec[n_out, :] = y
    n_out += 1
    k_grid = 1
    for i in range(nspec):
        v_prev[i] = _species_min(y, i, spatial, nx)
        if v_prev[i] <= -neg_eps:
            in_neg[i] = True
            open_t[i] = t0
    ring_t[0] = t0
    for i in range(nspec):
        ring_mag[0, i] = _species_absmax(y, i, spatial, nx)
    ring_n = 1
    ring_head = 1
    while next_snap < n_snap and snap_times[next_snap] <= t0:
        snaps[next_snap, :] = y
        next_snap += 1

    init_mag = _global_absmax(y)

    status = STATUS_COMPLETED
    blow_species = -1
    blow_sign = 0
    blow_t = np.nan

    h = min(h_init, h_max)
    n_acc = 0
    n_rej = 0
    steps = 0
    horizon = t_end - 1e-14 * max(1.0, abs(t_end))

    ev_t = np.empty(8)

    while t < horizon:
        steps += 1
        if steps > max_steps:
            status = STATUS_COLLAPSE
            break
        final_step = False
        h_try = h
        if t + h_try >= t_end:
            h_try = t_end - t
            final_step = True

        # RKF45 stages (k1 carried over from the last accepted step)
        k2 = np.empty(dim)
        k3 = np.empty(dim)
        k4 = np.empty(dim)
        k5 = np.empty(dim)
        k6 = np.empty(dim)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                 y + h_try * (0.25 * k1), k2)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                 y + h_try * ((3.0 / 32.0) * k1 + (9.0 / 32.0) * k2), k3)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                 y + h_try * ((1932.0 / 2197.0) * k1 - (7200.0 / 2197.0) * k2
                              + (7296.0 / 2197.0) * k3), k4)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                 y + h_try * ((439.0 / 216.0) * k1 - 8.0 * k2
                              + (3680.0 / 513.0) * k3 - (845.0 / 4104.0) * k4), k5)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx,
                 y + h_try * ((-8.0 / 27.0) * k1 + 2.0 * k2 - (3544.0 / 2565.0) * k3
                              + (1859.0 / 4104.0) * k4 - (11.0 / 40.0) * k5), k6)
        y_new = y + h_try * ((16.0 / 135.0) * k1 + (6656.0 / 12825.0) * k3
                             + (28561.0 / 56430.0) * k4 - (9.0 / 50.0) * k5
                             + (2.0 / 55.0) * k6)
        err = h_try * ((1.0 / 360.0) * k1 - (128.0 / 4275.0) * k3
                       - (2197.0 / 75240.0) * k4 + (1.0 / 50.0) * k5
                       + (2.0 / 55.0) * k6)
        ratio = _error_ratio(y, y_new, err, abs_tol, rel_tol)
        if not np.all(np.isfinite(y_new)):
            ratio = np.inf

        if ratio > 1.0:
            n_rej += 1
            if np.isfinite(ratio):
                fac = max(0.1, min(0.9, _SAFETY * ratio ** -0.2))
            else:
                fac = 0.1
            h = h_try * fac
            if h < h_min:
                # underflow: diverging magnitude means blow-up, else stiffness
                mag = _global_absmax(y)
                if mag >= max(1e3, 100.0 * init_mag):
                    status = STATUS_BLOWUP
                    blow_t = t
                    bs = 0
                    bm = _species_absmax(y, 0, spatial, nx)
                    for i in range(1, nspec):
                        mi = _species_absmax(y, i, spatial, nx)
                        if mi > bm:
                            bm = mi
                            bs = i
                    blow_species = bs
                    blow_sign = 1 if _species_min(y, bs, spatial, nx) > -bm * 0.5 else -1
                else:
                    status = STATUS_COLLAPSE
                break
            continue

        # accepted
        n_acc += 1
        t1 = t_end if final_step else t + h_try
        f_new = np.empty(dim)
        eval_rhs(kind, pvec, spatial, diffusion, bc, hgrid, nx, y_new, f_new)

        t_stop = t1
        blew = False
        if _global_absmax(y_new) >= cutoff:
            theta_b = _cutoff_crossing_theta(y, k1, y_new, f_new, h_try, cutoff)
            t_stop = t + theta_b * h_try
            blew = True

        # negativity crossings on [t, t_stop]
        n_ev = 0
        for i in range(nspec):
            v1 = _species_min(y_new, i, spatial, nx)
            was = in_neg[i]
            now = v1 <= -neg_eps
            if was != now:
                theta_x = _neg_crossing_theta(y, k1, y_new, f_new, h_try, i,
                                              spatial, nx, -neg_eps)
                t_x = t + theta_x * h_try
                if t_x <= t_stop:
                    if now:
                        in_neg[i] = True
                        open_t[i] = t_x
                    else:
                        in_neg[i] = False
                        if n_neg < neg_cap:
                            neg_rows[n_neg, 0] = i
                            neg_rows[n_neg, 1] = open_t[i]
                            neg_rows[n_neg, 2] = t_x
                            n_neg += 1
                    if n_ev < 8:
                        ev_t[n_ev] = t_x
                        n_ev += 1
            v_prev[i] = v1

        # record sample-grid times and event times in merged order
        for a in range(1, n_ev):
            key = ev_t[a]
            b = a - 1
            while b >= 0 and ev_t[b] > key:
                ev_t[b + 1] = ev_t[b]
                b -= 1
            ev_t[b + 1] = key
        ie = 0
        while True:
            ts_grid = t0 + k_grid * sample_dt
            grid_due = ts_grid <= t_stop + 1e-14
            if ie < n_ev and (not grid_due or ev_t[ie] <= ts_grid):
                ts = ev_t[ie]
                ie += 1
            elif grid_due:
                ts = ts_grid
                k_grid += 1
            else:
                break
            if n_out > 0 and ts <= out_t[n_out - 1] + 1e-14 * max(1.0, abs(ts)):
                continue
            if n_out >= cap:
                continue
            theta = (ts - t) / h_try
            if theta > 1.0:
                theta = 1.0
            hermite_eval(y, k1, y_new, f_new, h_try, theta, tmp)
            out_t[n_out] = ts
            if spatial == 1:
                _diag_row(tmp, nspec, spatial, nx, hgrid, rec[n_out])
            else:
                rec[n_out, :] = tmp
            n_out += 1

        while next_snap < n_snap and snap_times[next_snap] <= t_stop + 1e-14:
            theta = (snap_times[next_snap] - t) / h_try
            hermite_eval(y, k1, y_new, f_new, h_try, theta, snaps[next_snap])
            next_snap += 1

        if blew:
            hermite_eval(y, k1, y_new, f_new, h_try,
                         (t_stop - t) / h_try, tmp)
            y = tmp.copy()
            t = t_stop
            status = STATUS_BLOWUP
            blow_t = t_stop
            bs = 0
            bm = _species_absmax(y, 0, spatial, nx)
            for i in range(1, nspec):
                mi = _species_absmax(y, i, spatial, nx)
                if mi > bm:
                    bm = mi
                    bs = i
            blow_species = bs
            blow_sign = 1 if _species_min(y, bs, spatial, nx) > -bm * 0.5 else -1
        else:
            y = y_new
            t = t1

        # diverging-tail ring for the reciprocal blow-up fit
        ring_t[ring_head % RING_LEN] = t
        for i in range(nspec):
            ring_mag[ring_head % RING_LEN, i] = _species_absmax(y, i, spatial, nx)
        ring_head += 1
        if ring_n < RING_LEN:
            ring_n += 1

        if blew:
            break

        k1 = f_new
        fac = _SAFETY * ratio ** -0.2 if ratio > 0.0 else _MAX_FACTOR
        h = h_try * max(_MIN_FACTOR, min(_MAX_FACTOR, fac))
        if h > h_max:
            h = h_max
        if h < h_min:
            h = h_min

    final_t = t
    final_y = y

    # close open negativity intervals at the final time
    for i in range(nspec):
        if in_neg[i] and n_neg < neg_cap:
            neg_rows[n_neg, 0] = i
            neg_rows[n_neg, 1] = open_t[i]
            neg_rows[n_neg, 2] = final_t
            n_neg += 1

    # make sure the final point is recorded
    if n_out < cap and (n_out == 0 or out_t[n_out - 1] < final_t - 1e-14 * max(1.0, abs(final_t))):
        out_t[n_out] = final_t
        if spatial == 1:
            _diag_row(final_y, nspec, spatial, nx, hgrid, rec[n_out])
        else:
            rec[n_out, :] = final_y
        n_out += 1

    # chronological tail from the ring
    tail_n = ring_n
    tail_t = np.empty(tail_n)
    tail_mag = np.empty((tail_n, nspec))
    for j in range(tail_n):
        src = (ring_head - tail_n + j) % RING_LEN
        tail_t[j] = ring_t[src]
        for i in range(nspec):
            tail_mag[j, i] = ring_mag[src, i]

    return (status, final_t, final_y, out_t[:n_out], rec[:n_out],
            next_snap, snaps, neg_rows[:n_neg],
            blow_species, blow_sign, blow_t, tail_t, tail_mag,
            n_acc, n_rej)
