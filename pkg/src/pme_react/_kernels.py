"""Inner stepping loops for the explicit radial scheme.

Two implementations of the same contract: a numba-compiled kernel (used when
numba imports) and a plain numpy fallback with the arithmetic kept in the
same order, so a given environment always produces identical trajectories.

Contract of ``advance``: starting from cell values ``u`` at time ``t``, take
explicit Euler steps (diffusion flux divergence plus optional reaction) until
``t`` reaches ``t_stop``, the sub-step budget ``max_sub`` runs out, the sup
norm crosses ``blowup_threshold``, a non-finite value appears, or time stops
advancing.  ``u_prev`` holds the state before the last executed step, so the
caller can interpolate output times and the threshold crossing inside the
final step.

Returns ``(t_prev, t, status, nsub, clamp_added, sup_prev, sup_new)`` with
status codes: 0 reached t_stop, 1 threshold blow-up, 2 non-finite blow-up,
3 stalled (t + dt == t), 4 sub-step budget exhausted.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

STATUS_REACHED_TSTOP = 0
STATUS_BLOWUP = 1
STATUS_OVERFLOW = 2
STATUS_STALLED = 3
STATUS_BUDGET = 4


def _advance_impl(
    u,
    u_prev,
    um,
    flux,
    rho_vol,
    inv_rho_vol,
    area_over_dr,
    cfl_coef,
    m,
    p,
    reaction,
    dirichlet,
    blowup_threshold,
    react_cap,
    t,
    t_end,
    t_stop,
    max_sub,
):
    n = u.shape[0]
    clamp_added = 0.0
    nsub = 0
    t_prev = t
    sup_prev = 0.0
    s0 = 0.0
    for i in range(n):
        if u[i] > s0:
            s0 = u[i]
    sup_new = s0
    status = STATUS_REACHED_TSTOP

    while t < t_stop and nsub < max_sub:
        # diffusion-limited dt from the neighborhood max of u
        dt = t_end - t
        for i in range(n):
            mm = u[i]
            if i > 0 and u[i - 1] > mm:
                mm = u[i - 1]
            if i < n - 1 and u[i + 1] > mm:
                mm = u[i + 1]
            if mm > 0.0:
                if m == 2.0:
                    pw = mm
                elif m == 3.0:
                    pw = mm * mm
                else:
                    pw = mm ** (m - 1.0)
                dti = cfl_coef[i] / pw
                if dti < dt:
                    dt = dti
        if reaction and s0 > 0.0:
            dtr = react_cap * s0 ** (1.0 - p)
            if dtr < dt:
                dt = dtr
        if t + dt == t:
            status = STATUS_STALLED
            break

        for i in range(n):
            ui = u[i]
            if m == 2.0:
                um[i] = ui * ui
            elif m == 3.0:
                um[i] = ui * ui * ui
            else:
                um[i] = ui**m

        flux[0] = 0.0
        for j in range(1, n):
            flux[j] = area_over_dr[j] * (um[j] - um[j - 1])
        if dirichlet:
            flux[n] = -area_over_dr[n] * um[n - 1]
        else:
            flux[n] = 0.0

        for i in range(n):
            u_prev[i] = u[i]
        t_prev = t
        sup_prev = s0

        s1 = 0.0
        finite = True
        for i in range(n):
            ui = u[i]
            unew = ui + dt * inv_rho_vol[i] * (flux[i + 1] - flux[i])
            if reaction:
                if p == 2.0:
                    up = ui * ui
                elif p == 3.0:
                    up = ui * ui * ui
                else:
                    up = ui**p
                unew = unew + dt * up
            if unew < 0.0:
                clamp_added += rho_vol[i] * (-unew)
                unew = 0.0
            u[i] = unew
            if not math.isfinite(unew):
                finite = False
            if unew > s1:
                s1 = unew

        t = t + dt
        nsub += 1
        sup_new = s1
        if not finite:
            status = STATUS_OVERFLOW
            break
        if s1 >= blowup_threshold:
            status = STATUS_BLOWUP
            break
        s0 = s1

    if status == STATUS_REACHED_TSTOP and t < t_stop:
        status = STATUS_BUDGET
    return t_prev, t, status, nsub, clamp_added, sup_prev, sup_new


if HAVE_NUMBA:
    _advance_numba = njit(cache=True)(_advance_impl)
else:  # pragma: no cover
    _advance_numba = None


def _advance_numpy(
    u,
    u_prev,
    um,
    flux,
    rho_vol,
    inv_rho_vol,
    area_over_dr,
    cfl_coef,
    m,
    p,
    reaction,
    dirichlet,
    blowup_threshold,
    react_cap,
    t,
    t_end,
    t_stop,
    max_sub,
):
    # Vectorized variant of _advance_impl; one python iteration per time step.
    n = u.shape[0]
    clamp_added = 0.0
    nsub = 0
    t_prev = t
    s0 = float(u.max()) if n else 0.0
    sup_prev = 0.0
    sup_new = s0
    status = STATUS_REACHED_TSTOP

    while t < t_stop and nsub < max_sub:
        mm = u.copy()
        np.maximum(mm[:-1], u[1:], out=mm[:-1])
        np.maximum(mm[1:], u[:-1], out=mm[1:])
        if m == 2.0:
            pw = mm
        elif m == 3.0:
            pw = mm * mm
        else:
            pw = mm ** (m - 1.0)
        dt = t_end - t
        positive = pw > 0.0
        if positive.any():
            dt = min(dt, float((cfl_coef[positive] / pw[positive]).min()))
        if reaction and s0 > 0.0:
            dt = min(dt, react_cap * s0 ** (1.0 - p))
        if t + dt == t:
            status = STATUS_STALLED
            break

        if m == 2.0:
            np.multiply(u, u, out=um)
        elif m == 3.0:
            np.multiply(u, u, out=um)
            np.multiply(um, u, out=um)
        else:
            np.power(u, m, out=um)
        flux[0] = 0.0
        flux[1:n] = area_over_dr[1:n] * (um[1:] - um[:-1])
        flux[n] = -area_over_dr[n] * um[n - 1] if dirichlet else 0.0

        u_prev[:] = u
        t_prev = t
        sup_prev = s0

        unew = u + dt * inv_rho_vol * (flux[1:] - flux[:-1])
        if reaction:
            if p == 2.0:
                up = u * u
            elif p == 3.0:
                up = u * u * u
            else:
                up = u**p
            unew = unew + dt * up
        neg = unew < 0.0
        if neg.any():
            clamp_added += float((rho_vol[neg] * -unew[neg]).sum())
            unew[neg] = 0.0
        u[:] = unew

        t = t + dt
        nsub += 1
        s1 = float(u.max())
        sup_new = s1
        if not math.isfinite(s1):
            status = STATUS_OVERFLOW
            break
        if s1 >= blowup_threshold:
            status = STATUS_BLOWUP
            break
        s0 = s1

    if status == STATUS_REACHED_TSTOP and t < t_stop:
        status = STATUS_BUDGET
    return t_prev, t, status, nsub, clamp_added, sup_prev, sup_new


def advance(*args, use_numba: bool = True):
    if use_numba and HAVE_NUMBA:
        return _advance_numba(*args)
    return _advance_numpy(*args)
