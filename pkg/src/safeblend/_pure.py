"""Pure-Python closed-loop kernel, the arithmetic reference.

This is the same algorithm as the compiled kernel in _fastcore.pyx,
written expression for expression in the same evaluation order so the
two produce bitwise-identical records on the same inputs.  Edit the two
files together; the cross-engine tests compare them at zero tolerance.

The kernel integrates

    qdot = v
    vdot = M(q)^-1 (-C(q, v) v - F v - g(q) + u + mu(t))

with classic fixed-step RK4, re-evaluating the control at every stage
(or holding it over the step when zoh is set), and fills one record row
per step boundary.
"""

from __future__ import annotations

import math

from ._layout import (B_ALPHA, B_EPS, B_KH, I_D, I_KAPPA, I_MODE, I_MODEL,
                      I_N, I_NOMINAL, I_NWIN, I_REF, I_SPACE, I_ZOH,
                      MODE_NOMINAL, MODE_SAFE)

BOUND = 1.0e6


def run_closed_loop(kinds, mpar, fmat, center, pmat, bpar, kp, kd,
                    refc, refa, refw, refp, utau, wt, wmu,
                    q0, v0, n_steps, dt,
                    t_out, q_out, v_out, x_out, c_out, h_out, phi_out,
                    u_out, unom_out, mu_out, s_out, hdot_out,
                    inc_out, inceps_out, infeas_out):
    """Fill the record arrays; return 0, or the 1-based step index at
    which the state left the divergence bound."""
    sin = math.sin
    cos = math.cos
    isfinite = math.isfinite

    model_kind = int(kinds[I_MODEL])
    nn = int(kinds[I_N])
    d = int(kinds[I_D])
    space = int(kinds[I_SPACE])
    kappa_kind = int(kinds[I_KAPPA])
    nominal_kind = int(kinds[I_NOMINAL])
    ref_kind = int(kinds[I_REF])
    mode = int(kinds[I_MODE])
    zoh = int(kinds[I_ZOH])
    nwin = int(kinds[I_NWIN])
    cd = d if space == 1 else nn

    k_h = float(bpar[B_KH])
    eps = float(bpar[B_EPS])
    alpha_g = float(bpar[B_ALPHA])

    mp = [float(x) for x in mpar]
    fm = [float(x) for x in fmat]
    ce = [float(x) for x in center]
    pm = [float(x) for x in pmat]
    kpv = [float(x) for x in kp]
    kdv = [float(x) for x in kd]
    rc = [float(x) for x in refc]
    ra = [float(x) for x in refa]
    rw = [float(x) for x in refw]
    rp = [float(x) for x in refp]
    ut = [float(x) for x in utau]
    wtv = [float(x) for x in wt]
    wmv = [float(x) for x in wmu]

    if model_kind == 1:
        a1 = mp[0]
        a2 = mp[1]
        b1 = mp[2]
        gz1 = mp[3]
        gz2 = mp[4]
        l1 = mp[5]
        l2 = mp[6]

    q = [float(x) for x in q0]
    v = [float(x) for x in v0]

    dvec = [0.0] * cd
    pdv = [0.0] * cd
    gradb = [0.0] * nn
    gv = [0.0] * nn
    cvb = [0.0] * nn
    fvb = [0.0] * nn
    muv = [0.0] * nn
    unomb = [0.0] * nn
    ub = [0.0] * nn
    accb = [0.0] * nn
    xb = [0.0] * d
    uhold = [0.0] * nn
    k1v = [0.0] * nn
    k2v = [0.0] * nn
    k3v = [0.0] * nn
    k4v = [0.0] * nn
    q2 = [0.0] * nn
    v2 = [0.0] * nn
    q3 = [0.0] * nn
    v3 = [0.0] * nn
    q4 = [0.0] * nn
    v4 = [0.0] * nn

    def derivs(t, qq, vv, use_hold):
        # model terms ----------------------------------------------------
        if model_kind == 1:
            q1s = qq[0]
            q2s = qq[1]
            c1 = cos(q1s)
            s1 = sin(q1s)
            c2 = cos(q2s)
            s2 = sin(q2s)
            c12 = cos(q1s + q2s)
            s12 = sin(q1s + q2s)
            m11 = a1 + 2.0 * a2 * c2
            m12 = b1 + a2 * c2
            m22 = b1
            hf = a2 * s2
            cvb[0] = (-hf * vv[1]) * vv[0] + (-hf * (vv[0] + vv[1])) * vv[1]
            cvb[1] = (hf * vv[0]) * vv[0]
            gv[0] = gz1 * c1 + gz2 * c12
            gv[1] = gz2 * c12
            xb[0] = l1 * c1 + l2 * c12
            xb[1] = l1 * s1 + l2 * s12
            j00 = -l1 * s1 - l2 * s12
            j01 = -l2 * s12
            j10 = l1 * c1 + l2 * c12
            j11 = l2 * c12
            vmv = m11 * vv[0] * vv[0] + 2.0 * m12 * vv[0] * vv[1] \
                + m22 * vv[1] * vv[1]
        else:
            vmv = 0.0
            for i in range(nn):
                gv[i] = mp[nn + i]
                cvb[i] = 0.0
                xb[i] = qq[i]
                vmv = vmv + mp[i] * vv[i] * vv[i]
        for i in range(nn):
            s = 0.0
            for j in range(nn):
                s = s + fm[i * nn + j] * vv[j]
            fvb[i] = s
        # constraint -----------------------------------------------------
        if space == 1 and model_kind == 1:
            dvec[0] = xb[0] - ce[0]
            dvec[1] = xb[1] - ce[1]
        else:
            for i in range(cd):
                dvec[i] = qq[i] - ce[i]
        s = 0.0
        for i in range(cd):
            pd = 0.0
            for j in range(cd):
                pd = pd + pm[i * cd + j] * dvec[j]
            pdv[i] = pd
            s = s + dvec[i] * pd
        cval = 1.0 - s
        if space == 1 and model_kind == 1:
            gradb[0] = -2.0 * (j00 * pdv[0] + j10 * pdv[1])
            gradb[1] = -2.0 * (j01 * pdv[0] + j11 * pdv[1])
        else:
            for i in range(nn):
                gradb[i] = -2.0 * pdv[i]
        hval = k_h * cval - 0.5 * vmv
        # blend weight ---------------------------------------------------
        if hval > eps:
            phi = 1.0
        elif hval < 0.0:
            phi = 0.0
        elif kappa_kind == 0:
            hh = hval * hval
            phi = 3.0 * hh / (eps * eps) - 2.0 * (hh * hval) / (eps * eps * eps)
        else:
            phi = hval / eps
        # disturbance ----------------------------------------------------
        for i in range(nn):
            muv[i] = 0.0
        for w in range(nwin):
            if wtv[2 * w] <= t and t < wtv[2 * w + 1]:
                for i in range(nn):
                    muv[i] = muv[i] + wmv[w * nn + i]
        # nominal and applied control ------------------------------------
        infeas = 0
        if use_hold:
            for i in range(nn):
                ub[i] = uhold[i]
        else:
            if nominal_kind == 0:
                for i in range(nn):
                    unomb[i] = gv[i]
            elif nominal_kind == 2:
                for i in range(nn):
                    unomb[i] = ut[i]
            else:
                for i in range(nn):
                    if ref_kind == 0:
                        qdi = rc[i]
                        vdi = 0.0
                        adi = 0.0
                    else:
                        arg = rw[i] * t + rp[i]
                        sa = sin(arg)
                        ca = cos(arg)
                        qdi = rc[i] + ra[i] * sa
                        vdi = ra[i] * rw[i] * ca
                        adi = -ra[i] * rw[i] * rw[i] * sa
                    accb[i] = adi + kpv[i] * (qdi - qq[i]) + kdv[i] * (vdi - vv[i])
                if model_kind == 1:
                    ma0 = m11 * accb[0] + m12 * accb[1]
                    ma1 = m12 * accb[0] + m22 * accb[1]
                    unomb[0] = ma0 + cvb[0] + fvb[0] + gv[0]
                    unomb[1] = ma1 + cvb[1] + fvb[1] + gv[1]
                else:
                    for i in range(nn):
                        unomb[i] = mp[i] * accb[i] + cvb[i] + fvb[i] + gv[i]
            if mode == MODE_NOMINAL:
                for i in range(nn):
                    ub[i] = unomb[i]
            elif mode == MODE_SAFE:
                if hval >= eps:
                    for i in range(nn):
                        ub[i] = unomb[i]
                elif hval < 0.0:
                    for i in range(nn):
                        ub[i] = gv[i] + k_h * gradb[i]
                else:
                    for i in range(nn):
                        sfe = gv[i] + k_h * gradb[i]
                        ub[i] = (1.0 - phi) * sfe + phi * unomb[i]
            else:
                z = 0.0
                for i in range(nn):
                    wv = k_h * gradb[i] + gv[i]
                    z = z + vv[i] * (wv - unomb[i])
                z = z + alpha_g * hval
                if z >= 0.0:
                    for i in range(nn):
                        ub[i] = unomb[i]
                else:
                    vsq = 0.0
                    for i in range(nn):
                        vsq = vsq + vv[i] * vv[i]
                    if vsq == 0.0:
                        infeas = 1
                        for i in range(nn):
                            ub[i] = unomb[i]
                    else:
                        for i in range(nn):
                            ub[i] = unomb[i] + (z / vsq) * vv[i]
        # barrier rate along the closed loop -----------------------------
        hdot = 0.0
        for i in range(nn):
            hdot = hdot + vv[i] * (k_h * gradb[i] + gv[i] - ub[i] - muv[i]
                                   + fvb[i])
        # acceleration ---------------------------------------------------
        if model_kind == 1:
            rhs0 = -cvb[0] - fvb[0] - gv[0] + ub[0] + muv[0]
            rhs1 = -cvb[1] - fvb[1] - gv[1] + ub[1] + muv[1]
            det = m11 * m22 - m12 * m12
            accb[0] = (m22 * rhs0 - m12 * rhs1) / det
            accb[1] = (m11 * rhs1 - m12 * rhs0) / det
        else:
            for i in range(nn):
                rhs = -cvb[i] - fvb[i] - gv[i] + ub[i] + muv[i]
                accb[i] = rhs / mp[i]
        return hval, cval, phi, hdot, infeas

    for k in range(n_steps + 1):
        t0 = k * dt
        hval, cval, phi, hdot, infeas = derivs(t0, q, v, 0)
        t_out[k] = t0
        for i in range(nn):
            q_out[k, i] = q[i]
            v_out[k, i] = v[i]
            u_out[k, i] = ub[i]
            unom_out[k, i] = unomb[i]
            mu_out[k, i] = muv[i]
        for i in range(d):
            x_out[k, i] = xb[i]
        c_out[k] = cval
        h_out[k] = hval
        phi_out[k] = phi
        s_out[k] = -hval
        hdot_out[k] = hdot
        inc_out[k] = 1 if hval >= 0.0 else 0
        inceps_out[k] = 1 if hval >= eps else 0
        infeas_out[k] = infeas
        if k == n_steps:
            break
        for i in range(nn):
            k1v[i] = accb[i]
        if zoh:
            for i in range(nn):
                uhold[i] = ub[i]
        for i in range(nn):
            q2[i] = q[i] + 0.5 * dt * v[i]
            v2[i] = v[i] + 0.5 * dt * k1v[i]
        derivs(t0 + 0.5 * dt, q2, v2, zoh)
        for i in range(nn):
            k2v[i] = accb[i]
        for i in range(nn):
            q3[i] = q[i] + 0.5 * dt * v2[i]
            v3[i] = v[i] + 0.5 * dt * k2v[i]
        derivs(t0 + 0.5 * dt, q3, v3, zoh)
        for i in range(nn):
            k3v[i] = accb[i]
        for i in range(nn):
            q4[i] = q[i] + dt * v3[i]
            v4[i] = v[i] + dt * k3v[i]
        derivs(t0 + dt, q4, v4, zoh)
        for i in range(nn):
            k4v[i] = accb[i]
        bad = 0
        for i in range(nn):
            qn = q[i] + dt * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) / 6.0
            vn = v[i] + dt * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]) / 6.0
            if not isfinite(qn) or abs(qn) > BOUND:
                bad = 1
            if not isfinite(vn) or abs(vn) > BOUND:
                bad = 1
            q[i] = qn
            v[i] = vn
        if bad:
            return k + 1
    return 0
