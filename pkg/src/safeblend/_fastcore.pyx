# cython: language_level=3, boundscheck=False, wraparound=False
# cython: initializedcheck=False, cdivision=True
"""Compiled closed-loop kernel.

Transliteration of _pure.py: the arithmetic is the same expressions in
the same evaluation order, so records match the pure kernel bitwise.
Edit the two files together; the cross-engine tests compare them at
zero tolerance.
"""

import numpy as np

from libc.math cimport cos, fabs, isfinite, sin

from ._layout import (B_ALPHA, B_EPS, B_KH, I_D, I_KAPPA, I_MODE, I_MODEL,
                      I_N, I_NOMINAL, I_NWIN, I_REF, I_SPACE, I_ZOH,
                      MODE_NOMINAL, MODE_SAFE)

cdef double BOUND = 1.0e6
cdef int C_MODE_NOMINAL = MODE_NOMINAL
cdef int C_MODE_SAFE = MODE_SAFE


cdef int _derivs(double t, double[::1] qq, double[::1] vv, int use_hold,
                 int model_kind, int nn, int d, int space, int kappa_kind,
                 int nominal_kind, int ref_kind, int mode, int nwin, int cd,
                 double k_h, double eps, double alpha_g,
                 double a1, double a2, double b1, double gz1, double gz2,
                 double l1, double l2,
                 double[::1] mp, double[::1] fm, double[::1] ce,
                 double[::1] pm, double[::1] kpv, double[::1] kdv,
                 double[::1] rc, double[::1] ra, double[::1] rw,
                 double[::1] rp, double[::1] ut, double[::1] wtv,
                 double[::1] wmv,
                 double[::1] dvec, double[::1] pdv, double[::1] gradb,
                 double[::1] gv, double[::1] cvb, double[::1] fvb,
                 double[::1] muv, double[::1] unomb, double[::1] ub,
                 double[::1] accb, double[::1] xb, double[::1] uhold,
                 double[::1] scal):
    cdef int i, j, w, infeas
    cdef double q1s, q2s, c1, s1, c2, s2, c12, s12
    cdef double m11 = 0.0, m12 = 0.0, m22 = 0.0, hf
    cdef double j00 = 0.0, j01 = 0.0, j10 = 0.0, j11 = 0.0
    cdef double vmv, s, pd, cval, hval, phi, hh
    cdef double qdi, vdi, adi, arg, sa, ca, ma0, ma1
    cdef double z, wv, vsq, sfe, hdot, rhs0, rhs1, det, rhs
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
        if mode == C_MODE_NOMINAL:
            for i in range(nn):
                ub[i] = unomb[i]
        elif mode == C_MODE_SAFE:
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
    scal[0] = hval
    scal[1] = cval
    scal[2] = phi
    scal[3] = hdot
    return infeas


def run_closed_loop(kinds, mpar, fmat, center, pmat, bpar, kp, kd,
                    refc, refa, refw, refp, utau, wt, wmu,
                    q0, v0, n_steps, dt,
                    t_out, q_out, v_out, x_out, c_out, h_out, phi_out,
                    u_out, unom_out, mu_out, s_out, hdot_out,
                    inc_out, inceps_out, infeas_out):
    """Fill the record arrays; return 0, or the 1-based step index at
    which the state left the divergence bound."""
    cdef long[::1] kk = np.ascontiguousarray(kinds, dtype=np.int64)
    cdef int model_kind = <int> kk[I_MODEL]
    cdef int nn = <int> kk[I_N]
    cdef int d = <int> kk[I_D]
    cdef int space = <int> kk[I_SPACE]
    cdef int kappa_kind = <int> kk[I_KAPPA]
    cdef int nominal_kind = <int> kk[I_NOMINAL]
    cdef int ref_kind = <int> kk[I_REF]
    cdef int mode = <int> kk[I_MODE]
    cdef int zoh = <int> kk[I_ZOH]
    cdef int nwin = <int> kk[I_NWIN]
    cdef int cd = d if space == 1 else nn

    cdef double k_h = bpar[B_KH]
    cdef double eps = bpar[B_EPS]
    cdef double alpha_g = bpar[B_ALPHA]

    cdef double[::1] mp = mpar
    cdef double[::1] fm = fmat
    cdef double[::1] ce = center
    cdef double[::1] pm = pmat
    cdef double[::1] kpv = kp
    cdef double[::1] kdv = kd
    cdef double[::1] rc = refc
    cdef double[::1] ra = refa
    cdef double[::1] rw = refw
    cdef double[::1] rp = refp
    cdef double[::1] ut = utau
    cdef double[::1] wtv = wt
    cdef double[::1] wmv = wmu

    cdef double a1 = 0.0, a2 = 0.0, b1 = 0.0
    cdef double gz1 = 0.0, gz2 = 0.0, l1 = 0.0, l2 = 0.0
    if model_kind == 1:
        a1 = mp[0]
        a2 = mp[1]
        b1 = mp[2]
        gz1 = mp[3]
        gz2 = mp[4]
        l1 = mp[5]
        l2 = mp[6]

    cdef double[::1] q = np.array(q0, dtype=float)
    cdef double[::1] v = np.array(v0, dtype=float)

    cdef double[::1] dvec = np.zeros(cd)
    cdef double[::1] pdv = np.zeros(cd)
    cdef double[::1] gradb = np.zeros(nn)
    cdef double[::1] gv = np.zeros(nn)
    cdef double[::1] cvb = np.zeros(nn)
    cdef double[::1] fvb = np.zeros(nn)
    cdef double[::1] muv = np.zeros(nn)
    cdef double[::1] unomb = np.zeros(nn)
    cdef double[::1] ub = np.zeros(nn)
    cdef double[::1] accb = np.zeros(nn)
    cdef double[::1] xb = np.zeros(d)
    cdef double[::1] uhold = np.zeros(nn)
    cdef double[::1] k1v = np.zeros(nn)
    cdef double[::1] k2v = np.zeros(nn)
    cdef double[::1] k3v = np.zeros(nn)
    cdef double[::1] k4v = np.zeros(nn)
    cdef double[::1] q2 = np.zeros(nn)
    cdef double[::1] v2 = np.zeros(nn)
    cdef double[::1] q3 = np.zeros(nn)
    cdef double[::1] v3 = np.zeros(nn)
    cdef double[::1] q4 = np.zeros(nn)
    cdef double[::1] v4 = np.zeros(nn)
    cdef double[::1] scal = np.zeros(4)

    cdef double[::1] to = t_out
    cdef double[:, ::1] qo = q_out
    cdef double[:, ::1] vo = v_out
    cdef double[:, ::1] xo = x_out
    cdef double[::1] co = c_out
    cdef double[::1] ho = h_out
    cdef double[::1] po = phi_out
    cdef double[:, ::1] uo = u_out
    cdef double[:, ::1] uno = unom_out
    cdef double[:, ::1] muo = mu_out
    cdef double[::1] so = s_out
    cdef double[::1] hdo = hdot_out
    cdef signed char[::1] ico = inc_out
    cdef signed char[::1] ieo = inceps_out
    cdef signed char[::1] ifo = infeas_out

    cdef Py_ssize_t k
    cdef int i, infeas, bad, nst = int(n_steps)
    cdef double step = dt
    cdef double t0, hval, cval, phi, hdot, qn, vn

    for k in range(nst + 1):
        t0 = k * step
        infeas = _derivs(t0, q, v, 0,
                         model_kind, nn, d, space, kappa_kind, nominal_kind,
                         ref_kind, mode, nwin, cd, k_h, eps, alpha_g,
                         a1, a2, b1, gz1, gz2, l1, l2,
                         mp, fm, ce, pm, kpv, kdv, rc, ra, rw, rp, ut,
                         wtv, wmv, dvec, pdv, gradb, gv, cvb, fvb, muv,
                         unomb, ub, accb, xb, uhold, scal)
        hval = scal[0]
        cval = scal[1]
        phi = scal[2]
        hdot = scal[3]
        to[k] = t0
        for i in range(nn):
            qo[k, i] = q[i]
            vo[k, i] = v[i]
            uo[k, i] = ub[i]
            uno[k, i] = unomb[i]
            muo[k, i] = muv[i]
        for i in range(d):
            xo[k, i] = xb[i]
        co[k] = cval
        ho[k] = hval
        po[k] = phi
        so[k] = -hval
        hdo[k] = hdot
        ico[k] = 1 if hval >= 0.0 else 0
        ieo[k] = 1 if hval >= eps else 0
        ifo[k] = infeas
        if k == nst:
            break
        for i in range(nn):
            k1v[i] = accb[i]
        if zoh:
            for i in range(nn):
                uhold[i] = ub[i]
        for i in range(nn):
            q2[i] = q[i] + 0.5 * step * v[i]
            v2[i] = v[i] + 0.5 * step * k1v[i]
        _derivs(t0 + 0.5 * step, q2, v2, zoh,
                model_kind, nn, d, space, kappa_kind, nominal_kind,
                ref_kind, mode, nwin, cd, k_h, eps, alpha_g,
                a1, a2, b1, gz1, gz2, l1, l2,
                mp, fm, ce, pm, kpv, kdv, rc, ra, rw, rp, ut,
                wtv, wmv, dvec, pdv, gradb, gv, cvb, fvb, muv,
                unomb, ub, accb, xb, uhold, scal)
        for i in range(nn):
            k2v[i] = accb[i]
        for i in range(nn):
            q3[i] = q[i] + 0.5 * step * v2[i]
            v3[i] = v[i] + 0.5 * step * k2v[i]
        _derivs(t0 + 0.5 * step, q3, v3, zoh,
                model_kind, nn, d, space, kappa_kind, nominal_kind,
                ref_kind, mode, nwin, cd, k_h, eps, alpha_g,
                a1, a2, b1, gz1, gz2, l1, l2,
                mp, fm, ce, pm, kpv, kdv, rc, ra, rw, rp, ut,
                wtv, wmv, dvec, pdv, gradb, gv, cvb, fvb, muv,
                unomb, ub, accb, xb, uhold, scal)
        for i in range(nn):
            k3v[i] = accb[i]
        for i in range(nn):
            q4[i] = q[i] + step * v3[i]
            v4[i] = v[i] + step * k3v[i]
        _derivs(t0 + step, q4, v4, zoh,
                model_kind, nn, d, space, kappa_kind, nominal_kind,
                ref_kind, mode, nwin, cd, k_h, eps, alpha_g,
                a1, a2, b1, gz1, gz2, l1, l2,
                mp, fm, ce, pm, kpv, kdv, rc, ra, rw, rp, ut,
                wtv, wmv, dvec, pdv, gradb, gv, cvb, fvb, muv,
                unomb, ub, accb, xb, uhold, scal)
        for i in range(nn):
            k4v[i] = accb[i]
        bad = 0
        for i in range(nn):
            qn = q[i] + step * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) / 6.0
            vn = v[i] + step * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i]
                                + k4v[i]) / 6.0
            if not isfinite(qn) or fabs(qn) > BOUND:
                bad = 1
            if not isfinite(vn) or fabs(vn) > BOUND:
                bad = 1
            q[i] = qn
            v[i] = vn
        if bad:
            return k + 1
    return 0
