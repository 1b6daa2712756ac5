# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel lane.

Hot inner loops behind the same call surface as `pure`: fused Lindblad
right-hand side and RK4 propagation (BLAS zgemm, no Python-level
temporaries), a cyclic complex Jacobi eigensolver with threshold
skipping, and a Cholesky positivity probe (LAPACK zpotrf).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm, zgemv
from scipy.linalg.cython_lapack cimport zpotrf

cnp.import_array()

NAME = "compiled"

ctypedef double complex zdouble


# ---------------------------------------------------------------- BLAS help

cdef inline void _zmm(zdouble alpha, zdouble* a, zdouble* b, zdouble beta,
                      zdouble* c, int n) noexcept nogil:
    # c = alpha*a@b + beta*c for row-major square buffers: BLAS sees the
    # transposes, and (a@b)^T = b^T a^T, so swap the operand order.
    cdef char nt = b'N'
    zgemm(&nt, &nt, &n, &n, &n, &alpha, b, &n, a, &n, &beta, c, &n)


cdef inline void _zmv(zdouble alpha, zdouble* a, zdouble* x, zdouble beta,
                      zdouble* y, int n) noexcept nogil:
    # y = alpha*a@x + beta*y for a row-major square matrix.
    cdef char t = b'T'
    cdef int one = 1
    zgemv(&t, &n, &n, &alpha, a, &n, x, &one, &beta, y, &one)


# ------------------------------------------------------------- master RHS

cdef void _rhs(zdouble* h, zdouble* r, zdouble* cops, zdouble* cdags,
               zdouble* cdcs, double* rates, int n_terms,
               zdouble* out, zdouble* t1, int n) noexcept nogil:
    # out <- -i[h, r] + sum_k (rate_k/2) (2 c r c+ - c+c r - r c+c)
    cdef int k, nn = n * n
    cdef zdouble g
    _zmm(-1j, h, r, 0, out, n)
    _zmm(1j, r, h, 1, out, n)
    for k in range(n_terms):
        g = rates[k]
        _zmm(1, cops + k * nn, r, 0, t1, n)
        _zmm(g, t1, cdags + k * nn, 1, out, n)
        _zmm(-0.5 * g, cdcs + k * nn, r, 1, out, n)
        _zmm(-0.5 * g, r, cdcs + k * nn, 1, out, n)


cdef void _assemble_h(zdouble* h0, zdouble* ms, zdouble* mdags,
                      double* omegas, int n_ms, double t,
                      zdouble* out, int n) noexcept nogil:
    # out <- h0 + sum_k ms[k] e^{i w_k t} + mdags[k] e^{-i w_k t}
    cdef int k, i, nn = n * n
    cdef double wt
    cdef zdouble ph, phc
    for i in range(nn):
        out[i] = h0[i]
    for k in range(n_ms):
        wt = omegas[k] * t
        ph = cos(wt) + 1j * sin(wt)
        phc = ph.conjugate()
        for i in range(nn):
            out[i] = out[i] + ph * ms[k * nn + i] + phc * mdags[k * nn + i]


cdef inline void _hermitize(zdouble* r, int n) noexcept nogil:
    cdef int i, j
    cdef zdouble v
    for i in range(n):
        r[i * n + i] = r[i * n + i].real
        for j in range(i + 1, n):
            v = 0.5 * (r[i * n + j] + r[j * n + i].conjugate())
            r[i * n + j] = v
            r[j * n + i] = v.conjugate()


def _pack_ops(ops, int n):
    """Stack a list of (n, n) complex operators into one contiguous block."""
    cdef int t = len(ops)
    packed = np.empty((max(t, 1), n, n), dtype=np.complex128)
    for k, op in enumerate(ops):
        packed[k] = op
    return packed


def lindblad_rhs(rho, h, cops, cdags, cdcs, rates):
    """One-shot master-equation right-hand side."""
    cdef int n = rho.shape[0]
    cdef int nt = len(cops)
    r = np.ascontiguousarray(rho, dtype=np.complex128)
    hm = np.ascontiguousarray(h, dtype=np.complex128)
    c_all = _pack_ops(cops, n)
    cd_all = _pack_ops(cdags, n)
    cdc_all = _pack_ops(cdcs, n)
    g = np.ascontiguousarray(rates, dtype=np.float64) if nt else np.zeros(1)
    out = np.empty((n, n), dtype=np.complex128)
    t1 = np.empty((n, n), dtype=np.complex128)
    cdef zdouble[:, ::1] rv = r, hv = hm, ov = out, t1v = t1
    cdef zdouble[:, :, ::1] cv = c_all, cdv = cd_all, cdcv = cdc_all
    cdef double[::1] gv = g
    with nogil:
        _rhs(&hv[0, 0], &rv[0, 0], &cv[0, 0, 0], &cdv[0, 0, 0],
             &cdcv[0, 0, 0], &gv[0], nt, &ov[0, 0], &t1v[0, 0], n)
    return out


def propagate_master(rho, h0, ms, omegas, cops, cdags, cdcs, rates,
                     double dt, double t0, int n_steps):
    """Advance rho by n_steps of RK4, re-Hermitizing after every step."""
    cdef int n = rho.shape[0]
    cdef int nt = len(cops)
    cdef int nm = len(ms)
    r = np.array(rho, dtype=np.complex128, order="C", copy=True)
    h0m = np.ascontiguousarray(h0, dtype=np.complex128)
    m_all = _pack_ops(list(ms), n)
    md_all = _pack_ops([m.conj().T for m in ms], n)
    w = np.ascontiguousarray(omegas, dtype=np.float64) if nm else np.zeros(1)
    c_all = _pack_ops(cops, n)
    cd_all = _pack_ops(cdags, n)
    cdc_all = _pack_ops(cdcs, n)
    g = np.ascontiguousarray(rates, dtype=np.float64) if nt else np.zeros(1)

    h = np.array(h0m, copy=True)
    k1 = np.empty((n, n), dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    rs = np.empty_like(k1)
    t1 = np.empty_like(k1)

    cdef zdouble[:, ::1] rv = r, hv = h, h0v = h0m
    cdef zdouble[:, ::1] k1v = k1, k2v = k2, k3v = k3, k4v = k4
    cdef zdouble[:, ::1] rsv = rs, t1v = t1
    cdef zdouble[:, :, ::1] cv = c_all, cdv = cd_all, cdcv = cdc_all
    cdef zdouble[:, :, ::1] mv = m_all, mdv = md_all
    cdef double[::1] gv = g, wv = w
    cdef int step, i, nn = n * n
    cdef double t
    cdef zdouble* rp = &rv[0, 0]
    cdef zdouble* hp = &hv[0, 0]

    with nogil:
        for step in range(n_steps):
            t = t0 + step * dt
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t, hp, n)
            _rhs(hp, rp, &cv[0, 0, 0], &cdv[0, 0, 0], &cdcv[0, 0, 0],
                 &gv[0], nt, &k1v[0, 0], &t1v[0, 0], n)

            for i in range(nn):
                (&rsv[0, 0])[i] = rp[i] + 0.5 * dt * (&k1v[0, 0])[i]
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t + 0.5 * dt, hp, n)
            _rhs(hp, &rsv[0, 0], &cv[0, 0, 0], &cdv[0, 0, 0], &cdcv[0, 0, 0],
                 &gv[0], nt, &k2v[0, 0], &t1v[0, 0], n)

            for i in range(nn):
                (&rsv[0, 0])[i] = rp[i] + 0.5 * dt * (&k2v[0, 0])[i]
            _rhs(hp, &rsv[0, 0], &cv[0, 0, 0], &cdv[0, 0, 0], &cdcv[0, 0, 0],
                 &gv[0], nt, &k3v[0, 0], &t1v[0, 0], n)

            for i in range(nn):
                (&rsv[0, 0])[i] = rp[i] + dt * (&k3v[0, 0])[i]
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t + dt, hp, n)
            _rhs(hp, &rsv[0, 0], &cv[0, 0, 0], &cdv[0, 0, 0], &cdcv[0, 0, 0],
                 &gv[0], nt, &k4v[0, 0], &t1v[0, 0], n)

            for i in range(nn):
                rp[i] = rp[i] + (dt / 6.0) * ((&k1v[0, 0])[i] + (&k4v[0, 0])[i]
                                              + 2.0 * ((&k2v[0, 0])[i]
                                                       + (&k3v[0, 0])[i]))
            _hermitize(rp, n)
    return r


def propagate_pure(psi, h0, ms, omegas, double dt, double t0, int n_steps):
    """RK4 on -i H(t) psi with per-step renormalization.

    Returns (psi_out, max_norm_drift).
    """
    cdef int n = psi.shape[0]
    cdef int nm = len(ms)
    p = np.array(psi, dtype=np.complex128, copy=True)
    h0m = np.ascontiguousarray(h0, dtype=np.complex128)
    m_all = _pack_ops(list(ms), n)
    md_all = _pack_ops([m.conj().T for m in ms], n)
    w = np.ascontiguousarray(omegas, dtype=np.float64) if nm else np.zeros(1)
    h = np.array(h0m, copy=True)

    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    ps = np.empty_like(k1)

    cdef zdouble[::1] pv = p, k1v = k1, k2v = k2, k3v = k3, k4v = k4, psv = ps
    cdef zdouble[:, ::1] hv = h, h0v = h0m
    cdef zdouble[:, :, ::1] mv = m_all, mdv = md_all
    cdef double[::1] wv = w
    cdef int step, i
    cdef double t, norm, drift, max_drift = 0.0
    cdef zdouble* hp = &hv[0, 0]

    with nogil:
        for step in range(n_steps):
            t = t0 + step * dt
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t, hp, n)
            _zmv(-1j, hp, &pv[0], 0, &k1v[0], n)
            for i in range(n):
                psv[i] = pv[i] + 0.5 * dt * k1v[i]
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t + 0.5 * dt, hp, n)
            _zmv(-1j, hp, &psv[0], 0, &k2v[0], n)
            for i in range(n):
                psv[i] = pv[i] + 0.5 * dt * k2v[i]
            _zmv(-1j, hp, &psv[0], 0, &k3v[0], n)
            for i in range(n):
                psv[i] = pv[i] + dt * k3v[i]
            if nm > 0:
                _assemble_h(&h0v[0, 0], &mv[0, 0, 0], &mdv[0, 0, 0],
                            &wv[0], nm, t + dt, hp, n)
            _zmv(-1j, hp, &psv[0], 0, &k4v[0], n)
            norm = 0.0
            for i in range(n):
                pv[i] = pv[i] + (dt / 6.0) * (k1v[i] + k4v[i]
                                              + 2.0 * (k2v[i] + k3v[i]))
                norm += pv[i].real * pv[i].real + pv[i].imag * pv[i].imag
            norm = sqrt(norm)
            drift = fabs(norm - 1.0)
            if drift > max_drift:
                max_drift = drift
            for i in range(n):
                pv[i] = pv[i] / norm
    return p, max_drift


# ------------------------------------------------------------- eigensolver

def eigvalsh_ascending(a):
    """All eigenvalues of a Hermitian matrix, ascending.

    Cyclic complex Jacobi: each (p, q) pair is phased to a real pivot and
    annihilated by a Givens rotation; pairs already below the convergence
    threshold are skipped, which makes near-diagonal inputs cheap.
    """
    cdef int n = a.shape[0]
    m = np.array(a, dtype=np.complex128, order="C", copy=True)
    if n == 1:
        return np.array([m[0, 0].real])
    cdef zdouble[:, ::1] av = m
    cdef int p, q, k, sweep, rotations
    cdef double scale = 0.0, thresh, alpha, beta, mag, theta, tt, c, s
    cdef zdouble apq, d, dc, xp, xq
    cdef int converged = 0

    with nogil:
        for p in range(n):
            for q in range(n):
                mag = fabs(av[p, q].real) + fabs(av[p, q].imag)
                if mag > scale:
                    scale = mag
        if scale == 0.0:
            converged = 1
        thresh = 1e-14 * scale
        for sweep in range(80):
            if converged:
                break
            rotations = 0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = av[p, q]
                    mag = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                    if mag <= thresh:
                        continue
                    rotations += 1
                    # phase column/row q so the pivot becomes real positive
                    d = apq.conjugate() / mag
                    dc = d.conjugate()
                    for k in range(n):
                        av[k, q] = av[k, q] * d
                    for k in range(n):
                        av[q, k] = av[q, k] * dc
                    # real Givens rotation in the (p, q) plane
                    alpha = av[p, p].real
                    beta = av[q, q].real
                    theta = (beta - alpha) / (2.0 * mag)
                    if theta >= 0:
                        tt = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        tt = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(tt * tt + 1.0)
                    s = tt * c
                    for k in range(n):
                        xp = av[k, p]
                        xq = av[k, q]
                        av[k, p] = c * xp - s * xq
                        av[k, q] = s * xp + c * xq
                    for k in range(n):
                        xp = av[p, k]
                        xq = av[q, k]
                        av[p, k] = c * xp - s * xq
                        av[q, k] = s * xp + c * xq
                    av[p, q] = 0
                    av[q, p] = 0
                    av[p, p] = alpha - tt * mag
                    av[q, q] = beta + tt * mag
            # a sweep that rotated nothing left the matrix untouched, so
            # every pair really is below threshold
            if rotations == 0:
                converged = 1
    if not converged:
        raise RuntimeError("Jacobi eigensolver failed to converge in 80 sweeps")
    vals = np.array([m[k, k].real for k in range(n)])
    vals.sort()
    return vals


def min_eig_at_least(a, double floor):
    """True iff Hermitian a has no eigenvalue below -floor (via zpotrf)."""
    cdef int n = a.shape[0]
    shifted = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef zdouble[:, ::1] sv = shifted
    cdef int i, info = 0
    cdef char lo = b'L'
    for i in range(n):
        sv[i, i] = sv[i, i] + floor
    # row-major Hermitian buffer read column-major is its conjugate, whose
    # positive-definiteness is the same
    with nogil:
        zpotrf(&lo, &n, &sv[0, 0], &n, &info)
    return info == 0
