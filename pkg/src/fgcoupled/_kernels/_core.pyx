# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef enum:
    BANACH = 0
    KANNAN = 1
    CHATTERJEA = 2
    REICH = 3
    HYBRID = 4
    QUASI = 5

cdef enum:
    CONVERGED = 0
    MAX_ITER = 1
    DIVERGED = 2


ctypedef const double *cptr


cdef double _pairwise_abs_diff(cptr p, cptr q, Py_ssize_t n) noexcept nogil:
    # Mirrors NumPy's pairwise summation of |p - q| so results match bit for bit.
    cdef double r0, r1, r2, r3, r4, r5, r6, r7, res
    cdef Py_ssize_t i, n2
    if n < 8:
        res = 0.0
        for i in range(n):
            res += fabs(p[i] - q[i])
        return res
    elif n <= 128:
        r0 = fabs(p[0] - q[0])
        r1 = fabs(p[1] - q[1])
        r2 = fabs(p[2] - q[2])
        r3 = fabs(p[3] - q[3])
        r4 = fabs(p[4] - q[4])
        r5 = fabs(p[5] - q[5])
        r6 = fabs(p[6] - q[6])
        r7 = fabs(p[7] - q[7])
        i = 8
        while i < n - (n % 8):
            r0 += fabs(p[i] - q[i])
            r1 += fabs(p[i + 1] - q[i + 1])
            r2 += fabs(p[i + 2] - q[i + 2])
            r3 += fabs(p[i + 3] - q[i + 3])
            r4 += fabs(p[i + 4] - q[i + 4])
            r5 += fabs(p[i + 5] - q[i + 5])
            r6 += fabs(p[i + 6] - q[i + 6])
            r7 += fabs(p[i + 7] - q[i + 7])
            i += 8
        res = ((r0 + r1) + (r2 + r3)) + ((r4 + r5) + (r6 + r7))
        while i < n:
            res += fabs(p[i] - q[i])
            i += 1
        return res
    else:
        n2 = n / 2
        n2 -= n2 % 8
        return _pairwise_abs_diff(p, q, n2) + _pairwise_abs_diff(p + n2, q + n2, n - n2)


cdef inline double _max5(double a, double b, double c, double d, double e) noexcept nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    if d > m:
        m = d
    if e > m:
        m = e
    return m


cdef void _slack_one(int code, const double *k, Py_ssize_t dx, Py_ssize_t dy,
                     cptr ax, cptr ay, cptr bx, cptr by,
                     cptr fa, cptr fb, cptr ga, cptr gb, double *out) noexcept nogil:
    cdef double dxu = _pairwise_abs_diff(ax, bx, dx)
    cdef double dyv = _pairwise_abs_diff(ay, by, dy)
    cdef double d_x_fxy, d_u_fuv, d_x_fuv, d_u_fxy
    cdef double d_y_gyx, d_v_gvu, d_y_gvu, d_v_gyx
    out[0] = _pairwise_abs_diff(fa, fb, dx)
    out[2] = _pairwise_abs_diff(gb, ga, dy)
    if code == BANACH:
        out[1] = k[0] * dxu + k[1] * dyv
        out[3] = k[2] * dyv + k[3] * dxu
        return
    d_x_fxy = _pairwise_abs_diff(ax, fa, dx)
    d_u_fuv = _pairwise_abs_diff(bx, fb, dx)
    d_x_fuv = _pairwise_abs_diff(ax, fb, dx)
    d_u_fxy = _pairwise_abs_diff(bx, fa, dx)
    d_y_gyx = _pairwise_abs_diff(by, gb, dy)
    d_v_gvu = _pairwise_abs_diff(ay, ga, dy)
    d_y_gvu = _pairwise_abs_diff(by, ga, dy)
    d_v_gyx = _pairwise_abs_diff(ay, gb, dy)
    if code == KANNAN:
        out[1] = k[0] * d_x_fxy + k[1] * d_u_fuv
        out[3] = k[2] * d_y_gyx + k[3] * d_v_gvu
    elif code == CHATTERJEA:
        out[1] = k[0] * d_x_fuv + k[1] * d_u_fxy
        out[3] = k[2] * d_y_gvu + k[3] * d_v_gyx
    elif code == REICH:
        out[1] = k[0] * d_x_fxy + k[1] * d_u_fuv + k[2] * dxu
        out[3] = k[0] * d_y_gyx + k[1] * d_v_gvu + k[2] * dyv
    elif code == HYBRID:
        out[1] = k[0] * d_x_fuv + k[1] * d_u_fxy + k[2] * dxu
        out[3] = k[0] * d_y_gvu + k[1] * d_v_gyx + k[2] * dyv
    else:
        out[1] = k[0] * _max5(dxu, d_x_fxy, d_x_fuv, d_u_fuv, d_u_fxy)
        out[3] = k[1] * _max5(dyv, d_y_gyx, d_y_gvu, d_v_gvu, d_v_gyx)


cdef inline double *_data(arr):
    return <double *> cnp.PyArray_DATA(arr)


cdef cnp.ndarray _c2d(a):
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError("expected a 2-D array")
    return out


def _check_code(int code):
    if code < BANACH or code > QUASI:
        raise ValueError(f"unknown class code {code}")


def pair_slacks(int code, consts, ax, ay, bx, by, Fa, Fb, Ga, Gb):
    _check_code(code)
    cdef cnp.ndarray c = np.ascontiguousarray(consts, dtype=np.float64)
    cdef list arrs = [_c2d(a) for a in (ax, ay, bx, by, Fa, Fb, Ga, Gb)]
    cdef Py_ssize_t n = arrs[0].shape[0], i
    cdef Py_ssize_t dx = arrs[0].shape[1], dy = arrs[1].shape[1]
    cdef cptr k = _data(c)
    cdef cptr AX = _data(arrs[0])
    cdef cptr AY = _data(arrs[1])
    cdef cptr BX = _data(arrs[2])
    cdef cptr BY = _data(arrs[3])
    cdef cptr FA = _data(arrs[4])
    cdef cptr FB = _data(arrs[5])
    cdef cptr GA = _data(arrs[6])
    cdef cptr GB = _data(arrs[7])
    out = np.empty((4, n), dtype=np.float64)
    cdef double *o = _data(out)
    cdef double buf[4]
    with nogil:
        for i in range(n):
            _slack_one(code, k, dx, dy, AX + i * dx, AY + i * dy, BX + i * dx, BY + i * dy,
                       FA + i * dx, FB + i * dx, GA + i * dy, GB + i * dy, buf)
            o[i] = buf[0]
            o[n + i] = buf[1]
            o[2 * n + i] = buf[2]
            o[3 * n + i] = buf[3]
    return out[0], out[1], out[2], out[3]


cdef inline bint _geq_mixed(cptr xi, cptr yi, cptr xj, cptr yj,
                            Py_ssize_t dx, Py_ssize_t dy) noexcept nogil:
    cdef Py_ssize_t t
    for t in range(dx):
        if not xi[t] >= xj[t]:
            return False
    for t in range(dy):
        if not yi[t] <= yj[t]:
            return False
    return True


def grid_scan(int code, consts, px, py, Fp, Gp, double rtol, Py_ssize_t max_keep):
    _check_code(code)
    cdef cnp.ndarray c = np.ascontiguousarray(consts, dtype=np.float64)
    cdef cnp.ndarray PXa = _c2d(px), PYa = _c2d(py), FPa = _c2d(Fp), GPa = _c2d(Gp)
    cdef Py_ssize_t n = PXa.shape[0], dx = PXa.shape[1], dy = PYa.shape[1], i, j
    cdef cptr k = _data(c)
    cdef cptr PX = _data(PXa)
    cdef cptr PY = _data(PYa)
    cdef cptr FP = _data(FPa)
    cdef cptr GP = _data(GPa)
    cdef long long n_pairs = 0, n_viol = 0
    cdef Py_ssize_t n_kept = 0
    cdef double worst_f = -INFINITY, worst_g = -INFINITY, sf, sg
    cdef double buf[4]
    kept_idx_arr = np.empty((max(max_keep, 0), 2), dtype=np.int64)
    kept_vals_arr = np.empty((max(max_keep, 0), 4), dtype=np.float64)
    cdef cnp.int64_t[:, :] kept_idx = kept_idx_arr
    cdef double[:, :] kept_vals = kept_vals_arr
    with nogil:
        for i in range(n):
            for j in range(n):
                if not _geq_mixed(PX + i * dx, PY + i * dy, PX + j * dx, PY + j * dy, dx, dy):
                    continue
                _slack_one(code, k, dx, dy, PX + i * dx, PY + i * dy, PX + j * dx, PY + j * dy,
                           FP + i * dx, FP + j * dx, GP + i * dy, GP + j * dy, buf)
                n_pairs += 1
                sf = buf[0] - buf[1]
                sg = buf[2] - buf[3]
                if sf > worst_f:
                    worst_f = sf
                if sg > worst_g:
                    worst_g = sg
                if sf > rtol * (buf[0] + buf[1]) or sg > rtol * (buf[2] + buf[3]):
                    n_viol += 1
                    if n_kept < max_keep:
                        kept_idx[n_kept, 0] = i
                        kept_idx[n_kept, 1] = j
                        kept_vals[n_kept, 0] = buf[0]
                        kept_vals[n_kept, 1] = buf[1]
                        kept_vals[n_kept, 2] = buf[2]
                        kept_vals[n_kept, 3] = buf[3]
                        n_kept += 1
    return (int(n_pairs), int(n_viol), worst_f, worst_g,
            kept_idx_arr[:n_kept].copy(), kept_vals_arr[:n_kept].copy())


cdef void _affine(const double[:, :] A, const double[:, :] B, const double[:] c,
                  const double[:] first, const double[:] second,
                  double[:] out) noexcept nogil:
    cdef Py_ssize_t i, j
    for i in range(out.shape[0]):
        out[i] = c[i]
    for j in range(A.shape[1]):
        for i in range(out.shape[0]):
            out[i] = out[i] + A[i, j] * first[j]
    for j in range(B.shape[1]):
        for i in range(out.shape[0]):
            out[i] = out[i] + B[i, j] * second[j]


def picard_affine(AF, BF, cF, AG, BG, cG, x0, y0, double tol_step,
                  double tol_residual, Py_ssize_t max_iter, double diverge_at):
    cdef const double[:, :] af = np.ascontiguousarray(AF, dtype=np.float64)
    cdef const double[:, :] bf = np.ascontiguousarray(BF, dtype=np.float64)
    cdef const double[:] cf = np.ascontiguousarray(cF, dtype=np.float64)
    cdef const double[:, :] ag = np.ascontiguousarray(AG, dtype=np.float64)
    cdef const double[:, :] bg = np.ascontiguousarray(BG, dtype=np.float64)
    cdef const double[:] cg = np.ascontiguousarray(cG, dtype=np.float64)
    cdef Py_ssize_t dx = af.shape[0], dy = ag.shape[0]
    cdef Py_ssize_t cap = min(max_iter + 1, 1024), n = 0
    xs_arr = np.empty((cap, dx), dtype=np.float64)
    ys_arr = np.empty((cap, dy), dtype=np.float64)
    steps_arr = np.empty(cap, dtype=np.float64)
    res_arr = np.empty(cap, dtype=np.float64)
    cdef double[:, :] xs = xs_arr
    cdef double[:, :] ys = ys_arr
    cdef double[:] steps = steps_arr
    cdef double[:] res = res_arr
    fx_arr = np.empty(dx, dtype=np.float64)
    gy_arr = np.empty(dy, dtype=np.float64)
    cdef double[:] fx = fx_arr
    cdef double[:] gy = gy_arr
    cdef double step, r
    cdef int status = MAX_ITER
    cdef Py_ssize_t it

    xs_arr[0] = np.asarray(x0, dtype=np.float64).reshape(dx)
    ys_arr[0] = np.asarray(y0, dtype=np.float64).reshape(dy)
    _affine(af, bf, cf, xs[0], ys[0], fx)
    _affine(ag, bg, cg, ys[0], xs[0], gy)
    r = _pairwise_abs_diff(&fx[0], &xs[0, 0], dx) + _pairwise_abs_diff(&gy[0], &ys[0, 0], dy)
    res[0] = r
    if r <= tol_step and r <= tol_residual:
        status = CONVERGED
    else:
        for it in range(max_iter):
            if n + 1 >= cap:
                cap = min(2 * cap, max_iter + 1)
                xs_arr = np.concatenate([xs_arr, np.empty((cap - xs_arr.shape[0], dx))])
                ys_arr = np.concatenate([ys_arr, np.empty((cap - ys_arr.shape[0], dy))])
                steps_arr = np.concatenate([steps_arr, np.empty(cap - steps_arr.shape[0])])
                res_arr = np.concatenate([res_arr, np.empty(cap - res_arr.shape[0])])
                xs = xs_arr
                ys = ys_arr
                steps = steps_arr
                res = res_arr
            step = _pairwise_abs_diff(&fx[0], &xs[n, 0], dx) + _pairwise_abs_diff(&gy[0], &ys[n, 0], dy)
            xs[n + 1, :] = fx
            ys[n + 1, :] = gy
            n += 1
            _affine(af, bf, cf, xs[n], ys[n], fx)
            _affine(ag, bg, cg, ys[n], xs[n], gy)
            r = _pairwise_abs_diff(&fx[0], &xs[n, 0], dx) + _pairwise_abs_diff(&gy[0], &ys[n, 0], dy)
            steps[n - 1] = step
            res[n] = r
            if not step <= diverge_at:
                status = DIVERGED
                break
            if step <= tol_step and r <= tol_residual:
                status = CONVERGED
                break
    return (xs_arr[:n + 1].copy(), ys_arr[:n + 1].copy(), steps_arr[:n].copy(),
            res_arr[:n + 1].copy(), status)
