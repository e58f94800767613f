# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np

BACKEND = "cython"


def laplacian(const double complex[:, ::1] u, double h, double complex[:, ::1] out):
    cdef Py_ssize_t n = u.shape[0], i, j
    cdef double ih2 = 1.0 / (h * h)
    cdef double complex s
    for i in range(n):
        for j in range(n):
            s = -4.0 * u[i, j]
            if j > 0:
                s = s + u[i, j - 1]
            if j < n - 1:
                s = s + u[i, j + 1]
            if i > 0:
                s = s + u[i - 1, j]
            if i < n - 1:
                s = s + u[i + 1, j]
            out[i, j] = s * ih2


def lz(const double complex[:, ::1] u, const double[::1] coords, double h,
       double complex[:, ::1] out):
    cdef Py_ssize_t n = u.shape[0], i, j
    cdef double i2h = 1.0 / (2.0 * h)
    cdef double complex dx, dy, t
    for i in range(n):
        for j in range(n):
            dx = 0.0
            dy = 0.0
            if j > 0:
                dx = dx - u[i, j - 1]
            if j < n - 1:
                dx = dx + u[i, j + 1]
            if i > 0:
                dy = dy - u[i - 1, j]
            if i < n - 1:
                dy = dy + u[i + 1, j]
            # t = x dy - y dx; result = -i t / (2h)
            t = coords[j] * dy - coords[i] * dx
            out[i, j].real = t.imag * i2h
            out[i, j].imag = -t.real * i2h


from libc.stdlib cimport calloc, free


cdef inline double _node(const double complex* row, const double complex* up,
                         const double complex* dn, const double complex* oth,
                         const double* wrow, Py_ssize_t j, Py_ssize_t n,
                         double xj, double yi, double ih2, double i2h, double om,
                         double beta, double shift, double scale,
                         double* orow) noexcept nogil:
    cdef double complex a = row[j]
    cdef double complex left = row[j - 1] if j > 0 else 0.0
    cdef double complex right = row[j + 1] if j < n - 1 else 0.0
    cdef double complex above = dn[j]
    cdef double complex below = up[j]
    cdef double ur = a.real, ui = a.imag
    cdef double lr = left.real + right.real + above.real + below.real - 4.0 * ur
    cdef double li = left.imag + right.imag + above.imag + below.imag - 4.0 * ui
    # d/dx along j, d/dy along i; t = x dy - y dx
    cdef double tr = (xj * (above.real - below.real) - yi * (right.real - left.real)) * i2h
    cdef double ti = (xj * (above.imag - below.imag) - yi * (right.imag - left.imag)) * i2h
    # -1/2 lap + w u + beta u_other - om Lz u, with -om Lz u = i om t
    cdef double hr = -0.5 * ih2 * lr + wrow[j] * ur + beta * oth[j].real - om * ti
    cdef double hi = -0.5 * ih2 * li + wrow[j] * ui + beta * oth[j].imag + om * tr
    cdef double vr = shift * ur + scale * hr
    cdef double vi = shift * ui + scale * hi
    orow[2 * j] = vr
    orow[2 * j + 1] = vi
    return ur * vr + ui * vi


cdef double _apply(const double complex[:, :, ::1] u, const double[:, :, ::1] w,
                   const double[::1] coords, double h, double omega1, double omega2,
                   double beta, double shift, double scale,
                   double complex[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[1], c, i, j
    cdef double ih2 = 1.0 / (h * h)
    cdef double i2h = 1.0 / (2.0 * h)
    cdef double om, xj, yi, acc = 0.0
    cdef double ur, ui, vr, vi, tr, ti, hr, hi, lr, li
    cdef double complex a, left, right, above, below, o
    cdef const double complex* row
    cdef const double complex* up
    cdef const double complex* dn
    cdef const double complex* oth
    cdef const double* wrow
    cdef double* orow
    cdef double complex* zeros
    if n == 0:
        return 0.0
    zeros = <double complex*> calloc(n, sizeof(double complex))
    for c in range(2):
        om = omega1 if c == 0 else omega2
        for i in range(n):
            yi = coords[i]
            row = &u[c, i, 0]
            up = &u[c, i - 1, 0] if i > 0 else zeros
            dn = &u[c, i + 1, 0] if i < n - 1 else zeros
            oth = &u[1 - c, i, 0]
            wrow = &w[c, i, 0]
            orow = <double*> &out[c, i, 0]
            acc += _node(row, up, dn, oth, wrow, 0, n, coords[0], yi, ih2, i2h, om,
                         beta, shift, scale, orow)
            for j in range(1, n - 1):
                xj = coords[j]
                a = row[j]
                left = row[j - 1]
                right = row[j + 1]
                above = dn[j]
                below = up[j]
                o = oth[j]
                ur = a.real
                ui = a.imag
                lr = left.real + right.real + above.real + below.real - 4.0 * ur
                li = left.imag + right.imag + above.imag + below.imag - 4.0 * ui
                tr = (xj * (above.real - below.real) - yi * (right.real - left.real)) * i2h
                ti = (xj * (above.imag - below.imag) - yi * (right.imag - left.imag)) * i2h
                hr = -0.5 * ih2 * lr + wrow[j] * ur + beta * o.real - om * ti
                hi = -0.5 * ih2 * li + wrow[j] * ui + beta * o.imag + om * tr
                vr = shift * ur + scale * hr
                vi = shift * ui + scale * hi
                orow[2 * j] = vr
                orow[2 * j + 1] = vi
                acc += ur * vr + ui * vi
            if n > 1:
                acc += _node(row, up, dn, oth, wrow, n - 1, n, coords[n - 1], yi, ih2, i2h,
                             om, beta, shift, scale, orow)
    free(zeros)
    return acc


def apply_shifted(const double complex[:, :, ::1] u, const double[:, :, ::1] w,
                  const double[::1] coords, double h, double omega1, double omega2,
                  double beta, double shift, double scale, double complex[:, :, ::1] out):
    with nogil:
        _apply(u, w, coords, h, omega1, omega2, beta, shift, scale, out)


def apply_shifted_dot(const double complex[:, :, ::1] u, const double[:, :, ::1] w,
                      const double[::1] coords, double h, double omega1, double omega2,
                      double beta, double shift, double scale, double complex[:, :, ::1] out):
    cdef double acc
    with nogil:
        acc = _apply(u, w, coords, h, omega1, omega2, beta, shift, scale, out)
    return acc


cdef double _cg_update(double[::1] x, double[::1] r, const double[::1] p,
                       const double[::1] ap, double alpha) noexcept nogil:
    cdef Py_ssize_t k, m = x.shape[0]
    cdef double acc = 0.0, v
    for k in range(m):
        x[k] += alpha * p[k]
        v = r[k] - alpha * ap[k]
        r[k] = v
        acc += v * v
    return acc


cdef void _cg_direction(double[::1] p, const double[::1] r, double beta) noexcept nogil:
    cdef Py_ssize_t k, m = p.shape[0]
    for k in range(m):
        p[k] = r[k] + beta * p[k]


def _flat(a):
    return a.reshape(-1).view(np.float64)


def cg_update(x, r, p, ap, double alpha):
    cdef double[::1] xv = _flat(x), rv = _flat(r)
    cdef const double[::1] pv = _flat(p), apv = _flat(ap)
    cdef double acc
    with nogil:
        acc = _cg_update(xv, rv, pv, apv, alpha)
    return acc


def cg_direction(p, r, double beta):
    cdef double[::1] pv = _flat(p)
    cdef const double[::1] rv = _flat(r)
    with nogil:
        _cg_direction(pv, rv, beta)
