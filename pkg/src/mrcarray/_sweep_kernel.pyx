# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-frequency Kirchhoff solve.

Mirrors :func:`mrcarray._sweep_kernel_py.solve_unit_drive`; see there for the
contract.
"""

from libc.math cimport NAN

import numpy as np

cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def solve_unit_drive(const double[:, ::1] mutual, const double[::1] resistance,
                     const double[::1] capacitance, Py_ssize_t drive,
                     const double[::1] omegas, double pivot_tol):
    cdef Py_ssize_t n_el = resistance.shape[0]
    cdef Py_ssize_t n_pts = omegas.shape[0]
    cdef Py_ssize_t n = n_el - 1
    cdef Py_ssize_t p, i, j, r, piv, ii, jj
    cdef double w, scale, best, mag, tol2
    cdef double complex jw, f, acc, zc, tmp

    z_coil_arr = np.empty(n_pts, dtype=np.complex128)
    currents_arr = np.zeros((n_pts, n_el), dtype=np.complex128)
    status_arr = np.zeros(n_pts, dtype=np.int8)
    cdef double complex[::1] z_coil = z_coil_arr
    cdef double complex[:, ::1] currents = currents_arr
    cdef signed char[::1] status = status_arr

    # passive element indices in row order
    idx_arr = np.array([e for e in range(n_el) if e != drive], dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    a_arr = np.empty((max(n, 1), max(n, 1)), dtype=np.complex128)
    b_arr = np.empty(max(n, 1), dtype=np.complex128)
    x_arr = np.empty(max(n, 1), dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[::1] b = b_arr
    cdef double complex[::1] x = x_arr

    with nogil:
        for p in range(n_pts):
            w = omegas[p]
            jw = 1j * w
            zc = resistance[drive] + jw * mutual[drive, drive]
            if n == 0:
                z_coil[p] = zc
                currents[p, drive] = 1.0
                continue

            scale = 0.0
            for i in range(n):
                ii = idx[i]
                for j in range(n):
                    jj = idx[j]
                    if i == j:
                        a[i, j] = resistance[ii] + jw * mutual[ii, ii] + 1.0 / (jw * capacitance[ii])
                        # the reactances cancel at resonance; measure against their size
                        mag = w * mutual[ii, ii] + 1.0 / (w * capacitance[ii])
                        mag = mag * mag
                        if mag > scale:
                            scale = mag
                    else:
                        a[i, j] = jw * mutual[ii, jj]
                    mag = _abs2(a[i, j])
                    if mag > scale:
                        scale = mag
                b[i] = -jw * mutual[ii, drive]
            tol2 = pivot_tol * pivot_tol * scale

            for j in range(n):
                piv = j
                best = _abs2(a[j, j])
                for r in range(j + 1, n):
                    mag = _abs2(a[r, j])
                    if mag > best:
                        best = mag
                        piv = r
                if piv != j:
                    for jj in range(j, n):
                        tmp = a[j, jj]
                        a[j, jj] = a[piv, jj]
                        a[piv, jj] = tmp
                    tmp = b[j]
                    b[j] = b[piv]
                    b[piv] = tmp
                if best <= tol2:
                    status[p] = 1
                    break
                for r in range(j + 1, n):
                    f = a[r, j] / a[j, j]
                    if f != 0:
                        for jj in range(j, n):
                            a[r, jj] = a[r, jj] - f * a[j, jj]
                        b[r] = b[r] - f * b[j]

            if status[p]:
                z_coil[p] = NAN
                for i in range(n_el):
                    currents[p, i] = NAN
                continue

            for i in range(n - 1, -1, -1):
                acc = b[i]
                for jj in range(i + 1, n):
                    acc = acc - a[i, jj] * x[jj]
                x[i] = acc / a[i, i]

            currents[p, drive] = 1.0
            for i in range(n):
                ii = idx[i]
                currents[p, ii] = x[i]
                zc = zc + jw * mutual[drive, ii] * x[i]
            z_coil[p] = zc

    return z_coil_arr, currents_arr, status_arr
