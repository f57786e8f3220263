# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``.

Operation order matches the Python versions exactly; do not reorder
arithmetic here without changing both files.
"""

from libc.math cimport log
from libc.stdlib cimport abs as iabs

cdef int REACHED = 0
cdef int NEED_UNIFORMS = 1
cdef int GROW = 2
cdef int CAPPED = 3
cdef int EXTINCT = 4

cdef double _TINY_PIVOT = 1e-300


cdef Py_ssize_t _sturm(const double[:] d, const double[:] e, double x) nogil:
    cdef Py_ssize_t i, count = 0
    cdef Py_ssize_t size = d.shape[0]
    cdef double q = d[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, size):
        if q == 0.0:
            q = _TINY_PIVOT
        q = (d[i] - x) - e[i - 1] * e[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def sturm_count(const double[:] diag, const double[:] off, double x):
    return _sturm(diag, off, x)


def largest_eigenvalue(const double[:] diag, const double[:] off, double lo,
                       double hi, double tol, long maxiter):
    cdef Py_ssize_t size = diag.shape[0]
    cdef long it = 0
    cdef double mid
    with nogil:
        while hi - lo > tol and it < maxiter:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _sturm(diag, off, mid) < size:
                lo = mid
            else:
                hi = mid
            it += 1
    return lo, hi, it


def solve_shifted(const double[:] diag, const double[:] off, double shift,
                  const double[:] rhs):
    cdef Py_ssize_t size = diag.shape[0]
    cdef Py_ssize_t i
    cdef double piv
    cdef double[:] c = _zeros(size)
    cdef double[:] y = _zeros(size)
    piv = shift - diag[0]
    if piv == 0.0:
        piv = _TINY_PIVOT
    y[0] = rhs[0] / piv
    for i in range(1, size):
        c[i - 1] = -off[i - 1] / piv
        piv = (shift - diag[i]) + off[i - 1] * c[i - 1]
        if piv == 0.0:
            piv = _TINY_PIVOT
        y[i] = (rhs[i] + off[i - 1] * y[i - 1]) / piv
    for i in range(size - 2, -1, -1):
        y[i] -= c[i] * y[i + 1]
    return [y[i] for i in range(size)]


cdef double[:] _zeros(Py_ssize_t size):
    import numpy
    return numpy.zeros(size, dtype=numpy.float64)


def advance(long long[:] c, Py_ssize_t center, double t, double t_stop,
            double kappa, Py_ssize_t n_abs, double b0, double death0,
            double origin_rate, birth_add, birth_rate,
            const double[:] u, Py_ssize_t upos, long long cap,
            Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t nb = len(birth_rate)
    cdef long long[:] badd = _int_array(birth_add)
    cdef double[:] brate = _float_array(birth_rate)
    cdef Py_ssize_t nu = u.shape[0]
    cdef Py_ssize_t size = c.shape[0]
    cdef long long total = 0, nabs = 0, n0
    cdef long long events = 0
    cdef int status = REACHED
    cdef Py_ssize_t i, j, k, site, dest
    cdef double u1, u2, r_origin, r_abs, rate, dt, target, s, frac

    for i in range(lo, hi + 1):
        total += c[i]
    for k in range(1, n_abs + 1):
        nabs += c[center - k] + c[center + k]

    with nogil:
        while True:
            if total == 0:
                status = EXTINCT
                break
            if upos + 2 > nu:
                status = NEED_UNIFORMS
                break
            u1 = u[upos]
            u2 = u[upos + 1]
            upos += 2
            n0 = c[center]
            r_origin = origin_rate * n0
            r_abs = b0 * nabs
            rate = kappa * total + r_abs + r_origin
            dt = -log(1.0 - u1) / rate
            if t + dt > t_stop:
                t = t_stop
                status = REACHED
                break
            t += dt
            events += 1
            target = u2 * rate
            if target < r_origin:
                s = target / n0
                if s < death0:
                    c[center] -= 1
                    total -= 1
                else:
                    s -= death0
                    j = 0
                    while j < nb - 1 and s >= brate[j]:
                        s -= brate[j]
                        j += 1
                    c[center] += badd[j]
                    total += badd[j]
            elif target < r_origin + r_abs:
                s = (target - r_origin) / b0
                site = center + n_abs
                for k in range(1, n_abs + 1):
                    if s < c[center - k]:
                        site = center - k
                        break
                    s -= c[center - k]
                    if s < c[center + k]:
                        site = center + k
                        break
                    s -= c[center + k]
                if c[site] == 0:
                    for k in range(n_abs, 0, -1):
                        if c[center + k] > 0:
                            site = center + k
                            break
                        if c[center - k] > 0:
                            site = center - k
                            break
                c[site] -= 1
                total -= 1
                nabs -= 1
            else:
                s = (target - r_origin - r_abs) / kappa
                site = hi
                for i in range(lo, hi + 1):
                    if s < c[i]:
                        site = i
                        break
                    s -= c[i]
                while c[site] == 0:
                    site -= 1
                frac = s / c[site]
                if frac < 0.5:
                    dest = site - 1
                else:
                    dest = site + 1
                c[site] -= 1
                c[dest] += 1
                if 0 < iabs(<int>(site - center)) <= n_abs:
                    nabs -= 1
                if 0 < iabs(<int>(dest - center)) <= n_abs:
                    nabs += 1
                if dest < lo:
                    lo = dest
                if dest > hi:
                    hi = dest
                if dest == 0 or dest == size - 1:
                    status = GROW
                    break
            if total > cap:
                status = CAPPED
                break
            while lo < hi and c[lo] == 0:
                lo += 1
            while hi > lo and c[hi] == 0:
                hi -= 1
    return status, t, upos, events, lo, hi


cdef long long[:] _int_array(values):
    import numpy
    return numpy.asarray(list(values), dtype=numpy.int64)


cdef double[:] _float_array(values):
    import numpy
    return numpy.asarray(list(values), dtype=numpy.float64)
