"""Pure-Python implementations of the hot loops.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends produce
bit-identical results.
"""

from math import log

# status codes returned by ``advance``
REACHED = 0
NEED_UNIFORMS = 1
GROW = 2
CAPPED = 3
EXTINCT = 4

_TINY_PIVOT = 1e-300


def sturm_count(diag, off, x):
    """Number of eigenvalues strictly below ``x``.

    ``off`` holds the ``len(diag) - 1`` off-diagonal entries.
    """
    d = diag.tolist() if hasattr(diag, "tolist") else diag
    e = off.tolist() if hasattr(off, "tolist") else off
    count = 0
    q = d[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = _TINY_PIVOT
        q = (d[i] - x) - e[i - 1] * e[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def largest_eigenvalue(diag, off, lo, hi, tol, maxiter):
    """Bisect for the largest eigenvalue inside ``[lo, hi]``.

    Returns ``(lo, hi, iterations)``; the eigenvalue lies in ``[lo, hi]``.
    """
    d = diag.tolist() if hasattr(diag, "tolist") else list(diag)
    e = off.tolist() if hasattr(off, "tolist") else list(off)
    size = len(d)
    it = 0
    while hi - lo > tol and it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(d, e, mid) < size:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


def solve_shifted(diag, off, shift, rhs):
    """Solve ``(shift*I - T) y = rhs`` for symmetric tridiagonal ``T``.

    Thomas elimination without pivoting; stable because ``shift`` lies above
    the spectrum of ``T`` so the system matrix is positive definite.
    """
    d = diag.tolist() if hasattr(diag, "tolist") else list(diag)
    e = off.tolist() if hasattr(off, "tolist") else list(off)
    b = rhs.tolist() if hasattr(rhs, "tolist") else list(rhs)
    size = len(d)
    c = [0.0] * size
    y = [0.0] * size
    piv = shift - d[0]
    if piv == 0.0:
        piv = _TINY_PIVOT
    y[0] = b[0] / piv
    for i in range(1, size):
        c[i - 1] = -e[i - 1] / piv
        piv = (shift - d[i]) + e[i - 1] * c[i - 1]
        if piv == 0.0:
            piv = _TINY_PIVOT
        y[i] = (b[i] + e[i - 1] * y[i - 1]) / piv
    for i in range(size - 2, -1, -1):
        y[i] -= c[i] * y[i + 1]
    return y


def advance(counts, center, t, t_stop, kappa, n_abs, b0, death0, origin_rate,
            birth_add, birth_rate, uniforms, upos, cap, lo, hi):
    """Run exact-jump events until ``t_stop`` or an interruption.

    ``counts`` is an int64 array over a window whose site 0 sits at index
    ``center``; ``lo``/``hi`` bound the occupied indices.  Each event consumes
    two uniforms from ``uniforms`` starting at ``upos``.  ``birth_add[j]`` is
    the number of particles added by birth channel ``j`` (k - 1) and
    ``birth_rate[j]`` its per-particle rate; ``origin_rate`` must equal
    ``death0 + sum(birth_rate)``.

    Returns ``(status, t, upos, events, lo, hi)``; ``counts`` is updated in
    place.
    """
    c = counts.tolist()
    u = uniforms.tolist() if hasattr(uniforms, "tolist") else uniforms
    badd = list(birth_add)
    brate = list(birth_rate)
    nb = len(brate)
    nu = len(u)
    size = len(c)
    total = 0
    for i in range(lo, hi + 1):
        total += c[i]
    nabs = 0
    for k in range(1, n_abs + 1):
        nabs += c[center - k] + c[center + k]
    events = 0
    status = REACHED
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
                # rounding pushed s past the last occupied absorber
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
            dest = site - 1 if frac < 0.5 else site + 1
            c[site] -= 1
            c[dest] += 1
            if 0 < abs(site - center) <= n_abs:
                nabs -= 1
            if 0 < abs(dest - center) <= n_abs:
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
    counts[:] = c
    return status, t, upos, events, lo, hi
