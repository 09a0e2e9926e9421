# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; contract identical to ``_kernels_py``."""

from fractions import Fraction

import numpy as np

cimport cython

cdef enum:
    MAXN = 8


def supermodular_scan(values, int n):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t full = (1 << n) - 1
    cdef Py_ssize_t s, t, u, w
    cdef double best = 0.0, slack, vs, vu, vw
    cdef Py_ssize_t best_s = 0, best_t = 0
    with nogil:
        for s in range(1, full):
            vs = v[s - 1]
            for t in range(s + 1, full + 1):
                u = s | t
                w = s & t
                vw = v[w - 1] if w else 0.0
                slack = v[u - 1] + vw - vs - v[t - 1]
                if slack < best:
                    best = slack
                    best_s = s
                    best_t = t
    return best, best_s, best_t


def supermodular_local_scan(values, int n):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t full = (1 << n) - 1
    cdef Py_ssize_t s, a, b
    cdef int i, j
    cdef double best = 0.0, slack, vs
    cdef Py_ssize_t best_s = 0
    cdef int best_i = 0, best_j = 0
    with nogil:
        for s in range(full + 1):
            vs = v[s - 1] if s else 0.0
            for i in range(n):
                a = 1 << i
                if s & a:
                    continue
                for j in range(i + 1, n):
                    b = 1 << j
                    if s & b:
                        continue
                    slack = v[(s | a | b) - 1] + vs - v[(s | a) - 1] - v[(s | b) - 1]
                    if slack < best:
                        best = slack
                        best_s = s
                        best_i = i + 1
                        best_j = j + 1
    return best, best_s, best_i, best_j


cdef inline long long _gcd(long long a, long long b) nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef int _solve_support(int n, int k, long* cols, long long* num, long long* den) nogil:
    # status: 0 dependent, 1 inconsistent, 2 solved (nonpositive), 3 solved positive
    cdef long long rows[MAXN][MAXN + 1]
    cdef long long tmp, p, q, g, an, ad
    cdef int r, c, col, piv = 0
    for r in range(n):
        for c in range(k):
            rows[r][c] = (cols[c] >> r) & 1
        rows[r][k] = 1
    for col in range(k):
        r = piv
        while r < n and rows[r][col] == 0:
            r += 1
        if r == n:
            return 0
        if r != piv:
            for c in range(k + 1):
                tmp = rows[piv][c]
                rows[piv][c] = rows[r][c]
                rows[r][c] = tmp
        p = rows[piv][col]
        for r in range(piv + 1, n):
            q = rows[r][col]
            if q != 0:
                g = 0
                for c in range(k + 1):
                    rows[r][c] = p * rows[r][c] - q * rows[piv][c]
                    g = _gcd(g, rows[r][c])
                if g > 1:
                    for c in range(k + 1):
                        rows[r][c] = rows[r][c] // g
        piv += 1
    for r in range(k, n):
        if rows[r][k] != 0:
            return 1
    cdef int positive = 1
    for r in range(k - 1, -1, -1):
        # acc = rows[r][k] - sum_c rows[r][c] * beta[c], kept as an/ad
        an = rows[r][k]
        ad = 1
        for c in range(r + 1, k):
            an = an * den[c] - ad * rows[r][c] * num[c]
            ad = ad * den[c]
            g = _gcd(an, ad)
            if g > 1:
                an //= g
                ad //= g
        ad = ad * rows[r][r]
        if ad < 0:
            an = -an
            ad = -ad
        g = _gcd(an, ad)
        if g > 1:
            an //= g
            ad //= g
        num[r] = an
        den[r] = ad
        if an <= 0:
            positive = 0
    return 3 if positive else 2


def extreme_supports(int n):
    if n < 1 or n > MAXN:
        raise ValueError("n out of range for the compiled kernel")
    cdef long full = (1 << n) - 1
    cdef long stack[MAXN]
    cdef long long num[MAXN]
    cdef long long den[MAXN]
    cdef int depth = 0, status, c
    out = []
    # iterative DFS: stack holds the chosen columns, stack[depth] is the candidate
    stack[0] = 1
    while True:
        if stack[depth] > full:
            if depth == 0:
                break
            depth -= 1
            stack[depth] += 1
            continue
        status = _solve_support(n, depth + 1, stack, num, den)
        if status == 3:
            out.append((
                tuple([stack[c] for c in range(depth + 1)]),
                tuple([Fraction(num[c], den[c]) for c in range(depth + 1)]),
            ))
        if status != 0 and depth + 1 < n and stack[depth] < full:
            stack[depth + 1] = stack[depth] + 1
            depth += 1
        else:
            stack[depth] += 1
    return out
