"""Pure-Python/numpy implementations of the hot loops.

These mirror ``_kernels.pyx`` exactly (same iteration order, same tie
breaking) and are used whenever the compiled extension is unavailable.
"""

from fractions import Fraction
from math import gcd

import numpy as np


def _extended(values):
    vext = np.empty(len(values) + 1, dtype=np.float64)
    vext[0] = 0.0
    vext[1:] = values
    return vext


def supermodular_scan(values, n):
    """Minimum of v(s|t) + v(s&t) - v(s) - v(t) over nonempty s < t.

    Returns ``(min_slack, s, t)``; ``s == t == 0`` when no pair beats the
    trivial slack 0 attained by comparable pairs.
    """
    vext = _extended(np.asarray(values, dtype=np.float64))
    full = (1 << n) - 1
    best, best_s, best_t = 0.0, 0, 0
    masks = np.arange(1, full + 1)
    for s in range(1, full):
        t = masks[s:]
        slack = vext[s | t] + vext[s & t] - vext[s] - vext[t]
        k = int(np.argmin(slack))
        if slack[k] < best:
            best, best_s, best_t = float(slack[k]), s, int(t[k])
    return best, best_s, best_t


def supermodular_local_scan(values, n):
    """Minimum of v(s+i+j) + v(s) - v(s+i) - v(s+j) over s (possibly empty), i < j not in s.

    Returns ``(min_slack, s, i, j)`` with 1-based ``i, j``.
    """
    vext = _extended(np.asarray(values, dtype=np.float64))
    full = (1 << n) - 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not pairs:
        return 0.0, 0, 0, 0
    bi = np.array([1 << i for i, _ in pairs])
    bj = np.array([1 << j for _, j in pairs])
    best, best_s, best_i, best_j = 0.0, 0, 0, 0
    for s in range(full + 1):
        free = ((bi & s) == 0) & ((bj & s) == 0)
        if not free.any():
            continue
        a, b = bi[free], bj[free]
        slack = vext[s | a | b] + vext[s] - vext[s | a] - vext[s | b]
        k = int(np.argmin(slack))
        if slack[k] < best:
            idx = np.flatnonzero(free)[k]
            best, best_s = float(slack[k]), s
            best_i, best_j = pairs[idx][0] + 1, pairs[idx][1] + 1
    return best, best_s, best_i, best_j


def _solve_support(n, cols):
    # status: 0 dependent, 1 inconsistent, 2 solved (nonpositive), 3 solved positive
    k = len(cols)
    rows = [[(c >> i) & 1 for c in cols] + [1] for i in range(n)]
    piv = 0
    for col in range(k):
        r = piv
        while r < n and rows[r][col] == 0:
            r += 1
        if r == n:
            return 0, None
        rows[piv], rows[r] = rows[r], rows[piv]
        p = rows[piv][col]
        for r in range(piv + 1, n):
            q = rows[r][col]
            if q:
                row = [p * a - q * b for a, b in zip(rows[r], rows[piv])]
                g = 0
                for a in row:
                    g = gcd(g, a)
                rows[r] = [a // g for a in row] if g > 1 else row
        piv += 1
    for r in range(k, n):
        if rows[r][k] != 0:
            return 1, None
    beta = [Fraction(0)] * k
    for r in range(k - 1, -1, -1):
        acc = Fraction(rows[r][k])
        for c in range(r + 1, k):
            acc -= rows[r][c] * beta[c]
        beta[r] = acc / rows[r][r]
    if all(b > 0 for b in beta):
        return 3, beta
    return 2, beta


def extreme_supports(n):
    """All strictly positive basic solutions of the fractional-partition system.

    Depth-first over column sets in increasing mask order, pruning as soon as
    the chosen incidence columns become linearly dependent. Returns a list of
    ``(masks, weights)`` with exact ``Fraction`` weights.
    """
    full = (1 << n) - 1
    out = []

    def dfs(start, chosen):
        for c in range(start, full + 1):
            cols = chosen + [c]
            status, beta = _solve_support(n, cols)
            if status == 0:
                continue
            if status == 3:
                out.append((tuple(cols), tuple(beta)))
            if len(cols) < n:
                dfs(c + 1, cols)

    dfs(1, [])
    return out
