"""Compiled inner loops for the CBC search and worst-case error sums."""

import math

import numpy as np
from numba import njit

_THIRD = 1.0 / 3.0


@njit(cache=True)
def _k(x, y):
    return _THIRD + 0.5 * (x * x + y * y) - max(x, y)


@njit(cache=True)
def hankel_columns(q, p, m, cols):
    """Generator columns of ``q / p``; see polylattice.generator_columns."""
    dp = 0
    t = p
    while t > 1:
        t >>= 1
        dp += 1
    top = np.int64(1) << dp
    u = np.int64(0)
    r = np.int64(q)
    for _ in range(2 * m):
        r <<= 1
        u <<= 1
        if r & top:
            u |= 1
            r ^= p
    mask = (np.int64(1) << m) - 1
    for k in range(m):
        cols[k] = (u >> (m - k)) & mask


@njit(cache=True)
def span(cols, m, out):
    out[0] = 0
    size = 1
    for k in range(m):
        c = cols[k]
        for i in range(size):
            out[size + i] = out[i] ^ c
        size <<= 1


@njit(cache=True)
def scan_wce(cands, p, m, E):
    """``sum_{i,h} E[i,h] k(x_i, x_h)`` for every candidate.

    ``E`` holds ``prod_j (1 + gamma_j k) - 1`` over the dimensions fixed so
    far; the all-ones part is the same for every candidate and is omitted.
    """
    n = 1 << m
    inv = 1.0 / n
    cols = np.empty(m, np.int64)
    v = np.empty(n, np.int64)
    x = np.empty(n, np.float64)
    out = np.empty(cands.size, np.float64)
    for c in range(cands.size):
        hankel_columns(cands[c], p, m, cols)
        span(cols, m, v)
        for i in range(n):
            x[i] = v[i] * inv
        total = 0.0
        for i in range(n):
            xi = x[i]
            row = 0.0
            for h in range(i):
                row += E[i, h] * _k(xi, x[h])
            total += 2.0 * row + E[i, i] * _k(xi, xi)
        out[c] = total
    return out


@njit(cache=True)
def update_wce(q, p, m, gamma, E):
    n = 1 << m
    inv = 1.0 / n
    cols = np.empty(m, np.int64)
    v = np.empty(n, np.int64)
    hankel_columns(q, p, m, cols)
    span(cols, m, v)
    total = 0.0
    for i in range(n):
        xi = v[i] * inv
        for h in range(n):
            E[i, h] += gamma * _k(xi, v[h] * inv) * (1.0 + E[i, h])
            total += E[i, h]
    return total * inv * inv


@njit(cache=True)
def _phi(v, m):
    # expected kernel value of a scrambled pair whose digit difference is v
    if v == 0:
        return 1.0 / 6.0
    e = math.frexp(float(v))[1]  # bit length of v
    return 1.0 / 6.0 - 0.25 * math.ldexp(1.0, e - m)


@njit(cache=True)
def phi_table(m):
    n = 1 << m
    tab = np.empty(n, np.float64)
    for v in range(n):
        tab[v] = _phi(v, m)
    return tab


@njit(cache=True)
def scan_scrambled(cands, p, m, E):
    n = 1 << m
    tab = phi_table(m)
    cols = np.empty(m, np.int64)
    v = np.empty(n, np.int64)
    out = np.empty(cands.size, np.float64)
    for c in range(cands.size):
        hankel_columns(cands[c], p, m, cols)
        span(cols, m, v)
        total = 0.0
        for i in range(n):
            total += E[i] * tab[v[i]]
        out[c] = total
    return out


@njit(cache=True)
def update_scrambled(q, p, m, gamma, E):
    n = 1 << m
    cols = np.empty(m, np.int64)
    v = np.empty(n, np.int64)
    hankel_columns(q, p, m, cols)
    span(cols, m, v)
    total = 0.0
    for i in range(n):
        E[i] += gamma * _phi(v[i], m) * (1.0 + E[i])
        total += E[i]
    return total / n


@njit(cache=True)
def wce_double_sum(X, gam):
    """``(1/n^2) sum_{i,h} [prod_j (1 + gam_j k(x_ij, x_hj)) - 1]``."""
    n, s = X.shape
    total = 0.0
    for i in range(n):
        row = 0.0
        for h in range(i + 1):
            term = 0.0
            for j in range(s):
                term += gam[j] * _k(X[i, j], X[h, j]) * (1.0 + term)
            row += term if h == i else 2.0 * term
        total += row
    return total / (n * n)
