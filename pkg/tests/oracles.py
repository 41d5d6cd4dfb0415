"""Slow, independent reference computations used by the tests.

Nothing here imports the package's numeric paths; these are the
brute-force counterparts the faster code is checked against.
"""

import itertools
import math

import numpy as np


def letters(text):
    return tuple(int(c) for c in text)


def count_matrix(images, n):
    m = [[0] * n for _ in range(n)]
    for j, img in enumerate(images):
        for x in img:
            m[x - 1][j] += 1
    return m


def det_by_permutations(m):
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a, b in itertools.combinations(range(n), 2) if perm[a] > perm[b])
        prod = 1
        for i in range(n):
            prod *= m[i][perm[i]]
        total += (-1) ** inv * prod
    return total


def bisect_root(coeffs, lo, hi, iters=200):
    def p(x):
        return sum(c * x ** (len(coeffs) - 1 - t) for t, c in enumerate(coeffs))

    flo = p(lo)
    for _ in range(iters):
        mid = (lo + hi) / 2
        fm = p(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def letter_frequencies(m, iters=500):
    """Normalized right Perron vector by power iteration."""
    v = np.ones(len(m))
    m = np.asarray(m, dtype=float)
    for _ in range(iters):
        v = m @ v
        v /= v.sum()
    return v


def occurrences_brute(images, i):
    return sorted((j + 1, k + 1) for j, img in enumerate(images) for k, x in enumerate(img) if x == i)


def iterate(images, word, times):
    for _ in range(times):
        word = tuple(x for a in word for x in images[a - 1])
    return word


def strong_coincidence_brute(images, max_depth):
    """Per pair, the first depth where some position pair coincides; None if never."""
    n = len(images)

    def ab(w):
        return tuple(sum(1 for x in w if x == a) for a in range(1, n + 1))

    out = {}
    for j1, j2 in itertools.combinations(range(1, n + 1), 2):
        out[(j1, j2)] = None
        for k in range(1, max_depth + 1):
            w1 = iterate(images, (j1,), k)
            w2 = iterate(images, (j2,), k)
            hit = any(
                w1[p] == w2[q] and (ab(w1[:p]) == ab(w2[:q]) or ab(w1[p + 1:]) == ab(w2[q + 1:]))
                for p in range(len(w1)) for q in range(len(w2))
            )
            if hit:
                out[(j1, j2)] = k
                break
    return out


def hausdorff_brute(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def overlap_brute(a, b, cell):
    origin = np.minimum(np.min(a, axis=0), np.min(b, axis=0))
    ca = {tuple(math.floor(x) for x in (p - origin) / cell) for p in np.asarray(a)}
    cb = {tuple(math.floor(x) for x in (p - origin) / cell) for p in np.asarray(b)}
    return len(ca & cb) / min(len(ca), len(cb))


def free_reduce_slow(w):
    """Repeatedly strip the leftmost cancelling pair."""
    w = list(w)
    changed = True
    while changed:
        changed = False
        for t in range(len(w) - 1):
            if w[t] == -w[t + 1]:
                del w[t:t + 2]
                changed = True
                break
    return tuple(w)
