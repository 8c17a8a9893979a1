"""Independent reference implementations used as test oracles.

Each oracle recomputes a quantity by a different, deliberately naive route
(explicit loops, direct summation, numerical integration) so that agreement
with the package code is evidence rather than tautology.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def dense_mixture_grid(points, width, height, sigma, cols=20, rows=15):
    """Mixture of unit-mass 2-D Gaussians evaluated at every pixel (non-separably),
    then averaged over each cell by explicit loops and normalized."""
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    dense = np.zeros((height, width))
    for x, y in points:
        dense += np.exp(-((xs - x) ** 2 + (ys - y) ** 2) / (2 * sigma**2)) / (2 * np.pi * sigma**2)
    out = np.zeros((rows, cols))
    for r in range(rows):
        r0, r1 = math.ceil(r * height / rows), math.ceil((r + 1) * height / rows)
        for c in range(cols):
            c0, c1 = math.ceil(c * width / cols), math.ceil((c + 1) * width / cols)
            out[r, c] = dense[r0:r1, c0:c1].mean()
    return out / out.sum()


def cell_centre_mixture(points, width, height, sigma, cols=20, rows=15):
    """Mixture evaluated once at each cell centre, normalized."""
    out = np.zeros((rows, cols))
    for r in range(rows):
        cy = (r + 0.5) * height / rows
        for c in range(cols):
            cx = (c + 0.5) * width / cols
            out[r, c] = sum(math.exp(-((cx - x) ** 2 + (cy - y) ** 2) / (2 * sigma**2)) for x, y in points)
    return out / out.sum()


def entropy_direct(p):
    total = 0.0
    for v in np.asarray(p, dtype=float).ravel():
        if v > 0:
            total -= v * math.log(v, 2)
    return total


def histogram_scan(values, lo, hi, n_bins):
    """Bin each value on its own: bin k holds lo + k*w <= v < lo + (k+1)*w,
    with everything at or past the last left edge in the final bin."""
    w = (hi - lo) / n_bins
    counts = [0] * n_bins
    for v in values:
        k = 0
        while k < n_bins - 1 and v >= lo + (k + 1) * w:
            k += 1
        counts[k] += 1
    return np.array(counts, dtype=float)


def anova_direct(groups):
    """F statistic by explicit double summation."""
    allv = [v for g in groups for v in g]
    n, k = len(allv), len(groups)
    grand = sum(allv) / n
    ssb = 0.0
    ssw = 0.0
    for g in groups:
        m = sum(g) / len(g)
        ssb += len(g) * (m - grand) ** 2
        for v in g:
            ssw += (v - m) ** 2
    return (ssb / (k - 1)) / (ssw / (n - k))


def f_pdf(x, d1, d2):
    logc = (math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
            + (d1 / 2) * math.log(d1 / d2))
    return math.exp(logc + (d1 / 2 - 1) * math.log(x) - ((d1 + d2) / 2) * math.log1p(d1 * x / d2))


def f_sf_quad(F, d1, d2):
    """Upper tail of the F distribution by adaptive quadrature of its density."""
    if F <= 0:
        return 1.0
    # integrate the smaller tail for accuracy, split at the mode region
    upper, _ = integrate.quad(f_pdf, F, np.inf, args=(d1, d2), epsabs=1e-14, epsrel=1e-12, limit=500)
    if upper < 0.5:
        return upper
    lower, _ = integrate.quad(f_pdf, 0, F, args=(d1, d2), epsabs=1e-14, epsrel=1e-12, limit=500,
                              points=[min(F, 1.0)])
    return 1.0 - lower


def binomial_two_sided(k, n):
    """Exact two-sided sign-test p from the binomial pmf (doubling the smaller tail)."""
    tail = sum(math.comb(n, i) for i in range(min(k, n - k) + 1)) / 2**n
    return min(1.0, 2 * tail)


def roc_auc_pairs(scores, positive):
    """AUC as the probability a positive outscores a negative (ties count half)."""
    s = np.asarray(scores).ravel()
    pos = np.asarray(positive).ravel().astype(bool)
    P, N = s[pos], s[~pos]
    wins = 0.0
    for a in P:
        wins += np.sum(a > N) + 0.5 * np.sum(a == N)
    return wins / (P.size * N.size)


def nearest_centroid_accuracy(X, y, n_splits=5, seed=0):
    """Balanced accuracy of a nearest-class-mean rule under stratified k-fold."""
    rng = np.random.default_rng(seed)
    classes = np.unique(y)
    fold = np.empty(y.size, dtype=int)
    for c in classes:
        idx = rng.permutation(np.flatnonzero(y == c))
        fold[idx] = np.arange(idx.size) % n_splits
    pred = np.empty_like(y)
    for f in range(n_splits):
        tr, te = fold != f, fold == f
        cents = np.array([X[tr & (y == c)].mean(axis=0) for c in classes])
        d = ((X[te][:, None, :] - cents[None]) ** 2).sum(-1)
        pred[te] = classes[np.argmin(d, axis=1)]
    return float(np.mean([np.mean(pred[y == c] == c) for c in classes]))
