"""Independent brute-force oracles used to freeze expected values.

Everything here is deliberately written from first principles (itertools
enumeration, hand-rolled least squares) so it shares no code path with the
implementations it checks.
"""

from __future__ import annotations

import itertools

import numpy as np


def cube_value_fn(f, x, baseline):
    """Map a feature subset (iterable of indices) to f at the mixed point."""
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(baseline, dtype=np.float64)

    def value(subset) -> float:
        point = b.copy()
        idx = list(subset)
        if idx:
            point[idx] = x[idx]
        return float(f(point))

    return value


def shapley_by_permutations(value, d: int) -> np.ndarray:
    """Average marginal contribution over all d! feature orderings."""
    phi = np.zeros(d)
    perms = list(itertools.permutations(range(d)))
    for perm in perms:
        members: list[int] = []
        prev = value(members)
        for k in perm:
            members.append(k)
            cur = value(members)
            phi[k] += cur - prev
            prev = cur
    return phi / len(perms)


def banzhaf_by_edges(value, d: int) -> np.ndarray:
    """Plain mean of f(S u {k}) - f(S) over all subsets S of the other features."""
    phi = np.zeros(d)
    for k in range(d):
        others = [j for j in range(d) if j != k]
        total = 0.0
        count = 0
        for r in range(len(others) + 1):
            for subset in itertools.combinations(others, r):
                total += value(list(subset) + [k]) - value(subset)
                count += 1
        phi[k] = total / count
    return phi


def unweighted_cube_ols(value, d: int) -> tuple[np.ndarray, float]:
    """Ordinary least squares of f over every cube vertex: (weights, intercept)."""
    rows = []
    ys = []
    for bits in itertools.product((0.0, 1.0), repeat=d):
        rows.append([1.0, *bits])
        ys.append(value([i for i, bit in enumerate(bits) if bit]))
    X = np.asarray(rows)
    y = np.asarray(ys)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta[1:], float(beta[0])


def central_difference(f, x, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        grad[k] = (f(xp) - f(xm)) / (2 * h)
    return grad


def grid_axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)
