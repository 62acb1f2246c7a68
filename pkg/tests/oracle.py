"""Brute-force root oracle: dense grid scan plus bisection refinement.

Independent of the staged solver in defcast.forecaster: the betting
function is evaluated directly from the history sums on a dense grid over
the forecast domain (with a separate q-grid on the non-singleton face of
the absolute loss game), the first sign change along the lexicographic
path is located, and the bracket is refined by plain bisection.
"""

from __future__ import annotations

import math

import numpy as np

from defcast.games import GameKind

# p-grids (and log exposures) are expensive at 10^6 points; reuse them
_GRID_CACHE: dict = {}


def _grid(kind: GameKind, grid_n: int):
    key = (kind, grid_n)
    if key not in _GRID_CACHE:
        if kind is GameKind.LOG:
            half = np.geomspace(1e-12, 0.5, grid_n // 2)
            ps = np.concatenate([half, 1.0 - half[::-1][1:]])
            _GRID_CACHE[key] = (ps, np.log((1.0 - ps) / ps))
        else:
            ps = np.linspace(0.0, 1.0, grid_n)
            _GRID_CACHE[key] = (ps, 1.0 - 2.0 * ps)
    return _GRID_CACHE[key]


def _sums(kernel, history, x):
    """Direct history sums: (sum e_i r_i, sum K(x,x_i) r_i, K(x,x))."""
    kxx = float(kernel.diag(x))
    if not history:
        return 0.0, 0.0, kxx
    es = np.array([h[4] for h in history])
    resid = np.array([h[3] - h[1] for h in history], dtype=float)
    xs = np.array([h[0] for h in history], dtype=float)
    krow = np.asarray(kernel(x, xs))
    return float(es @ resid), float(krow @ resid), kxx


def _exposure(game, p):
    if game.kind is GameKind.ABSOLUTE:
        return 1.0 if p < 0.5 else -1.0
    if game.kind is GameKind.SQUARE:
        return 1.0 - 2.0 * p
    return math.log((1.0 - p) / p)


def _first_flip(s):
    """Index i of the first sign change between i and i+1, or None."""
    signs = s > 0
    flips = np.nonzero(signs[1:] != signs[:-1])[0]
    zeros = np.nonzero(s == 0.0)[0]
    cand = []
    if flips.size:
        cand.append(int(flips[0]))
    if zeros.size:
        cand.append(int(zeros[0]))
    return min(cand) if cand else None


def _bisect(f, a, b):
    fa = f(a)
    if fa == 0.0:
        return a
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def oracle_forecast(game, kernel, history, x, grid_n=1_000_000, q_grid=1_000):
    """(p, q) of the first root along the path, or the endpoint rule.

    history rows are (x_i, p_i, q_i, y_i, e_i).
    """
    a_sum, k_sum, kxx = _sums(kernel, history, x)

    def s_of(p, e):
        return a_sum * e + k_sum + 0.5 * (e * e + kxx) * (1.0 - 2.0 * p)

    if game.kind is GameKind.LOG:
        ps, es = _grid(game.kind, grid_n)
        s = s_of(ps, es)
        i = _first_flip(s)
        if i is None:
            raise AssertionError("no root on a stripped domain")
        p = _bisect(lambda p: s_of(p, math.log((1.0 - p) / p)),
                    float(ps[i]), float(ps[i + 1]))
        return p, 0.5

    if game.kind is GameKind.SQUARE:
        ps, es = _grid(game.kind, grid_n)
        s = s_of(ps, es)
        i = _first_flip(s)
        if i is None:
            return (1.0 if s[0] > 0 else 0.0), 0.5
        p = _bisect(lambda p: s_of(p, 1.0 - 2.0 * p),
                    float(ps[i]), float(ps[i + 1]))
        return p, 0.5

    # absolute loss: path is p < 1/2 at e=1, the q-segment at p = 1/2
    # (S linear in e there), then p > 1/2 at e=-1
    ps, _ = _grid(GameKind.SQUARE, grid_n)
    left = ps[ps < 0.5]
    right = ps[ps > 0.5]
    qs = np.linspace(0.0, 1.0, q_grid + 1)
    s_left = s_of(left, 1.0)
    s_seg = a_sum * (1.0 - 2.0 * qs) + k_sum
    s_right = s_of(right, -1.0)
    s_all = np.concatenate([s_left, s_seg, s_right])
    i = _first_flip(s_all)
    if i is None:
        return (1.0 if s_all[0] > 0 else 0.0), 0.5
    n_l, n_s = len(s_left), len(s_seg)
    if i + 1 < n_l:
        p = _bisect(lambda p: s_of(p, 1.0), float(left[i]), float(left[i + 1]))
        return p, 0.5
    if i < n_l:  # junction: root in (last left p, 1/2] at e = 1
        p = _bisect(lambda p: s_of(p, 1.0), float(left[-1]), 0.5)
        return (p, 0.0) if p >= 0.5 else (p, 0.5)
    if i + 1 < n_l + n_s:  # inside the q-segment
        if a_sum == 0.0 and k_sum == 0.0:
            return 0.5, 0.5  # flat zero: root position unconstrained
        j = i - n_l
        q = _bisect(lambda q: a_sum * (1.0 - 2.0 * q) + k_sum,
                    float(qs[j]), float(qs[j + 1]))
        return 0.5, q
    if i < n_l + n_s:  # junction: root in [1/2, first right p) at e = -1
        p = _bisect(lambda p: s_of(p, -1.0), 0.5, float(right[0]))
        return (p, 1.0) if p <= 0.5 else (p, 0.5)
    j = i - n_l - n_s
    p = _bisect(lambda p: s_of(p, -1.0), float(right[j]), float(right[j + 1]))
    return p, 0.5
