"""Cumulative degree histograms of fractional degree lists.

Each entry ``a`` of a degree list is spread over the unit cells ``(k-1, k]``:
cell ``k`` receives ``min(1, max(0, a - (k-1)))``. Summing over entries gives
the cumulative histogram ``h(k)``, the (fractional) number of nodes of degree
at least ``k``. The map is 1-Lipschitz from padded l1 to l1, and differencing
turns it into a histogram at the cost of a factor 2.
"""

from __future__ import annotations

import numpy as np

from .flow import degree_list_extension
from .graph import Graph


def bracket(x, k):
    """Share of ``x`` that falls in the unit cell ``(k-1, k]``."""
    return np.clip(np.asarray(x, dtype=float) - (k - 1), 0.0, 1.0)


def cdh(a, D: int) -> np.ndarray:
    """Cumulative histogram ``h(k) = sum_i bracket(a_i, k)`` for ``k = 1..D``.

    Raises
    ------
    ValueError
        If an entry lies outside ``[0, D]``; the map is only defined there.
    """
    D = _check_D(D)
    a = np.asarray(a, dtype=float).ravel()
    if a.size and (a.min() < 0 or a.max() > D):
        bad = int(np.flatnonzero((a < 0) | (a > D))[0])
        raise ValueError(f"entry {bad} = {a[bad]!r} outside [0, {D}]")
    k = np.arange(1, D + 1, dtype=float)
    return np.clip(a[:, None] - (k - 1)[None, :], 0.0, 1.0).sum(axis=0)


def hist_from_cdh(h) -> np.ndarray:
    """Histogram counts ``h(i) - h(i+1)``, with the last entry kept as is."""
    h = np.asarray(h, dtype=float)
    out = h.copy()
    out[:-1] -= h[1:]
    return out


def degree_histogram_extension(g: Graph, D: int, tol: float | None = None, method: str = "exact") -> np.ndarray:
    """Degree histogram over degrees ``1..D`` that extends gracefully to all graphs.

    On graphs of maximum degree at most ``D`` this is the exact count of
    nodes of each degree. Degree 0 is not part of the output.
    """
    D = _check_D(D)
    ext = degree_list_extension(g, D, tol, method=method)
    return hist_from_cdh(cdh(np.clip(ext, 0.0, D), D))


def _check_D(D) -> int:
    if int(D) != D or D < 1:
        raise ValueError(f"threshold must be a positive integer, got {D!r}")
    return int(D)
