"""Numerical check that some Lipschitz maps admit no stretch-1 extension.

Four points at mutual distance 2 plus a fifth at distance 1 from each of
them. A 2-Lipschitz map sending the four points to the corners below (in
l1) can only be extended without stretch if some point lies within l1
distance 2 of every corner. We compute the smallest achievable worst-case
distance, ``m1``; any value above 2 rules the extension out, and ``m1 / 2``
lower-bounds the stretch. The planar analogue uses a unit equilateral
triangle under l2 with target radius 1/2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

TETRAHEDRON = np.array([[-1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, -1, -1]], dtype=float)
TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


@dataclass(frozen=True)
class GadgetReport:
    l1_radius: float
    l1_center: np.ndarray
    l2_radius: float
    l2_center: np.ndarray

    @property
    def l1_stretch(self) -> float:
        """Lower bound on the stretch of any extension into l1."""
        return self.l1_radius / 2.0

    @property
    def passed(self) -> bool:
        return self.l1_radius > 2.0 and self.l2_radius > 0.5


def minimax_radius(points, p: float, step: float = 1e-3, span: float | None = None):
    """Smallest ``max_i ||y - points_i||_p`` over ``y``, by grid refinement.

    A coarse grid over the bounding box is refined around the incumbent,
    halving the spacing until it drops below ``step``; coordinate descent
    sweeps polish each level.

    Returns
    -------
    radius : float
    center : ndarray
    """
    pts = np.asarray(points, dtype=float)
    dim = pts.shape[1]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    center = 0.5 * (lo + hi)
    h = (hi - lo).max() / 8.0 if span is None else span / 8.0

    def radius(y):
        # works for one point or a stack of points
        r = np.linalg.norm(y[..., None, :] - pts, ord=p, axis=-1).max(axis=-1)
        return float(r) if y.ndim == 1 else r

    offsets = np.array(list(itertools.product(range(-8, 9), repeat=dim)), dtype=float)
    best = radius(center)
    while True:
        cand = center + h * offsets
        r = radius(cand)
        i = int(np.argmin(r))
        if r[i] < best:
            best, center = float(r[i]), cand[i]
        center, best = _coordinate_descent(center, best, radius, h)
        if h < step:
            break
        h /= 2.0
    return best, center


def _coordinate_descent(y, best, radius, h):
    dim = y.shape[0]
    improved = True
    while improved:
        improved = False
        for j in range(dim):
            for sgn in (-1.0, 1.0):
                z = y.copy()
                z[j] += sgn * h
                r = radius(z)
                if r < best - 1e-15:
                    y, best, improved = z, r, True
    return y, best


def verify_stretch_gadget(step: float = 1e-3) -> GadgetReport:
    r1, c1 = minimax_radius(TETRAHEDRON, 1, step)
    r2, c2 = minimax_radius(TRIANGLE, 2, step)
    return GadgetReport(r1, c1, r2, c2)
