"""Quadrature rules for simplices and boxes.

Simplex rules come from the Grundmann-Moller construction, which yields
fully symmetric rules of odd polynomial degree 2s+1 in any dimension; box
rules are tensor products of Gauss-Legendre.  Both are returned in a
normalized form: points in reference coordinates together with weights that
sum to one, so a physical integral is ``volume * sum(w_i * f(x_i))``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@lru_cache(maxsize=None)
def simplex_rule(k: int, s: int):
    """Grundmann-Moller rule of index ``s`` (degree 2s+1) on the k-simplex.

    Returns ``(bary, weights)`` with ``bary`` of shape (m, k+1) barycentric
    coordinates and ``weights`` summing to 1 (some may be negative).
    """
    d = 2 * s + 1
    pts = []
    wts = []
    for i in range(s + 1):
        denom = d + k - 2 * i
        w = ((-1.0) ** i * 2.0 ** (-2 * s) * denom ** d
             / (math.factorial(i) * math.factorial(d + k - i)))
        for beta in _compositions(s - i, k + 1):
            pts.append([(2 * b + 1) / denom for b in beta])
            wts.append(w)
    bary = np.array(pts)
    weights = np.array(wts) * math.factorial(k)  # normalize to sum 1
    return bary, weights


@lru_cache(maxsize=None)
def gauss_rule(npts: int):
    """Gauss-Legendre nodes/weights on [0, 1], weights summing to 1."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=None)
def box_rule(k: int, npts: int):
    """Tensor Gauss-Legendre rule on the unit k-cube (weights sum to 1)."""
    x1, w1 = gauss_rule(npts)
    idx = np.meshgrid(*([np.arange(npts)] * k), indexing="ij")
    idx = np.stack([g.ravel() for g in idx], axis=1)
    pts = x1[idx]
    wts = np.prod(w1[idx], axis=1)
    return pts, wts


def split_simplex_bary(k: int):
    """Midpoint subdivision of the reference k-simplex in barycentric form.

    Returns a list of (k+1, k+1) matrices whose rows are the barycentric
    coordinates of each child's corners with respect to the parent.
    Supported for k in {1, 2}; child 0 contains parent vertex 0.
    """
    eye = np.eye(k + 1)
    if k == 1:
        mid = np.array([0.5, 0.5])
        return [np.stack([eye[0], mid]), np.stack([mid, eye[1]])]
    if k == 2:
        m01 = (eye[0] + eye[1]) / 2
        m02 = (eye[0] + eye[2]) / 2
        m12 = (eye[1] + eye[2]) / 2
        return [np.stack([eye[0], m01, m02]),
                np.stack([eye[1], m12, m01]),
                np.stack([eye[2], m02, m12]),
                np.stack([m01, m12, m02])]
    raise NotImplementedError(f"simplex subdivision unsupported for k = {k}")


def simplex_volume(corners: np.ndarray) -> float:
    """Volume of a k-simplex with ``corners`` of shape (k+1, n)."""
    edges = corners[1:] - corners[0]
    gram = edges @ edges.T
    det = np.linalg.det(gram)
    k = len(corners) - 1
    return math.sqrt(max(det, 0.0)) / math.factorial(k)
