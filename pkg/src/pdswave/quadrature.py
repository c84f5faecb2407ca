"""Symmetric quadrature rules on the reference tetrahedron.

Barycentric points with weights summing to the reference volume 1/6.
The degree-2 rule is the classical 4-point rule; "degree 4" is served by a
14-point rule with positive weights that is in fact exact to degree 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDegree


@dataclass(frozen=True)
class QuadratureRule:
    degree: int
    points: np.ndarray    # (m, 4) barycentric coordinates
    weights: np.ndarray   # (m,), sum = 1/6


def _perm_1_3(a):
    """The four barycentric points with one coordinate 1-3a and three a."""
    pts = []
    for k in range(4):
        p = [a] * 4
        p[k] = 1.0 - 3.0 * a
        pts.append(p)
    return pts


def _perm_2_2(c):
    """The six barycentric points with two coordinates c and two 1/2 - c."""
    pts = []
    for i in range(4):
        for j in range(i + 1, 4):
            p = [c] * 4
            p[i] = p[j] = 0.5 - c
            pts.append(p)
    return pts


def quadrature_rule(degree: int) -> QuadratureRule:
    if degree == 2:
        a = (5.0 - math.sqrt(5.0)) / 20.0
        points = np.array(_perm_1_3(a))
        weights = np.full(4, 1.0 / 24.0)
    elif degree == 4:
        a = 0.31088591926330060980
        b = 0.092735250310891226402
        c = 0.045503704125649649492
        wa = 0.11268792571801585080 / 6.0
        wb = 0.073493043116361949544 / 6.0
        wc = 0.042546020777081466438 / 6.0
        points = np.array(_perm_1_3(a) + _perm_1_3(b) + _perm_2_2(c))
        weights = np.concatenate([np.full(4, wa), np.full(4, wb), np.full(6, wc)])
    else:
        raise UnsupportedDegree(f"no rule of degree {degree}; choose 2 or 4")
    return QuadratureRule(degree=degree, points=points, weights=weights)


def reference_monomial_integral(p: int, q: int, r: int) -> float:
    """Exact integral of x^p y^q z^r over the reference tetrahedron.

    Dirichlet's formula: p! q! r! / (p + q + r + 3)!.
    """
    return (math.factorial(p) * math.factorial(q) * math.factorial(r)
            / math.factorial(p + q + r + 3))
