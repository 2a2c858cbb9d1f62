"""Confocal elliptic coordinates for the quadric (b1 x1^2 + b2 x2^2 + b3 x3^2)/2
and the algebraic inversion x_j^2 = x_j^2(f, g, r^2).

The coordinates (lam1 <= lam2 <= lam3) are the roots of

    sum_j x_j^2 / (w + 1/b_j) = 1,

a cubic in w whose roots interlace the -1/b_j.  Roots come from the
companion-matrix eigenvalues (numpy); a Cardano evaluation is kept alongside
as an independent oracle for the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainBoundaryError
from .fields import as_vec3


def elliptic_cubic_coeffs(binv, x) -> np.ndarray:
    """Coefficients [w^3, w^2, w^1, w^0] of the defining cubic (monic * -1).

    -w^3 + (r^2 - sum binv) w^2 + (sum_j x_j^2 (binv_k + binv_l) - e2(binv)) w
        + binv1 binv2 binv3 (sum_j x_j^2 / binv_j - 1) = 0
    """
    b = as_vec3(binv)
    x = as_vec3(x)
    x2 = x * x
    e1 = b.sum()
    e2 = b[0] * b[1] + b[0] * b[2] + b[1] * b[2]
    e3 = b[0] * b[1] * b[2]
    c2 = float(x2.sum() - e1)
    c1 = float(x2[0] * (b[1] + b[2]) + x2[1] * (b[0] + b[2]) + x2[2] * (b[0] + b[1]) - e2)
    c0 = float(e3 * ((x2 / b).sum() - 1.0))
    return np.array([-1.0, c2, c1, c0])


def cardano_roots(coeffs) -> np.ndarray:
    """Real roots of a cubic via the trigonometric Cardano form (test oracle)."""
    a, b, c, d = (float(v) for v in coeffs)
    b, c, d = b / a, c / a, d / a
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    if disc < 0:
        raise DomainBoundaryError("cubic has complex roots; point off the chart domain")
    if abs(p) < 1e-300:
        return np.array([shift - np.cbrt(q)] * 3)
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    return np.sort(np.array(roots))


@dataclass(frozen=True)
class EllipticCoords:
    lam: np.ndarray          # sorted, lam1 <= lam2 <= lam3
    binv: np.ndarray

    def reconstruct_squares(self) -> np.ndarray:
        """x_j^2 from the residue formula; inverts the coordinate map."""
        lam, b = self.lam, self.binv
        x2 = np.empty(3)
        for j in range(3):
            num = np.prod(lam + b[j])
            den = np.prod([b[j] - b[k] for k in range(3) if k != j])
            x2[j] = num / den
        return x2

    def metric_coefficients(self) -> np.ndarray:
        """Diagonal induced-metric coefficients g_mm in the lam coordinates:
        g_mm = prod_{i != m}(lam_m - lam_i) / (4 prod_k (lam_m + binv_k))."""
        lam, b = self.lam, self.binv
        g = np.empty(3)
        for m_ in range(3):
            num = np.prod([lam[m_] - lam[i] for i in range(3) if i != m_])
            den = 4.0 * np.prod(lam[m_] + b)
            g[m_] = num / den
        return g


def elliptic_coordinates(binv, x, degeneracy_tol: float = 1e-9) -> EllipticCoords:
    """Elliptic coordinates of x for pairwise-distinct 1/b_j.

    Raises DomainBoundaryError on coordinate axes / planes (degenerate cubic)
    and ValueError for repeated binv values.
    """
    b = as_vec3(binv)
    x = as_vec3(x)
    if min(abs(b[0] - b[1]), abs(b[0] - b[2]), abs(b[1] - b[2])) <= degeneracy_tol:
        raise ValueError("binv values must be pairwise distinct")
    coeffs = elliptic_cubic_coeffs(b, x)
    roots = np.roots(coeffs)
    if np.abs(roots.imag).max() > 1e-8 * (1.0 + np.abs(roots.real).max()):
        raise DomainBoundaryError("complex coordinate roots; x off the valid domain")
    lam = np.sort(roots.real)
    if min(abs(lam[1] - lam[0]), abs(lam[2] - lam[1])) <= degeneracy_tol * (1.0 + np.abs(lam).max()):
        raise DomainBoundaryError("repeated coordinate roots (coordinate plane/axis)")
    gap = min(abs(l + bv) for l in lam for bv in b)
    if gap <= degeneracy_tol * (1.0 + np.abs(lam).max()):
        raise DomainBoundaryError("coordinate root hits a focal value -1/b (axis point)")
    return EllipticCoords(lam, b)


def quadric_inverse(bs, f: float, g: float, r2: float) -> np.ndarray:
    """Squares (x1^2, x2^2, x3^2) from the values of f = sum b_j x_j^2 / 2,
    g = sum b_j^2 x_j^2 and r^2, for pairwise-distinct b_j."""
    b = as_vec3(bs)
    if min(abs(b[0] - b[1]), abs(b[0] - b[2]), abs(b[1] - b[2])) <= 1e-12:
        raise ValueError("b values must be pairwise distinct")
    out = np.empty(3)
    for j in range(3):
        k, l = [i for i in range(3) if i != j]
        num = b[k] * b[l] * r2 - 2.0 * (b[k] + b[l]) * f + g
        den = (b[j] - b[k]) * (b[j] - b[l])
        out[j] = num / den
    if out.min() < -1e-10 * (1.0 + abs(r2)):
        raise DomainBoundaryError(f"inversion produced a negative square: {out}")
    return np.clip(out, 0.0, None)
