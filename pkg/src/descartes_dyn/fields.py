"""Exact and finite-difference vector calculus on R^3.

Scalar and vector fields carry optional analytic derivative callbacks; when
absent, second-order central differences are used.  The default first
derivative step is 1e-5; second derivatives use a wider step (3e-4) because
the double division by step**2 amplifies rounding noise.

Also provides the curl of a vector field with respect to a Riemannian metric
on a 3-coordinate chart (lower the index with the metric, take the Euclidean
curl of the covector, divide by sqrt(det G)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateMetricError, EvaluationError

DEFAULT_STEP = 1e-5
DEFAULT_STEP2 = 3e-4

_EYE3 = np.eye(3)


def as_vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    return v


def _check_finite(value, where: np.ndarray):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"non-finite field value {value!r} at x={where!r}")
    return value


def cross(u, v) -> np.ndarray:
    """Right-handed vector product on R^3."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.array([
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ])


@dataclass(frozen=True)
class ScalarField:
    """Map R^3 -> R with optional analytic gradient / Hessian."""

    fn: Callable[[np.ndarray], float]
    grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    step: float = DEFAULT_STEP
    step2: float = DEFAULT_STEP2

    def __call__(self, x) -> float:
        x = as_vec3(x)
        return float(_check_finite(self.fn(x), x))

    def gradient(self, x) -> np.ndarray:
        x = as_vec3(x)
        if self.grad_fn is not None:
            return _check_finite(np.asarray(self.grad_fn(x), dtype=float), x)
        d = self.step
        g = np.empty(3)
        for k in range(3):
            e = d * _EYE3[k]
            g[k] = (self.fn(x + e) - self.fn(x - e)) / (2.0 * d)
        return _check_finite(g, x)

    def hessian(self, x) -> np.ndarray:
        """Symmetric matrix of second partials (symmetrized if from differences)."""
        x = as_vec3(x)
        if self.hess_fn is not None:
            h = np.asarray(self.hess_fn(x), dtype=float)
            if not np.allclose(h, h.T, atol=1e-9 * (1.0 + np.abs(h).max())):
                raise ValueError("analytic Hessian is not symmetric")
            return _check_finite(0.5 * (h + h.T), x)
        d = self.step2
        f0 = self.fn(x)
        h = np.empty((3, 3))
        for i in range(3):
            ei = d * _EYE3[i]
            h[i, i] = (self.fn(x + ei) - 2.0 * f0 + self.fn(x - ei)) / (d * d)
        for i in range(3):
            for j in range(i + 1, 3):
                ei, ej = d * _EYE3[i], d * _EYE3[j]
                hij = (
                    self.fn(x + ei + ej)
                    - self.fn(x + ei - ej)
                    - self.fn(x - ei + ej)
                    + self.fn(x - ei - ej)
                ) / (4.0 * d * d)
                h[i, j] = h[j, i] = hij
        return _check_finite(h, x)

    def check_gradient(self, points, tol: float = 1e-6) -> float:
        """Max mismatch between analytic gradient and central differences.

        Raises if the invariant |analytic - fd| <= tol*(1 + |analytic|) fails.
        """
        if self.grad_fn is None:
            return 0.0
        worst = 0.0
        fd = ScalarField(self.fn, step=self.step)
        for x in np.atleast_2d(points):
            ga = self.gradient(x)
            gd = fd.gradient(x)
            err = np.linalg.norm(ga - gd)
            bound = tol * (1.0 + np.linalg.norm(ga))
            if err > bound:
                raise EvaluationError(
                    f"analytic gradient disagrees with differences at {x}: {err} > {bound}"
                )
            worst = max(worst, err)
        return worst


@dataclass(frozen=True)
class VectorField:
    """Map R^3 -> R^3 with optional analytic Jacobian."""

    fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    step: float = DEFAULT_STEP

    def __call__(self, x) -> np.ndarray:
        x = as_vec3(x)
        return _check_finite(np.asarray(self.fn(x), dtype=float), x)

    def jacobian(self, x) -> np.ndarray:
        """J[i, j] = d F_i / d x_j."""
        x = as_vec3(x)
        if self.jac_fn is not None:
            return _check_finite(np.asarray(self.jac_fn(x), dtype=float), x)
        d = self.step
        cols = []
        for k in range(3):
            e = d * _EYE3[k]
            cols.append((np.asarray(self.fn(x + e), float) - np.asarray(self.fn(x - e), float)) / (2.0 * d))
        return _check_finite(np.column_stack(cols), x)

    def check_jacobian(self, points, tol: float = 1e-6) -> float:
        if self.jac_fn is None:
            return 0.0
        worst = 0.0
        fd = VectorField(self.fn, step=self.step)
        for x in np.atleast_2d(points):
            ja = self.jacobian(x)
            jd = fd.jacobian(x)
            err = np.abs(ja - jd).max()
            bound = tol * (1.0 + np.abs(ja).max())
            if err > bound:
                raise EvaluationError(
                    f"analytic Jacobian disagrees with differences at {x}: {err} > {bound}"
                )
            worst = max(worst, err)
        return worst


def constant_field(v) -> VectorField:
    v = as_vec3(v)
    return VectorField(lambda x: v.copy(), jac_fn=lambda x: np.zeros((3, 3)))


def grad(f: ScalarField, x) -> np.ndarray:
    return f.gradient(x)


def div(F: VectorField, x) -> float:
    return float(np.trace(F.jacobian(x)))


def curl(F: VectorField, x) -> np.ndarray:
    """Euclidean curl, read off the antisymmetric part of the Jacobian."""
    J = F.jacobian(x)
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def hessian(f: ScalarField, x) -> np.ndarray:
    return f.hessian(x)


def lie_bracket(a: VectorField, b: VectorField, x) -> np.ndarray:
    """Flow-commutator bracket [a, b] = (Db) a - (Da) b."""
    x = as_vec3(x)
    return b.jacobian(x) @ a(x) - a.jacobian(x) @ b(x)


def triple_det(F: ScalarField, G: ScalarField, H: ScalarField, x) -> float:
    """Determinant of the 3x3 matrix whose rows are the three gradients."""
    return float(np.linalg.det(np.array([F.gradient(x), G.gradient(x), H.gradient(x)])))


def metric_curl(G: Callable[[np.ndarray], np.ndarray], v: VectorField, x,
                step: float = DEFAULT_STEP) -> np.ndarray:
    """Curl of v with respect to the metric G on a 3-coordinate chart.

    Lowers the index, p_j = sum_k G_jk v^k, and returns
    (1/sqrt(det G)) * (d2 p3 - d3 p2, d3 p1 - d1 p3, d1 p2 - d2 p1).
    """
    x = as_vec3(x)
    detG = float(np.linalg.det(np.asarray(G(x), dtype=float)))
    if detG <= 0.0 or not np.isfinite(detG):
        raise DegenerateMetricError(f"det G = {detG} at x={x!r}")

    def p(y):
        y = np.asarray(y, dtype=float)
        return np.asarray(G(y), dtype=float) @ np.asarray(v.fn(y), dtype=float)

    Jp = VectorField(p, step=step).jacobian(x)
    rot_p = np.array([Jp[2, 1] - Jp[1, 2], Jp[0, 2] - Jp[2, 0], Jp[1, 0] - Jp[0, 1]])
    return rot_p / np.sqrt(detG)


def curl_cross_identity_residual(a: VectorField, b: VectorField, x) -> np.ndarray:
    """Residual of curl(a x b) = (Da)b - (Db)a + (div b)a - (div a)b.

    The right-hand side is the classical expansion of the curl of a cross
    product; the residual vanishes (to difference accuracy) for smooth fields.
    """
    x = as_vec3(x)
    axb = VectorField(lambda y: cross(a.fn(y), b.fn(y)), step=min(a.step, b.step))
    lhs = curl(axb, x)
    av, bv = a(x), b(x)
    Ja, Jb = a.jacobian(x), b.jacobian(x)
    rhs = Ja @ bv - Jb @ av + np.trace(Jb) * av - np.trace(Ja) * bv
    return lhs - rhs
