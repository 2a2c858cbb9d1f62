"""Cartesian (first-order) vector fields for one velocity-linear constraint.

A smooth field v is *Cartesian* for the constraint (a(x), xdot) = 0 when
[v x curl v] is everywhere parallel to a.  Its flow then solves the
classical multiplier equations of the constrained particle.  This module
builds candidate fields from a generator, v = [a x w], and verifies the
defining parallelism pointwise and over sampled clouds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .errors import DegenerateConstraintError, EvaluationError
from .fields import ScalarField, VectorField, as_vec3, cross, curl, div, grad

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Constraint:
    """Velocity-linear constraint (a(x), xdot) = 0."""

    a: VectorField

    def vector(self, x) -> np.ndarray:
        v = self.a(x)
        if np.linalg.norm(v) <= _ZERO_TOL:
            raise DegenerateConstraintError(f"constraint covector vanishes at {as_vec3(x)!r}")
        return v


@dataclass(frozen=True)
class FieldCandidate:
    """A velocity field, optionally remembered as v = [a x w]."""

    v: VectorField
    generator: Optional[VectorField] = None

    def check_generator(self, a: Constraint, points, tol: float = 1e-10) -> float:
        """Max norm of v - [a x w] over the given points."""
        if self.generator is None:
            return 0.0
        worst = 0.0
        for x in np.atleast_2d(points):
            worst = max(worst, float(np.linalg.norm(
                self.v(x) - cross(a.vector(x), self.generator(x)))))
        if worst > tol:
            raise EvaluationError(f"generator mismatch {worst} exceeds {tol}")
        return worst


def _as_vf(v) -> VectorField:
    return v.v if isinstance(v, FieldCandidate) else v


def _as_con(a) -> Constraint:
    return a if isinstance(a, Constraint) else Constraint(a)


def lambda_coefficient(v, a, x) -> float:
    """Lambda = ([v x curl v], a) / |a|^2, the multiplier of the parallelism."""
    vf, con = _as_vf(v), _as_con(a)
    av = con.vector(x)
    m = cross(vf(x), curl(vf, x))
    return float(np.dot(m, av) / np.dot(av, av))


def cartesian_residual(v, a, x) -> np.ndarray:
    """[v x curl v](x) - Lambda(x) a(x); zero iff v is Cartesian at x."""
    vf, con = _as_vf(v), _as_con(a)
    av = con.vector(x)
    m = cross(vf(x), curl(vf, x))
    lam = float(np.dot(m, av) / np.dot(av, av))
    return m - lam * av


def tangency_checks(v, a, x) -> tuple[float, float]:
    """((a, v), (a, curl v)) at x; both vanish for a Cartesian field."""
    vf = _as_vf(v)
    af = _as_con(a).a
    av = af(x)
    return float(np.dot(av, vf(x))), float(np.dot(av, curl(vf, x)))


def ansatz_field(a, w: VectorField, x) -> np.ndarray:
    """General constraint-tangent candidate [a(x) x w(x)]."""
    return cross(_as_con(a).a(x), w(x))


def gradient_obstruction(a, x) -> np.ndarray:
    """[a x curl a](x); identically zero iff the constraint direction is
    proportional to a gradient (the integrable / holonomic situation)."""
    af = _as_con(a).a
    return cross(af(x), curl(af, x))


def ansatz_condition_residual(a, w: VectorField, x) -> float:
    """Residual of the generator condition for v = [a x w]:

        div([a x [a x w]]) + ([a x curl a], w) = 0   <=>   (a, curl v) = 0.

    Note the plus sign: div(A x B) = (curl A, B) - (A, curl B) forces it,
    and the numeric curl test below is asserted in the unit suite.
    """
    af = _as_con(a).a
    inner = VectorField(lambda y: cross(af.fn(y), cross(af.fn(y), w.fn(y))), step=af.step)
    return div(inner, x) + float(np.dot(gradient_obstruction(a, x), w(x)))


def acceleration_of_flow(v, x, check: bool = True, tol: float = 1e-6) -> np.ndarray:
    """Acceleration (Dv) v of the flow xdot = v(x) at x.

    When check=True, also evaluates grad(|v|^2 / 2) - [v x curl v] and raises
    if the classical split disagrees beyond tol * (1 + |accel|).
    """
    vf = _as_vf(v)
    x = as_vec3(x)
    accel = vf.jacobian(x) @ vf(x)
    if check:
        spl = acceleration_split(v, x)
        mismatch = np.linalg.norm(accel - (spl[0] - spl[1]))
        if mismatch > tol * (1.0 + np.linalg.norm(accel)):
            raise EvaluationError(
                f"acceleration split disagrees by {mismatch} at {x!r}")
    return accel


def acceleration_split(v, x) -> tuple[np.ndarray, np.ndarray]:
    """(grad(|v|^2 / 2), [v x curl v]); their difference is the acceleration."""
    vf = _as_vf(v)
    x = as_vec3(x)
    half_speed = ScalarField(lambda y: 0.5 * float(np.dot(vf.fn(y), vf.fn(y))), step=vf.step)
    return grad(half_speed, x), cross(vf(x), curl(vf, x))


def steady_lamb_residual(v, U: ScalarField, x) -> np.ndarray:
    """(Dv) v - grad U; zero iff the flow of v solves xddot = grad U."""
    vf = _as_vf(v)
    x = as_vec3(x)
    return vf.jacobian(x) @ vf(x) - U.gradient(x)


@dataclass
class CartesianCertificate:
    """Aggregate verification report over a sampled point cloud."""

    points: np.ndarray
    lambdas: np.ndarray
    residual_norm: float
    tangency: float
    curl_orthogonality: float
    degenerate_points: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.degenerate_points and np.isfinite(self.residual_norm)

    def passes(self, tol: float) -> bool:
        return (self.ok and self.residual_norm <= tol
                and abs(self.tangency) <= tol and abs(self.curl_orthogonality) <= tol)


def sample_box(lo, hi, n: int = 200, seed: int = 0) -> np.ndarray:
    """Deterministic quasi-random (Sobol) cloud in the box [lo, hi]^3."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    u = qmc.Sobol(d=3, scramble=True, seed=seed).random(n)
    return lo + u * (hi - lo)


def certify(v, a, points) -> CartesianCertificate:
    """Evaluate the Cartesian conditions on every point of the cloud.

    Degenerate points (a(x) = 0) are recorded, not silently skipped.
    """
    vf, con = _as_vf(v), _as_con(a)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lambdas = np.empty(len(points))
    residual = tang = curlo = 0.0
    degenerate = []
    for i, x in enumerate(points):
        try:
            av = con.vector(x)
        except DegenerateConstraintError:
            degenerate.append(i)
            lambdas[i] = np.nan
            continue
        m = cross(vf(x), curl(vf, x))
        lam = float(np.dot(m, av) / np.dot(av, av))
        lambdas[i] = lam
        residual = max(residual, float(np.linalg.norm(m - lam * av)))
        t, c = tangency_checks(vf, con, x)
        tang = max(tang, abs(t))
        curlo = max(curlo, abs(c))
    return CartesianCertificate(points, lambdas, residual, tang, curlo, degenerate)
