"""Geodesic flows on implicit surfaces f(x) = c via first-order fields.

The generating field is nu * (|grad f|^2 grad(Phi) - (grad f, grad Phi) grad f),
tangent to every level set by construction.  With nu chosen so the speed is
2 h(f) pointwise, the flow traces geodesics of the surface.  Homogeneous
surfaces (Euler identity (x, grad f) = m f) get the radial specialisation and
its extra first integral; the Kepler-type surface r + (b, x) = c reduces to
the central-force problem in a new time variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (DegenerateConstraintError, DegenerateFieldError,
                     DomainBoundaryError, TangencyError)
from .fields import ScalarField, VectorField, as_vec3, cross, curl

_GRAD_TOL = 1e-12


@dataclass(frozen=True)
class LevelSurface:
    """Implicit surface f(x) = c with a nowhere-degenerate gradient on it."""

    f: ScalarField
    c: float

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("level c must be nonzero")

    def gradient(self, x) -> np.ndarray:
        g = self.f.gradient(x)
        if np.linalg.norm(g) <= _GRAD_TOL:
            raise DegenerateConstraintError(f"grad f vanishes at {as_vec3(x)!r}")
        return g

    def value_residual(self, x) -> float:
        return self.f(x) - self.c

    def g(self, x) -> float:
        """Squared gradient norm |grad f|^2."""
        gv = self.gradient(x)
        return float(np.dot(gv, gv))

    def unit_normal(self, x) -> np.ndarray:
        gv = self.gradient(x)
        return gv / np.linalg.norm(gv)


@dataclass(frozen=True)
class GeodesicSystem:
    """Surface + orthogonal potential Phi + scaling nu + energy profile h(f)."""

    surface: LevelSurface
    phi: ScalarField
    nu: ScalarField
    h: Callable[[float], float]

    @staticmethod
    def with_energy(surface: LevelSurface, phi: ScalarField,
                    h: Callable[[float], float]) -> "GeodesicSystem":
        """Choose nu so that |v|^2 = 2 h(f) pointwise.

        Whether that nu is admissible (a function of (f, Phi) alone, so the
        field is Cartesian) is a property of the pair (f, Phi); it is checked
        numerically by the certificate, not symbolically.
        """
        def nu_fn(x):
            fx = surface.gradient(x)
            px = phi.gradient(x)
            g = float(np.dot(fx, fx))
            w2 = float(np.dot(cross(fx, px), cross(fx, px)))
            hv = h(surface.f(x))
            if hv <= 0:
                raise DomainBoundaryError(f"energy profile h(f)={hv} not positive")
            if w2 <= 0:
                raise DegenerateFieldError("grad Phi parallel to grad f; field degenerates")
            return math.sqrt(2.0 * hv / (g * w2))
        return GeodesicSystem(surface, phi, ScalarField(nu_fn), h)

    def field_at(self, x) -> np.ndarray:
        fx = self.surface.gradient(x)
        px = self.phi.gradient(x)
        g = float(np.dot(fx, fx))
        return self.nu(x) * (g * px - float(np.dot(fx, px)) * fx)

    def as_vector_field(self) -> VectorField:
        return VectorField(lambda y: self.field_at(y))


def surface_cartesian_field(sys: GeodesicSystem, x) -> np.ndarray:
    return sys.field_at(x)


def geodesic_acceleration(surface: LevelSurface, x, xdot,
                          tangency_tol: float = 1e-6) -> np.ndarray:
    """mu * grad f with mu = -(Hess f xdot, xdot)/|grad f|^2.

    The sign is forced by d^2/dt^2 f(x(t)) = 0 along the constrained motion.
    """
    x = as_vec3(x)
    xdot = as_vec3(xdot)
    fx = surface.gradient(x)
    if abs(np.dot(fx, xdot)) > tangency_tol * (1.0 + np.linalg.norm(fx) * np.linalg.norm(xdot)):
        raise TangencyError(f"velocity not tangent: (grad f, xdot) = {np.dot(fx, xdot)}")
    A = surface.f.hessian(x)
    mu = -float(xdot @ A @ xdot) / float(np.dot(fx, fx))
    return mu * fx


@dataclass(frozen=True)
class SurfaceIntegrals:
    """Values of the surface first integrals; inapplicable branches are None."""

    F1: float
    F2: Optional[float]
    F3: Optional[float]


def first_integrals(sys: GeodesicSystem, x, xdot,
                    orth_threshold: float = 1e-9) -> SurfaceIntegrals:
    """F1 = |xdot|^2 always; F2 when (grad f, grad Phi) != 0; F3 when they are
    orthogonal and grad Phi is not radial.  Each equals 2 h(f) on admissible flows."""
    x = as_vec3(x)
    xdot = as_vec3(xdot)
    fx = sys.surface.gradient(x)
    px = sys.phi.gradient(x)
    F1 = float(np.dot(xdot, xdot))
    dot_fp = float(np.dot(fx, px))
    F2 = F3 = None
    if abs(dot_fp) > orth_threshold:
        num = np.linalg.norm(fx) * np.linalg.norm(cross(px, xdot))
        F2 = float((num / dot_fp) ** 2)
    else:
        xp = cross(x, px)
        if np.linalg.norm(xp) > orth_threshold * (1.0 + np.linalg.norm(x) * np.linalg.norm(px)):
            F3 = float((np.linalg.norm(px) * np.linalg.norm(cross(x, xdot))
                        / np.linalg.norm(xp)) ** 2)
    return SurfaceIntegrals(F1, F2, F3)


@dataclass(frozen=True)
class HomogeneousSurface:
    """Level set of f with the Euler identity (x, grad f) = m f."""

    surface: LevelSurface
    degree: float

    def homogeneity_check(self, points, rel_tol: float = 1e-8):
        for x in np.atleast_2d(points):
            r = self.homogeneity_residuals(x)[0]
            if abs(r) > rel_tol * (1.0 + abs(self.surface.f(x))):
                raise ValueError(f"Euler identity violated at {x}: {r}")

    def g_field(self) -> ScalarField:
        surf = self.surface
        return ScalarField(lambda y: float(np.dot(surf.f.gradient(y), surf.f.gradient(y))))

    def homogeneity_residuals(self, x) -> tuple[float, float, float]:
        """((x, f_x) - m f, |A x - (m-1) f_x|, (x, g_x) - 2 (m-1) g)."""
        x = as_vec3(x)
        f = self.surface.f
        fx = f.gradient(x)
        A = f.hessian(x)
        m = self.degree
        r1 = float(np.dot(x, fx)) - m * f(x)
        r2 = float(np.linalg.norm(A @ x - (m - 1.0) * fx))
        gfield = self.g_field()
        gx = gfield.gradient(x)
        r3 = float(np.dot(x, gx)) - 2.0 * (m - 1.0) * gfield(x)
        return r1, r2, r3


def homogeneous_cartesian_field(hs: HomogeneousSurface, h: Callable[[float], float],
                                x) -> np.ndarray:
    """nu (g x - m f f_x) with nu^2 g (g r^2 - m^2 f^2) = 2 h(f)."""
    x = as_vec3(x)
    f = hs.surface.f
    m = hs.degree
    fx = hs.surface.gradient(x)
    g = float(np.dot(fx, fx))
    fv = f(x)
    r2 = float(np.dot(x, x))
    disc = g * r2 - m * m * fv * fv
    direction = g * x - m * fv * fx
    if np.linalg.norm(direction) <= 1e-12 * (1.0 + abs(g) * np.linalg.norm(x)):
        raise DegenerateFieldError(f"g x - m f f_x vanishes at {x!r} (sphere-like point)")
    if disc <= 0:
        raise DomainBoundaryError(f"g r^2 - m^2 f^2 = {disc} <= 0 at {x!r}")
    hv = h(fv)
    nu = math.sqrt(2.0 * hv / (g * disc))
    return nu * direction


def homogeneous_extra_integral(hs: HomogeneousSurface, h: Callable[[float], float],
                               x, xdot) -> float:
    """Residual of g |[x x xdot]|^2 = 2 m^2 f^2 h(f) along the radial flow.

    This is the orthogonal-potential first integral specialised to Phi_x = x,
    so the angular factor is [x x xdot] and the normaliser (f_x, x) = m f.
    """
    x = as_vec3(x)
    f = hs.surface.f
    fx = hs.surface.gradient(x)
    g = float(np.dot(fx, fx))
    fv = f(x)
    return g * float(np.dot(cross(x, xdot), cross(x, xdot))) \
        - 2.0 * hs.degree ** 2 * fv * fv * h(fv)


@dataclass(frozen=True)
class KeplerSurface:
    """Surface r + (b, x) = c restricted to the plane (x, c_axis) = 0.

    b plays the eccentricity vector, |c_axis|^2 the semi-latus rectum; the
    sigma-time flow reproduces the central-force problem x'' = -x/r^3.
    """

    b: np.ndarray
    c_axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", as_vec3(self.b))
        object.__setattr__(self, "c_axis", as_vec3(self.c_axis))
        if np.linalg.norm(self.b) >= 1.0:
            raise ValueError("need |b| < 1 for a bounded section")
        if np.linalg.norm(self.c_axis) <= 0:
            raise ValueError("c_axis must be nonzero")
        if abs(np.dot(self.b, self.c_axis)) > 1e-12:
            raise ValueError("(b, c_axis) must vanish")

    @property
    def level(self) -> float:
        return float(np.dot(self.c_axis, self.c_axis))

    def f(self, x) -> float:
        x = as_vec3(x)
        return float(np.linalg.norm(x) + np.dot(self.b, x))

    def f_gradient(self, x) -> np.ndarray:
        x = as_vec3(x)
        return x / np.linalg.norm(x) + self.b

    def surface(self) -> LevelSurface:
        return LevelSurface(ScalarField(self.f, grad_fn=self.f_gradient), self.level)

    def plane_point(self, sigma_angle: float, radius_hint: float = 1.0) -> np.ndarray:
        """A point of the section plane at polar angle sigma_angle, scaled onto
        the surface (the surface cuts every ray of the plane exactly once)."""
        e1, e2 = plane_basis(self.c_axis, self.b)
        u = math.cos(sigma_angle) * e1 + math.sin(sigma_angle) * e2
        r = self.level / (1.0 + float(np.dot(self.b, u)))
        return r * u


def plane_basis(c_axis, b) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (e1, e2) spanning the plane orthogonal to c_axis; e1 along b
    when b is nonzero."""
    n = as_vec3(c_axis) / np.linalg.norm(c_axis)
    b = as_vec3(b)
    if np.linalg.norm(b) > 1e-13:
        e1 = b / np.linalg.norm(b)
    else:
        trial = np.array([1.0, 0.0, 0.0])
        if abs(np.dot(trial, n)) > 0.9:
            trial = np.array([0.0, 1.0, 0.0])
        e1 = trial - np.dot(trial, n) * n
        e1 /= np.linalg.norm(e1)
    e2 = cross(n, e1)
    return e1, e2


def kepler_surface_flow(ks: KeplerSurface, x, plane_tol: float = 1e-9) -> np.ndarray:
    """Sigma-time field -[f_x x c_axis]/|c_axis|^2 on the plane section.

    The sign makes [x x x'] = +c_axis; both orientations solve x'' = -x/r^3.
    """
    x = as_vec3(x)
    if abs(np.dot(x, ks.c_axis)) > plane_tol * (1.0 + np.linalg.norm(x)):
        raise DomainBoundaryError(f"point {x!r} off the section plane")
    return -cross(ks.f_gradient(x), ks.c_axis) / ks.level


def kepler_invariants(ks: KeplerSurface, x, xprime) -> tuple[float, np.ndarray, np.ndarray]:
    """Residuals of the three conserved combinations of the sigma-flow:

        |x'|^2 - 2/r - (|b|^2 - 1)/|c|^2,
        [x' x c] - (x/r + b)          (Laplace direction),
        [x x x'] - c                  (angular momentum).
    """
    x = as_vec3(x)
    xprime = as_vec3(xprime)
    r = float(np.linalg.norm(x))
    c2 = ks.level
    r1 = float(np.dot(xprime, xprime)) - 2.0 / r - (float(np.dot(ks.b, ks.b)) - 1.0) / c2
    r2 = cross(xprime, ks.c_axis) - (x / r + ks.b)
    r3 = cross(x, xprime) - ks.c_axis
    return r1, r2, r3


def kepler_plane_reduction(ks: KeplerSurface, x, xprime) -> tuple[float, float, float]:
    """Coordinates (xi, eta, zeta) of the in-plane orthogonal reduction."""
    x = as_vec3(x)
    b = ks.b
    if np.linalg.norm(b) <= 1e-13:
        raise ValueError("reduction needs b != 0")
    c = ks.c_axis
    xi = float(np.dot(b, x)) / np.linalg.norm(b)
    eta = float(np.dot(cross(c, b), x)) / (np.linalg.norm(c) * np.linalg.norm(b))
    zeta = float(np.dot(c, x)) / np.linalg.norm(c)
    return xi, eta, zeta


# -- cubic surface x1 x2 x3 = c ----------------------------------------------

def cubic_coordinates(x) -> tuple[float, float, float]:
    """(xi, eta, zeta) = ((x1^2-x2^2)/2, (x3^2-x1^2)/2, (x2^2-x3^2)/2)."""
    x = as_vec3(x)
    return (0.5 * (x[0] ** 2 - x[1] ** 2),
            0.5 * (x[2] ** 2 - x[0] ** 2),
            0.5 * (x[1] ** 2 - x[2] ** 2))


def cubic_surface_field(phi_partials: Callable[[float, float, float], tuple],
                        nu: ScalarField, x,
                        plane_tol: float = 1e-12) -> np.ndarray:
    """Tangent field of the surface x1 x2 x3 = c generated by Phi(xi, eta, zeta).

    phi_partials(xi, eta, zeta) must return (Phi_xi, Phi_eta, Phi_zeta).
    """
    x = as_vec3(x)
    if min(abs(x[0]), abs(x[1]), abs(x[2])) <= plane_tol:
        raise DomainBoundaryError("point on a coordinate plane")
    pxi, peta, pzeta = phi_partials(*cubic_coordinates(x))
    nuv = nu(x)
    return np.array([
        nuv * (pxi - peta) * x[0],
        nuv * (pzeta - pxi) * x[1],
        nuv * (peta - pzeta) * x[2],
    ])


# -- characteristic fields and their Lie closure ------------------------------

def characteristic_fields(f: ScalarField):
    """The three fields annihilating the 1-form df:
    X = (0, a3, -a2), Y = (-a3, 0, a1), Z = (a2, -a1, 0) with a = grad f.

    Jacobians come from the Hessian of f, so brackets are exact when f carries
    analytic second derivatives.
    """
    def X(y):
        a = f.gradient(y)
        return np.array([0.0, a[2], -a[1]])

    def JX(y):
        H = f.hessian(y)
        return np.vstack([np.zeros(3), H[2], -H[1]])

    def Y(y):
        a = f.gradient(y)
        return np.array([-a[2], 0.0, a[0]])

    def JY(y):
        H = f.hessian(y)
        return np.vstack([-H[2], np.zeros(3), H[0]])

    def Z(y):
        a = f.gradient(y)
        return np.array([a[1], -a[0], 0.0])

    def JZ(y):
        H = f.hessian(y)
        return np.vstack([H[1], -H[0], np.zeros(3)])

    return (VectorField(X, jac_fn=JX), VectorField(Y, jac_fn=JY),
            VectorField(Z, jac_fn=JZ))


def quadratic_family(family_id: int, **params) -> ScalarField:
    """The four quadratic families whose characteristic fields close into a
    three-dimensional Lie algebra (coefficients are free parameters).

    1: b1 x^2 + b2 y^2 + b3 z^2
    2: b1 x^2 + a (y^2 - z^2) + 2 b y z
    3: 2 b y x + b3 z^2
    4: b y^2 + 2 b1 z x
    """
    if family_id == 1:
        b1, b2, b3 = params.get("b1", 1.0), params.get("b2", 2.0), params.get("b3", 3.0)
        Q = np.diag([2 * b1, 2 * b2, 2 * b3])
    elif family_id == 2:
        b1, a, b = params.get("b1", 1.0), params.get("a", 1.0), params.get("b", 1.0)
        Q = np.array([[2 * b1, 0, 0], [0, 2 * a, 2 * b], [0, 2 * b, -2 * a]])
    elif family_id == 3:
        b, b3 = params.get("b", 1.0), params.get("b3", 1.0)
        Q = np.array([[0, 2 * b, 0], [2 * b, 0, 0], [0, 0, 2 * b3]])
    elif family_id == 4:
        b, b1 = params.get("b", 1.0), params.get("b1", 1.0)
        Q = np.array([[0, 0, 2 * b1], [0, 2 * b, 0], [2 * b1, 0, 0]])
    else:
        raise ValueError(f"family_id must be 1..4, got {family_id}")
    return ScalarField(lambda y: 0.5 * float(y @ Q @ y),
                       grad_fn=lambda y: Q @ y,
                       hess_fn=lambda y: Q.copy())


def hessian_combination_residual(f: ScalarField, x) -> float:
    """Pointwise residual of ([Y,Z],[Z,X],[X,Y]) = Hess f * (X,Y,Z).

    This identity holds for every f with a symmetric Hessian; it validates
    the bracket machinery rather than discriminating anything.
    """
    x = as_vec3(x)
    X, Y, Z = characteristic_fields(f)
    A = f.hessian(x)
    base = np.array([X(x), Y(x), Z(x)])

    def bracket(u, v):
        return v.jacobian(x) @ u(x) - u.jacobian(x) @ v(x)

    rows = [bracket(Y, Z), bracket(Z, X), bracket(X, Y)]
    return max(float(np.abs(br - A[i] @ base).max()) for i, br in enumerate(rows))


def lie_closure_residual(f: ScalarField, x, probe_radius: float = 0.25) -> float:
    """Defect of the characteristic fields closing into a 3-D Lie algebra.

    The brackets always equal the Hessian-coefficient combination pointwise,
    so closure with a fixed basis requires those coefficients to be constant.
    The residual freezes A = Hess f at x and measures the worst bracket
    mismatch on probe points around x; it vanishes exactly on the quadratic
    catalog and is positive for generic higher-degree f.
    """
    x = as_vec3(x)
    X, Y, Z = characteristic_fields(f)
    A0 = f.hessian(x)
    worst = 0.0
    probes = [x] + [x + probe_radius * e for e in np.eye(3)] \
        + [x - probe_radius * e for e in np.eye(3)]
    for y in probes:
        base = np.array([X(y), Y(y), Z(y)])

        def bracket(u, v):
            return v.jacobian(y) @ u(y) - u.jacobian(y) @ v(y)

        rows = [bracket(Y, Z), bracket(Z, X), bracket(X, Y)]
        for i, br in enumerate(rows):
            worst = max(worst, float(np.abs(br - A0[i] @ base).max()))
    return worst
