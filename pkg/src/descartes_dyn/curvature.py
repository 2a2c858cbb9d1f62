"""Constrained extrema of the Hessian form on the tangent circle.

extremum (A tau, tau) over unit tangent vectors of f(x) = c is solved two
ways: robustly, by projecting A = Hess f onto an orthonormal tangent basis
and diagonalising the 2x2 block; and through the one-parameter adjugate
family v_z = adj(A + z I) grad f, whose degree-2 numerator of df(v_z)
vanishes exactly at the extremal parameters.  The second route degenerates
whenever grad f is a Hessian eigenvector (cylinder), so the projection is
the authoritative answer and the family a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainBoundaryError
from .fields import ScalarField, VectorField, as_vec3, cross, curl, triple_det
from .surfaces import HomogeneousSurface, LevelSurface


def adjugate(M) -> np.ndarray:
    """Transpose of the cofactor matrix (well-defined also for singular M)."""
    M = np.asarray(M, dtype=float)
    C = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            C[i, j] = (-1.0) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    return C.T


def vz_family(surface: LevelSurface, x, z: float) -> np.ndarray:
    """adj(Hess f + z I) grad f."""
    x = as_vec3(x)
    A = surface.f.hessian(x)
    return adjugate(A + z * np.eye(3)) @ surface.gradient(x)


def vz_components(surface: LevelSurface, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The polynomial pieces of the family:

        adj(A + z I) f_x = z^2 X1 + z X2 + X3,
        X1 = f_x,  X2 = (tr A) f_x - (1/2) g_x,  X3 = adj(A) f_x.

    Note X2: the adjugate expansion forces (tr A) f_x - A f_x and
    A f_x = g_x / 2 for g = |f_x|^2.
    """
    x = as_vec3(x)
    fx = surface.gradient(x)
    A = surface.f.hessian(x)
    X1 = fx
    X2 = np.trace(A) * fx - A @ fx
    X3 = adjugate(A) @ fx
    return X1, X2, X3


def vz_identity_residual(surface: LevelSurface, x, zs=(-1.0, 0.0, 1.0)) -> float:
    """Max norm of adj(A+zI) f_x - (z^2 X1 + z X2 + X3) over the given z values."""
    X1, X2, X3 = vz_components(surface, x)
    worst = 0.0
    for z in zs:
        lhs = vz_family(surface, x, z)
        worst = max(worst, float(np.abs(lhs - (z * z * X1 + z * X2 + X3)).max()))
    return worst


def bordered_matrix(surface: LevelSurface, x, z: float) -> np.ndarray:
    """The 4x4 stationarity matrix [[A + z I, f_x], [f_x^T, 0]]."""
    x = as_vec3(x)
    A = surface.f.hessian(x)
    fx = surface.gradient(x)
    R = np.zeros((4, 4))
    R[:3, :3] = A + z * np.eye(3)
    R[:3, 3] = fx
    R[3, :3] = fx
    return R


def extremum_polynomial(surface: LevelSurface, x) -> np.ndarray:
    """Coefficients (c2, c1, c0) of the quadratic whose roots z1, z2 give the
    tangential Hessian extrema as -z_j; equals -det of the bordered matrix."""
    x = as_vec3(x)
    fx = surface.gradient(x)
    A = surface.f.hessian(x)
    g = float(np.dot(fx, fx))
    c2 = g
    c1 = g * np.trace(A) - float(fx @ A @ fx)
    c0 = float(fx @ adjugate(A) @ fx)
    return np.array([c2, c1, c0])


def tangent_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    n = as_vec3(normal)
    n = n / np.linalg.norm(n)
    trial = np.zeros(3)
    trial[int(np.argmin(np.abs(n)))] = 1.0
    t1 = trial - np.dot(trial, n) * n
    t1 /= np.linalg.norm(t1)
    t2 = cross(n, t1)
    return t1, t2


@dataclass
class CurvatureReport:
    point: np.ndarray
    extrema: tuple                      # (min, max) of (A tau, tau) on tangent circle
    tau1: np.ndarray
    tau2: np.ndarray
    z_roots: Optional[tuple]            # roots of the bordered determinant, or None
    det_bordered: tuple                 # det R at the roots (0, 0) when available
    vz_degenerate: bool                 # adjugate family unusable at this point
    umbilic: bool
    K_paper: Optional[float]
    K_oracle: float


def gaussian_curvature(hs: HomogeneousSurface, x) -> tuple[float, float]:
    """(K_paper, K_oracle) for a homogeneous surface.

    K_oracle is the standard implicit-surface curvature
    (adj(Hess f) f_x, f_x)/|f_x|^4 and is what the tests bind to; K_paper is
    the degree-m determinant formula kept verbatim for comparison (the two
    differ already on the sphere, -1/2 vs 1).
    """
    x = as_vec3(x)
    f = hs.surface.f
    fx = hs.surface.gradient(x)
    g = float(np.dot(fx, fx))
    A = f.hessian(x)
    m = hs.degree
    K_oracle = float(fx @ adjugate(A) @ fx) / g ** 2
    if m != 1.0:
        K_paper = -f(x) * float(np.linalg.det(A)) / ((m - 1.0) * g ** 2)
    else:
        if abs(x[0]) < 1e-12:
            raise DomainBoundaryError("degree-1 curvature formula needs x1 != 0")
        g1 = ScalarField(lambda y: float(f.gradient(y)[1]))
        g2 = ScalarField(lambda y: float(f.gradient(y)[2]))
        K_paper = -f(x) * triple_det(f, g1, g2, x) / (x[0] * g ** 2)
    return K_paper, K_oracle


def principal_directions(surface: LevelSurface, x,
                         hs: Optional[HomogeneousSurface] = None,
                         degenerate_tol: float = 1e-7) -> CurvatureReport:
    """Extrema of (Hess f tau, tau) on unit tangent vectors at x.

    The projected 2x2 eigenproblem is always solved; the adjugate-family
    roots and directions are cross-checked against it when the family is
    non-degenerate there.
    """
    x = as_vec3(x)
    fx = surface.gradient(x)
    A = surface.f.hessian(x)
    t1, t2 = tangent_basis(fx)
    B = np.array([[t1 @ A @ t1, t1 @ A @ t2], [t1 @ A @ t2, t2 @ A @ t2]])
    evals, evecs = np.linalg.eigh(B)
    taus = [evecs[0, k] * t1 + evecs[1, k] * t2 for k in range(2)]
    taus = [t / np.linalg.norm(t) for t in taus]
    scale = 1.0 + np.abs(evals).max()
    umbilic = abs(evals[1] - evals[0]) <= degenerate_tol * scale

    c2, c1, c0 = extremum_polynomial(surface, x)
    disc = c1 * c1 - 4.0 * c2 * c0
    z_roots = None
    dets = (np.nan, np.nan)
    vz_degenerate = True
    if not umbilic and disc > 0:
        sq = np.sqrt(disc)
        z_roots = tuple(sorted(((-c1 - sq) / (2 * c2), (-c1 + sq) / (2 * c2))))
        dets = tuple(float(np.linalg.det(bordered_matrix(surface, x, z))) for z in z_roots)
        vzs = [vz_family(surface, x, z) for z in z_roots]
        vz_degenerate = any(np.linalg.norm(v) <= degenerate_tol * scale ** 2 for v in vzs)
    K_paper = None
    K_oracle = float(fx @ adjugate(A) @ fx) / float(np.dot(fx, fx)) ** 2
    if hs is not None:
        K_paper, K_oracle = gaussian_curvature(hs, x)
    return CurvatureReport(
        point=x, extrema=(float(evals[0]), float(evals[1])),
        tau1=taus[0], tau2=taus[1], z_roots=z_roots, det_bordered=dets,
        vz_degenerate=vz_degenerate, umbilic=umbilic,
        K_paper=K_paper, K_oracle=K_oracle)


def brute_force_extrema(surface: LevelSurface, x, samples: int = 10_000) -> tuple[float, float]:
    """Independent search: scan the tangent unit circle on a dense angular
    grid, then polish the best cells with a few Newton steps on the smooth
    angle profile.  Never touches the eigen-decomposition route."""
    x = as_vec3(x)
    A = surface.f.hessian(x)
    t1, t2 = tangent_basis(surface.gradient(x))
    thetas = np.linspace(0.0, np.pi, samples, endpoint=False)

    def profile(th):
        tau = np.cos(th) * t1 + np.sin(th) * t2
        return float(tau @ A @ tau)

    vals = np.array([profile(th) for th in thetas])

    def polish(th0):
        d = 1e-4
        th = th0
        for _ in range(40):
            fp = (profile(th + d) - profile(th - d)) / (2 * d)
            fpp = (profile(th + d) - 2 * profile(th) + profile(th - d)) / (d * d)
            if abs(fpp) < 1e-14:
                break
            step = fp / fpp
            th -= step
            if abs(step) < 1e-13:
                break
        return profile(th)

    lo = polish(thetas[int(np.argmin(vals))])
    hi = polish(thetas[int(np.argmax(vals))])
    return min(lo, vals.min()), max(hi, vals.max())


@dataclass
class TangentFieldReport:
    v: np.ndarray
    residual: Optional[float]        # chain-rule form, when mu = mu(f, g, r)
    curl_check: float                # (f_x, curl v), the defining test
    branch: str                      # "radial" when {f, g, r} = 0, else "confocal"
    triple: float                    # value of {f, g, r} at the point


def tangent_development_field(hs: HomogeneousSurface,
                              mu1, mu2, x,
                              mu_args: str = "fgr",
                              triple_tol: float = 1e-9) -> TangentFieldReport:
    """General tangent field [f_x x [f_x x (mu1 g_x + mu2 x)]] and the
    condition for it to be Cartesian.

    With mu_args="fgr" the coefficients are callables mu(f, g, r) and the
    residual {f,g,r} * (d_r mu1 - d_g mu2 - mu2/g) is evaluated through the
    argument dependence; with mu_args="xyz" they are plain point functions
    and only the curl test (f_x, curl v) is reported.
    """
    x = as_vec3(x)
    surf = hs.surface
    f = surf.f
    gfield = hs.g_field()
    rfield = ScalarField(lambda y: float(np.linalg.norm(y)))

    if mu_args == "fgr":
        def mu_at(mu, y):
            return mu(f(y), gfield(y), float(np.linalg.norm(y)))
        mu1_pt = lambda y: mu_at(mu1, y)
        mu2_pt = lambda y: mu_at(mu2, y)
    elif mu_args == "xyz":
        mu1_pt, mu2_pt = mu1, mu2
    else:
        raise ValueError("mu_args must be 'fgr' or 'xyz'")

    def field_fn(y):
        fx = f.gradient(y)
        u = mu1_pt(y) * gfield.gradient(y) + mu2_pt(y) * np.asarray(y, dtype=float)
        return cross(fx, cross(fx, u))

    vf = VectorField(field_fn)
    v = vf(x)
    curl_check = float(np.dot(surf.gradient(x), curl(vf, x)))
    trip = triple_det(f, gfield, rfield, x)
    branch = "radial" if abs(trip) <= triple_tol else "confocal"

    residual = None
    if mu_args == "fgr":
        fv, gv, rv = f(x), gfield(x), float(np.linalg.norm(x))
        d = 1e-6 * (1.0 + abs(gv) + rv)
        dmu1_dr = (mu1(fv, gv, rv + d) - mu1(fv, gv, rv - d)) / (2 * d)
        dmu2_dg = (mu2(fv, gv + d, rv) - mu2(fv, gv - d, rv)) / (2 * d)
        residual = trip * (dmu1_dr - dmu2_dg - mu2(fv, gv, rv) / gv)
    return TangentFieldReport(v, residual, curl_check, branch, trip)
