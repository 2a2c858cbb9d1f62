import numpy as np
import pytest

from descartes_dyn.engine import IntegratorConfig, integrate_first_order
from descartes_dyn.errors import (DegenerateFieldError, DomainBoundaryError,
                                  TangencyError)
from descartes_dyn.fields import ScalarField, VectorField, cross
from descartes_dyn.poly import Poly3
from descartes_dyn.surfaces import (GeodesicSystem, HomogeneousSurface, KeplerSurface,
                                    LevelSurface, cubic_surface_field, first_integrals,
                                    geodesic_acceleration, homogeneous_cartesian_field,
                                    homogeneous_extra_integral, kepler_invariants,
                                    kepler_plane_reduction, kepler_surface_flow,
                                    lie_closure_residual, quadratic_family,
                                    surface_cartesian_field)

HALF_R2 = Poly3({(2, 0, 0): 0.5, (0, 2, 0): 0.5, (0, 0, 2): 0.5}).as_scalar_field()
X3 = Poly3({(0, 0, 1): 1.0}).as_scalar_field()
ONE = ScalarField(lambda x: 1.0)

SPHERE = LevelSurface(HALF_R2, 0.5)
QUADRIC_124 = LevelSurface(
    Poly3({(2, 0, 0): 0.5, (0, 2, 0): 0.5, (0, 0, 2): 2.0}).as_scalar_field(), 3.0)


def test_surface_cartesian_field_examples():
    sys = GeodesicSystem(SPHERE, X3, ONE, lambda f: f)
    assert np.allclose(surface_cartesian_field(sys, [1, 0, 0]), [0, 0, 1])
    parallel = GeodesicSystem(SPHERE, HALF_R2, ONE, lambda f: f)
    assert np.allclose(surface_cartesian_field(parallel, [0.7, 0.1, -0.3]), 0.0, atol=1e-12)
    sys2 = GeodesicSystem(QUADRIC_124, HALF_R2, ONE, lambda f: f)
    v = surface_cartesian_field(sys2, [1, 1, 1])
    assert np.allclose(v, [12, 12, -6])
    assert abs(np.dot(QUADRIC_124.gradient([1, 1, 1]), v)) < 1e-12


def test_geodesic_acceleration_examples():
    assert np.allclose(geodesic_acceleration(SPHERE, [1, 0, 0], [0, 0, 1]), [-1, 0, 0])
    plane = LevelSurface(X3, 1.0)
    assert np.allclose(geodesic_acceleration(plane, [0.3, 0.4, 1.0], [1.0, -2.0, 0.0]), 0.0)
    cyl = LevelSurface(Poly3({(2, 0, 0): 0.5, (0, 2, 0): 0.5}).as_scalar_field(), 0.5)
    assert np.allclose(geodesic_acceleration(cyl, [1, 0, 0], [0, 1, 1]), [-1, 0, 0])
    with pytest.raises(TangencyError):
        geodesic_acceleration(SPHERE, [1, 0, 0], [1, 0, 0])


def test_first_integrals_branches():
    sys = GeodesicSystem(SPHERE, X3, ONE, lambda f: f)
    vals = first_integrals(sys, [0.6, 0.0, 0.8], [0.0, 0.0, 0.0])
    assert vals.F1 == 0.0
    assert vals.F2 is not None and vals.F3 is None     # (f_x, Phi_x) = x3 != 0
    # orthogonal-potential variant Phi = x3 / r picks the third branch
    phi3 = ScalarField(lambda x: x[2] / np.linalg.norm(x))
    sys3 = GeodesicSystem(SPHERE, phi3, ONE, lambda f: f)
    vals3 = first_integrals(sys3, [0.6, 0.0, 0.8], [0.0, 0.0, 0.0])
    assert vals3.F2 is None and vals3.F3 is not None


def sphere_flow_system(h0=0.01):
    return GeodesicSystem.with_energy(SPHERE, X3, lambda f: h0)


def test_sphere_meridian_flow_conserves_everything():
    h0 = 0.01
    sys = sphere_flow_system(h0)
    field = sys.as_vector_field()
    theta0 = 2.2
    x0 = np.array([np.sin(theta0), 0.0, np.cos(theta0)])
    cfg = IntegratorConfig(step=1e-3, t_end=10.0, record_every=100)
    traj = integrate_first_order(field, x0, cfg)
    fvals = np.array([HALF_R2(s) for s in traj.states])
    assert np.abs(fvals - 0.5).max() < 1e-8
    speeds = np.array([np.dot(field(s), field(s)) for s in traj.states])
    assert np.abs(speeds - 2 * h0).max() < 1e-7
    # F2 branch value equals 2 h(f) along the flow
    for s in traj.states[::40]:
        vals = first_integrals(sys, s, field(s))
        assert vals.F2 == pytest.approx(2 * h0, abs=1e-7)


def test_sphere_flow_is_geodesic_side_force():
    sys = sphere_flow_system()
    field = sys.as_vector_field()
    x0 = np.array([np.sin(2.2), 0.0, np.cos(2.2)])
    traj = integrate_first_order(field, x0, IntegratorConfig(step=1e-3, t_end=2.0, record_every=200))
    for s in traj.states:
        v = field(s)
        accel = field.jacobian(s) @ v
        n = SPHERE.unit_normal(s)
        t2 = cross(n, v / np.linalg.norm(v))
        assert abs(np.dot(accel, t2)) < 1e-6


def test_f3_branch_meridian_flow():
    phi3 = ScalarField(lambda x: x[2] / np.linalg.norm(x))
    sys = GeodesicSystem.with_energy(SPHERE, phi3, lambda f: 0.01)
    field = sys.as_vector_field()
    x0 = np.array([np.sin(2.2), 0.0, np.cos(2.2)])
    traj = integrate_first_order(field, x0, IntegratorConfig(step=1e-3, t_end=10.0, record_every=100))
    vals0 = first_integrals(sys, traj.states[0], field(traj.states[0]))
    for s in traj.states[::25]:
        vals = first_integrals(sys, s, field(s))
        assert vals.F3 == pytest.approx(vals0.F3, abs=1e-7)
        assert vals.F3 == pytest.approx(0.02, abs=1e-7)


def test_homogeneity_residuals_examples():
    hs = HomogeneousSurface(SPHERE, 2.0)
    assert np.allclose(hs.homogeneity_residuals([0.3, -0.8, 0.5]), 0.0, atol=1e-9)
    cubic = HomogeneousSurface(LevelSurface(Poly3({(1, 1, 1): 1.0}).as_scalar_field(), 6.0), 3.0)
    assert np.allclose(cubic.homogeneity_residuals([1, 2, 3]), 0.0, atol=1e-8)
    b = np.array([0.3, 0.0, 0.0])
    def kepler_hess(x):
        r = np.linalg.norm(x)
        return (np.eye(3) - np.outer(x, x) / r**2) / r
    kepler_f = ScalarField(lambda x: float(np.linalg.norm(x) + np.dot(b, x)),
                           grad_fn=lambda x: x / np.linalg.norm(x) + b,
                           hess_fn=kepler_hess)
    hs1 = HomogeneousSurface(LevelSurface(kepler_f, 1.0), 1.0)
    assert np.allclose(hs1.homogeneity_residuals([1.0, 1.0, 1.0]), 0.0, atol=1e-9)


def test_homogeneous_cartesian_field_examples():
    hs = HomogeneousSurface(QUADRIC_124, 2.0)
    v = homogeneous_cartesian_field(hs, lambda f: f, [1.0, 1.0, 1.0])
    direction = np.array([12.0, 12.0, -6.0])
    assert np.allclose(v / np.linalg.norm(v), direction / np.linalg.norm(direction))
    assert abs(np.dot(QUADRIC_124.gradient([1, 1, 1]), v)) < 1e-12
    # unit sphere: g x - m f f_x vanishes identically
    with pytest.raises(DegenerateFieldError):
        homogeneous_cartesian_field(HomogeneousSurface(SPHERE, 2.0), lambda f: f, [1.0, 0.0, 0.0])


def test_homogeneous_flow_extra_integral_drift():
    hs = HomogeneousSurface(QUADRIC_124, 2.0)
    h = lambda f: 0.0032
    field = VectorField(lambda x: homogeneous_cartesian_field(hs, h, x))
    # start at mid-latitude on f = 3, away from both degenerate circles
    x0 = np.array([1.0, 1.0, 1.0])
    traj = integrate_first_order(field, x0, IntegratorConfig(step=1e-3, t_end=10.0, record_every=100))
    fvals = np.array([QUADRIC_124.f(s) for s in traj.states])
    assert np.abs(fvals - 3.0).max() < 1e-8
    drifts = [homogeneous_extra_integral(hs, h, s, field(s)) for s in traj.states]
    assert np.abs(np.array(drifts)).max() < 1e-7


def make_kepler(b=(0.0, 0.0, 0.0)):
    return KeplerSurface(np.array(b, dtype=float), np.array([0.0, 0.0, 1.0]))


def test_kepler_circular_orbit():
    ks = make_kepler()
    for sigma in np.linspace(0, 2 * np.pi, 7):
        x = np.array([np.cos(sigma), np.sin(sigma), 0.0])
        v = kepler_surface_flow(ks, x)
        assert np.allclose(v, [-np.sin(sigma), np.cos(sigma), 0.0], atol=1e-12)
        r1, r2, r3 = kepler_invariants(ks, x, v)
        assert abs(r1) < 1e-9
        assert np.linalg.norm(r2) < 1e-9
        assert np.linalg.norm(r3) < 1e-9


def test_kepler_eccentric_invariants_and_acceleration():
    ks = make_kepler(b=(0.5, 0.0, 0.0))
    x0 = ks.plane_point(0.0)          # perihelion
    field = VectorField(lambda x: kepler_surface_flow(ks, x))
    period = 2 * np.pi * (1.0 / (1 - 0.25)) ** 1.5
    traj = integrate_first_order(field, x0, IntegratorConfig(step=1e-3, t_end=period))
    for s in traj.states[::977]:
        r1, r2, r3 = kepler_invariants(ks, s, field(s))
        assert abs(r1) < 1e-7
        assert np.linalg.norm(r2) < 1e-7
        assert np.linalg.norm(r3) < 1e-7
    # x'' = -x/r^3 by a high-order second difference of the sigma-trajectory
    h = traj.times[1] - traj.times[0]
    for i in range(2, len(traj.states) - 2, 1499):
        sec = (-traj.states[i - 2] + 16 * traj.states[i - 1] - 30 * traj.states[i]
               + 16 * traj.states[i + 1] - traj.states[i + 2]) / (12 * h * h)
        x = traj.states[i]
        assert np.linalg.norm(sec + x / np.linalg.norm(x) ** 3) < 1e-6
    # orbit returns to the start after one period
    assert np.linalg.norm(traj.final - x0) < 1e-6


def test_kepler_plane_reduction():
    ks = make_kepler(b=(0.5, 0.0, 0.0))
    x0 = ks.plane_point(1.0)
    field = VectorField(lambda x: kepler_surface_flow(ks, x))
    traj = integrate_first_order(field, x0, IntegratorConfig(step=1e-3, t_end=3.0))
    h = traj.times[1] - traj.times[0]
    coords = np.array([kepler_plane_reduction(ks, s, field(s)) for s in traj.states])
    assert np.abs(coords[:, 2]).max() < 1e-9       # zeta = 0
    for i in range(2, len(coords) - 2, 499):
        sec = (-coords[i - 2] + 16 * coords[i - 1] - 30 * coords[i]
               + 16 * coords[i + 1] - coords[i + 2]) / (12 * h * h)
        xi, eta, _ = coords[i]
        rho3 = (xi ** 2 + eta ** 2) ** 1.5
        assert abs(sec[0] + xi / rho3) < 1e-7
        assert abs(sec[1] + eta / rho3) < 1e-7


def test_kepler_off_plane_rejected():
    ks = make_kepler()
    with pytest.raises(DomainBoundaryError):
        kepler_surface_flow(ks, [1.0, 0.0, 0.5])


def test_kepler_validation():
    with pytest.raises(ValueError):
        KeplerSurface(np.array([1.5, 0, 0]), np.array([0, 0, 1.0]))
    with pytest.raises(ValueError):
        KeplerSurface(np.array([0.1, 0, 0]), np.array([0.3, 0, 1.0]))


def test_cubic_surface_field_examples():
    nu = ScalarField(lambda x: 1.3)
    v = cubic_surface_field(lambda xi, eta, zeta: (1.0, 0.0, 0.0), nu, [2.0, 0.5, 3.0])
    assert np.allclose(v, [1.3 * 2.0, -1.3 * 0.5, 0.0])
    vsum = cubic_surface_field(lambda xi, eta, zeta: (1.0, 1.0, 1.0), nu, [2.0, 0.5, 3.0])
    assert np.allclose(vsum, 0.0)
    x = np.array([1.0, 2.0, 3.0])
    vq = cubic_surface_field(lambda xi, eta, zeta: (2 * xi, 0.0, 0.0), nu, x)
    fx = np.array([x[1] * x[2], x[0] * x[2], x[0] * x[1]])
    assert abs(np.dot(fx, vq)) < 1e-10
    with pytest.raises(DomainBoundaryError):
        cubic_surface_field(lambda xi, eta, zeta: (1.0, 0.0, 0.0), nu, [0.0, 1.0, 1.0])


def test_lie_closure_families():
    pts = [np.array([1.0, 2.0, 3.0]), np.array([0.4, -0.7, 1.1])]
    for fid, params in [(1, dict(b1=1.0, b2=1.0, b3=1.0)),
                        (1, dict(b1=1.0, b2=2.0, b3=3.0)),
                        (2, dict(b1=0.7, a=1.2, b=-0.5)),
                        (3, dict(b=1.0, b3=1.0)),
                        (4, dict(b=2.0, b1=0.6))]:
        f = quadratic_family(fid, **params)
        for x in pts:
            assert lie_closure_residual(f, x) <= 1e-8


def test_lie_closure_fails_off_catalog():
    quartic = Poly3({(4, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}).as_scalar_field()
    assert lie_closure_residual(quartic, [1.0, 2.0, 3.0]) > 1e-3


def test_hessian_combination_identity_universal():
    from descartes_dyn.surfaces import hessian_combination_residual
    from descartes_dyn.poly import random_poly
    rng = np.random.default_rng(31)
    for _ in range(6):
        f = random_poly(rng, degree=4).as_scalar_field()
        x = rng.uniform(-1.5, 1.5, 3)
        assert hessian_combination_residual(f, x) <= 1e-9
