"""Trajectory integration, invariant-drift monitoring, cross-validation.

Two integrators: a fixed-step RK4 (default; bit-for-bit reproducible, used by
the acceptance scenarios) and adaptive RK45 via scipy.  States are plain
1-D numpy arrays of any dimension; diagnostics (constraint residuals, first
integrals) are recorded per sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, TangencyError
from .fields import VectorField

Rhs = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4-fixed"       # or "rk45-adaptive"
    step: float = 1e-3              # rk4 step; also output spacing for rk45
    rtol: float = 1e-9
    atol: float = 1e-11
    t_end: float = 10.0
    max_steps: Optional[int] = None
    record_every: int = 1           # keep every k-th rk4 step

    def __post_init__(self):
        if self.step <= 0 or self.rtol <= 0 or self.atol <= 0:
            raise ValueError("step and tolerances must be positive")
        if self.method not in ("rk4-fixed", "rk45-adaptive"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray                       # shape (n_samples, dim)
    derivs: Optional[np.ndarray] = None      # RHS at samples, for Hermite interp
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def sample(self, t: float) -> np.ndarray:
        """State at time t by cubic Hermite interpolation between samples."""
        ts = self.times
        if t <= ts[0]:
            return self.states[0].copy()
        if t >= ts[-1]:
            return self.states[-1].copy()
        i = int(np.searchsorted(ts, t) - 1)
        h = ts[i + 1] - ts[i]
        s = (t - ts[i]) / h
        y0, y1 = self.states[i], self.states[i + 1]
        if self.derivs is None:
            return y0 + s * (y1 - y0)
        d0, d1 = self.derivs[i], self.derivs[i + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1

    def sample_many(self, ts) -> np.ndarray:
        return np.array([self.sample(t) for t in np.atleast_1d(ts)])


def _rk4_step(rhs: Rhs, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _wrap_rhs(field) -> Rhs:
    if isinstance(field, VectorField):
        return lambda y: field(y)
    return field


def _run_diagnostics(diag_fns: Optional[dict], times, states) -> dict:
    out = {}
    if diag_fns:
        for name, fn in diag_fns.items():
            vals = np.array([fn(s) for s in states])
            if not np.all(np.isfinite(vals)):
                raise IntegrationError(f"diagnostic {name!r} produced non-finite values")
            out[name] = vals
    return out


def integrate_first_order(field, y0, cfg: IntegratorConfig,
                          diagnostics: Optional[dict] = None,
                          poststep: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                          ) -> Trajectory:
    """Integrate ydot = field(y) from y0 over [0, t_end]."""
    rhs = _wrap_rhs(field)
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(rhs(y0))):
        raise IntegrationError("field is not finite at the initial state")

    if cfg.method == "rk45-adaptive":
        sol = solve_ivp(lambda t, y: rhs(y), (0.0, cfg.t_end), y0,
                        method="RK45", rtol=cfg.rtol, atol=cfg.atol,
                        dense_output=True, max_step=np.inf)
        if not sol.success:
            raise IntegrationError(f"adaptive integration failed: {sol.message}")
        ts = np.arange(0.0, cfg.t_end + 0.5 * cfg.step, cfg.step)
        ts[-1] = min(ts[-1], cfg.t_end)
        ys = sol.sol(ts).T
        ds = np.array([rhs(y) for y in ys])
        return Trajectory(ts, ys, ds, _run_diagnostics(diagnostics, ts, ys))

    n = int(round(cfg.t_end / cfg.step))
    if cfg.max_steps is not None and n > cfg.max_steps:
        raise IntegrationError(f"{n} steps exceed max_steps={cfg.max_steps}")
    h = cfg.t_end / n
    times = [0.0]
    states = [y0.copy()]
    derivs = [rhs(y0)]
    y = y0.copy()
    for i in range(n):
        y = _rk4_step(rhs, y, h)
        if poststep is not None:
            y = poststep(y)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at step {i + 1}")
        if (i + 1) % cfg.record_every == 0 or i == n - 1:
            times.append((i + 1) * h)
            states.append(y.copy())
            derivs.append(rhs(y))
    return Trajectory(np.array(times), np.array(states), np.array(derivs),
                      _run_diagnostics(diagnostics, times, states))


def integrate_constrained_second_order(M, force, a: VectorField, x0, v0,
                                       cfg: IntegratorConfig,
                                       diagnostics: Optional[dict] = None,
                                       project_velocity: bool = True,
                                       tangency_tol: float = 1e-9) -> Trajectory:
    """Integrate M xddot = F(x) + mu a(x) with (a, xdot) = 0.

    The multiplier is eliminated each evaluation from the differentiated
    constraint:  mu = -((a, M^-1 F) + xdot (Da) xdot) / (a, M^-1 a).
    Optionally the velocity is re-projected onto the constraint plane after
    every accepted step (M-orthogonal projection, which only ever shrinks the
    residual).  Positions are never projected.  State layout: (x, xdot).
    """
    M = np.asarray(M, dtype=float)
    Minv = np.linalg.inv(M)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    av0 = a(x0)
    if abs(np.dot(av0, v0)) > tangency_tol * (1.0 + np.linalg.norm(av0) * np.linalg.norm(v0)):
        raise TangencyError(f"initial velocity violates the constraint: {np.dot(av0, v0)}")

    def accel(x, v):
        av = a(x)
        Ma = Minv @ av
        denom = float(np.dot(av, Ma))
        if abs(denom) < 1e-14:
            raise IntegrationError("(a, M^-1 a) = 0: ill-posed constraint")
        F = np.asarray(force(x), dtype=float)
        mu = -(float(np.dot(av, Minv @ F)) + float(v @ a.jacobian(x) @ v)) / denom
        return Minv @ (F + mu * av), mu

    def rhs(y):
        x, v = y[:3], y[3:]
        acc, _ = accel(x, v)
        return np.concatenate([v, acc])

    def proj(y):
        if not project_velocity:
            return y
        x, v = y[:3], y[3:]
        av = a(x)
        Ma = Minv @ av
        v = v - (np.dot(av, v) / np.dot(av, Ma)) * Ma
        return np.concatenate([x, v])

    diag = dict(diagnostics or {})
    diag.setdefault("constraint_residual", lambda y: float(np.dot(a(y[:3]), y[3:])))
    diag.setdefault("multiplier", lambda y: accel(y[:3], y[3:])[1])
    return integrate_first_order(rhs, np.concatenate([x0, v0]), cfg,
                                 diagnostics=diag,
                                 poststep=proj if project_velocity else None)


@dataclass
class DriftReport:
    reference: dict
    max_abs: dict
    max_rel: dict

    def worst_abs(self) -> float:
        return max(self.max_abs.values()) if self.max_abs else 0.0


def drift_report(traj: Trajectory, invariants: dict) -> DriftReport:
    """Per-invariant max |value - value0| and relative drift along a trajectory."""
    ref, mabs, mrel = {}, {}, {}
    for name, fn in invariants.items():
        vals = np.array([fn(s) for s in traj.states])
        ref[name] = float(vals[0])
        d = float(np.abs(vals - vals[0]).max())
        mabs[name] = d
        mrel[name] = d / max(1.0, abs(vals[0]))
    return DriftReport(ref, mabs, mrel)


@dataclass(frozen=True)
class FlowProblem:
    """One side of a cross-validation: an autonomous RHS plus bookkeeping."""

    rhs: Rhs
    y0: np.ndarray
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None
    invariants: dict = field(default_factory=dict)
    constraint: Optional[Callable[[np.ndarray], float]] = None


@dataclass
class CrossValidationReport:
    sup_deviation: float
    invariant_drift: dict
    constraint_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (np.isfinite(self.sup_deviation)
                and self.sup_deviation <= self.tolerance)


def cross_validate(first_order: FlowProblem, classical: FlowProblem,
                   cfg: IntegratorConfig, tolerance: float = 1e-5) -> CrossValidationReport:
    """Integrate both formulations and compare projected traces at common times."""
    ta = integrate_first_order(first_order.rhs, first_order.y0, cfg)
    tb = integrate_first_order(classical.rhs, classical.y0, cfg)
    pa = first_order.project or (lambda y: y)
    pb = classical.project or (lambda y: y)
    ts = ta.times if len(ta.times) <= len(tb.times) else tb.times
    sup = 0.0
    for t in ts:
        da = pa(ta.sample(t))
        db = pb(tb.sample(t))
        sup = max(sup, float(np.abs(np.asarray(da) - np.asarray(db)).max()))
    drifts = {}
    for name, fn in {**first_order.invariants}.items():
        drifts["first_order:" + name] = drift_report(ta, {name: fn}).max_abs[name]
    for name, fn in {**classical.invariants}.items():
        drifts["classical:" + name] = drift_report(tb, {name: fn}).max_abs[name]
    cres = 0.0
    if first_order.constraint is not None:
        cres = max(cres, max(abs(first_order.constraint(s)) for s in ta.states))
    if classical.constraint is not None:
        cres = max(cres, max(abs(classical.constraint(s)) for s in tb.states))
    return CrossValidationReport(sup, drifts, cres, tolerance)
