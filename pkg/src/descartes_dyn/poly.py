"""Trivariate polynomials with exact derivatives.

Used as differentiable test inputs everywhere a spec check needs an
independent analytic oracle, and by the demo scripts.  Coefficients are kept
in a dict {(i, j, k): c} meaning c * x1^i * x2^j * x3^k.
"""

from __future__ import annotations

import numpy as np

from .fields import ScalarField, VectorField


class Poly3:
    """Polynomial in (x1, x2, x3) with exact partial derivatives."""

    def __init__(self, coeffs: dict):
        self.coeffs = {tuple(k): float(c) for k, c in coeffs.items() if c != 0.0}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for (i, j, k), c in self.coeffs.items():
            total += c * x[0] ** i * x[1] ** j * x[2] ** k
        return total

    def partial(self, axis: int) -> "Poly3":
        out = {}
        for key, c in self.coeffs.items():
            e = key[axis]
            if e == 0:
                continue
            nk = list(key)
            nk[axis] = e - 1
            nk = tuple(nk)
            out[nk] = out.get(nk, 0.0) + c * e
        return Poly3(out)

    def gradient_polys(self):
        return [self.partial(0), self.partial(1), self.partial(2)]

    def as_scalar_field(self, analytic: bool = True) -> ScalarField:
        if not analytic:
            return ScalarField(self.__call__)
        gs = self.gradient_polys()
        hs = [[gs[i].partial(j) for j in range(3)] for i in range(3)]

        def grad_fn(x):
            return np.array([g(x) for g in gs])

        def hess_fn(x):
            return np.array([[hs[i][j](x) for j in range(3)] for i in range(3)])

        return ScalarField(self.__call__, grad_fn=grad_fn, hess_fn=hess_fn)


def poly_vector_field(p1: Poly3, p2: Poly3, p3: Poly3, analytic: bool = True) -> VectorField:
    comps = (p1, p2, p3)

    def fn(x):
        return np.array([c(x) for c in comps])

    if not analytic:
        return VectorField(fn)
    parts = [[c.partial(j) for j in range(3)] for c in comps]

    def jac_fn(x):
        return np.array([[parts[i][j](x) for j in range(3)] for i in range(3)])

    return VectorField(fn, jac_fn=jac_fn)


def random_poly(rng: np.random.Generator, degree: int = 3, n_terms: int = 6,
                scale: float = 1.0) -> Poly3:
    coeffs = {}
    for _ in range(n_terms):
        key = tuple(int(e) for e in rng.integers(0, degree + 1, size=3))
        if sum(key) > degree:
            continue
        coeffs[key] = coeffs.get(key, 0.0) + float(rng.normal(scale=scale))
    if not coeffs:
        coeffs[(1, 0, 0)] = 1.0
    return Poly3(coeffs)


def random_poly_vector_field(rng: np.random.Generator, degree: int = 3,
                             n_terms: int = 6) -> VectorField:
    return poly_vector_field(
        random_poly(rng, degree, n_terms),
        random_poly(rng, degree, n_terms),
        random_poly(rng, degree, n_terms),
    )
