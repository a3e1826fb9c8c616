"""Shared generators of random test data."""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from maxineq.sympath import SymmetricGenerator, find_crossings, integrate_path, standard_j
from maxineq.errors import DegeneracyError


def random_symmetric(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) * scale
    return 0.5 * (a + a.T)


def random_symplectic(rng: np.random.Generator, dim: int, scale: float = 0.5) -> np.ndarray:
    return expm(standard_j(dim) @ random_symmetric(rng, dim, scale))


def random_generator(rng: np.random.Generator, dim: int, degree: int = 2, scale: float = 3.0) -> SymmetricGenerator:
    coeffs = [random_symmetric(rng, dim, scale) for _ in range(degree + 1)]
    return SymmetricGenerator.polynomial(coeffs, 1.0)


def random_regular_path(rng: np.random.Generator, dim: int, steps: int = 200, **kw):
    """Integrated random path whose crossings are all regular."""
    while True:
        path = integrate_path(random_generator(rng, dim, **kw), steps)
        try:
            cr = find_crossings(path)
        except DegeneracyError:
            continue
        if all(c.regular for c in cr) and not any(c.endpoint and c.t > 0 for c in cr):
            return path
