"""Reference computations that share no code with the package.

They use adaptive quadrature, dense grids or closed forms, so agreement
with the spectral implementation is an independent check.
"""

import numpy as np
from scipy.integrate import quad
from scipy.spatial.transform import Rotation


def neumann_mode(k, x, length):
    x = np.asarray(x, dtype=float)
    if k == 0:
        return np.full_like(x, 1.0 / np.sqrt(length))
    return np.sqrt(2.0 / length) * np.cos(k * np.pi * x / length)


def gram_by_quad(n, length):
    """Mode inner products by adaptive quadrature."""
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = quad(lambda x: neumann_mode(i, x, length) * neumann_mode(j, x, length),
                           0, length, limit=200)[0]
    return G


def series(c, x, length):
    """Pointwise values of the cosine series with coefficient rows ``c``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return sum(np.outer(neumann_mode(k, x, length), c[k]) for k in range(len(c)))


def series_derivative(c, x, length):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((len(x), 3))
    for k in range(1, len(c)):
        out += np.outer(-np.sqrt(2.0 / length) * (k * np.pi / length)
                        * np.sin(k * np.pi * x / length), c[k])
    return out


def dense_integral(f, length, n=20001):
    """Simpson's rule on a fine grid for a vectorized scalar integrand."""
    from scipy.integrate import simpson

    x = np.linspace(0.0, length, n)
    return simpson(f(x), x=x)


def rotation_about(axis, angle, v):
    """Rotate rows of ``v`` about ``axis`` by ``angle`` (right-handed)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return Rotation.from_rotvec(angle * axis).apply(np.asarray(v, dtype=float))


def uniaxial_energy_density(U, strength, axis):
    e = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    return strength * (1.0 - (U @ e) ** 2)
