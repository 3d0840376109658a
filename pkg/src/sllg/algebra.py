"""Nodewise vector algebra on physical fields.

Fields are arrays whose last axis has length 3.  Leading axes broadcast, so
the same kernels serve single fields ``(n_quad, 3)`` and stacks of noise
channels ``(N, n_quad, 3)``.
"""

import numpy as np


def cross(a, b):
    """Nodewise cross product.

    Written out by component; ``np.cross`` is several times slower on the
    small arrays used here.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def dot(a, b):
    """Nodewise Euclidean inner product."""
    return np.einsum("...i,...i->...", a, b)


def l2_inner(f, g, weights):
    """Quadrature ``sum_q w_q <f(x_q), g(x_q)>``."""
    return float(weights @ dot(f, g))


def l2_norm_sq(f, weights):
    return l2_inner(f, f, weights)


def sup_deviation_from_sphere(f):
    """``max_q | |f(x_q)| - 1 |``."""
    f = np.asarray(f, dtype=float)
    return float(np.max(np.abs(np.sqrt(dot(f, f)) - 1.0)))


def lp_norm(f, weights, p):
    """Quadrature ``(sum_q w_q |f(x_q)|^p)^(1/p)``."""
    mag = np.sqrt(dot(f, f))
    return float((weights @ mag**p) ** (1.0 / p))
