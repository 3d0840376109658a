"""Neumann cosine eigenbasis on [0, L] and the spectral operator calculus.

Coefficient arrays have shape ``(n_modes, 3)``: row ``k`` holds the three
Cartesian components of the ``e_k`` mode.  Physical arrays have shape
``(n_quad, 3)`` and hold values on the quadrature nodes.  Mode 0 is the
constant function.
"""

from __future__ import annotations

import numpy as np

# Default tolerances for the orthonormality / round-trip checks.
ORTHONORMAL_TOL = 1e-12
PARSEVAL_TOL = 1e-10


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class SpectralBasis:
    """Eigenpairs of ``A = -d^2/dx^2`` with Neumann ends, plus a trapezoid grid.

    Immutable after construction; safe to share between trajectories.
    """

    def __init__(self, length: float, n_modes: int, oversample: int = 4):
        if not length > 0:
            raise ValueError(f"domain length must be positive, got {length}")
        if int(n_modes) != n_modes or n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {n_modes}")
        if int(oversample) != oversample or oversample < 4:
            raise ValueError(f"oversample must be an integer >= 4, got {oversample}")
        self.length = float(length)
        self.n_modes = int(n_modes)
        self.oversample = int(oversample)
        self.n_quad = self.oversample * self.n_modes

        L = self.length
        k = np.arange(self.n_modes)
        wavenumber = k * np.pi / L
        x = np.linspace(0.0, L, self.n_quad)
        h = L / (self.n_quad - 1)
        w = np.full(self.n_quad, h)
        w[0] = w[-1] = 0.5 * h

        amp = np.full(self.n_modes, np.sqrt(2.0 / L))
        amp[0] = np.sqrt(1.0 / L)
        phase = np.outer(x, wavenumber)
        synth = amp * np.cos(phase)
        # d/dx of the cosine series; the k = 0 column vanishes identically.
        dsynth = -amp * wavenumber * np.sin(phase)

        self.wavenumbers = _frozen(wavenumber)
        self.eigenvalues = _frozen(wavenumber**2)
        self.nodes = _frozen(x)
        self.weights = _frozen(w)
        self.synthesis = _frozen(synth)
        self.derivative = _frozen(dsynth)
        self.analysis = _frozen((synth * w[:, None]).T)

    def __repr__(self):
        return (f"SpectralBasis(length={self.length!r}, n_modes={self.n_modes}, "
                f"oversample={self.oversample})")

    def __eq__(self, other):
        if not isinstance(other, SpectralBasis):
            return NotImplemented
        return (self.length, self.n_modes, self.oversample) == (
            other.length, other.n_modes, other.oversample)

    def __hash__(self):
        return hash((self.length, self.n_modes, self.oversample))

    # -- shape guards -----------------------------------------------------

    def check_coeffs(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape[-2:] != (self.n_modes, 3):
            raise ValueError(
                f"coefficient array of shape {c.shape} does not match basis "
                f"with {self.n_modes} modes")
        return c

    def check_field(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape[-2:] != (self.n_quad, 3):
            raise ValueError(
                f"physical field of shape {f.shape} does not match basis "
                f"with {self.n_quad} nodes")
        return f

    # -- transforms -------------------------------------------------------

    def to_physical(self, c):
        """Exact synthesis of the cosine series on the quadrature nodes."""
        return self.synthesis @ self.check_coeffs(c)

    def to_coeffs(self, f):
        """Quadrature projection onto the span of the first ``n_modes`` modes."""
        return self.analysis @ self.check_field(f)

    def gradient(self, c):
        """Spatial derivative of the series, synthesized on the nodes."""
        return self.derivative @ self.check_coeffs(c)

    def mode(self, k, component=2, amplitude=1.0):
        """Coefficient array holding a single mode."""
        c = np.zeros((self.n_modes, 3))
        c[k, component] = amplitude
        return c

    def eval_mode(self, k, x=None):
        """Value of ``e_k`` at ``x`` (defaults to the nodes); ``k`` may exceed the cutoff."""
        x = self.nodes if x is None else np.asarray(x, dtype=float)
        if k == 0:
            return np.full_like(x, np.sqrt(1.0 / self.length))
        return np.sqrt(2.0 / self.length) * np.cos(k * np.pi * x / self.length)

    def synthesis_at(self, x):
        """Synthesis and derivative matrices at arbitrary points ``x``."""
        x = np.asarray(x, dtype=float)
        amp = np.full(self.n_modes, np.sqrt(2.0 / self.length))
        amp[0] = np.sqrt(1.0 / self.length)
        phase = np.outer(x, self.wavenumbers)
        return amp * np.cos(phase), -amp * self.wavenumbers * np.sin(phase)

    def gauss_grid(self, n_points=None):
        """Gauss-Legendre nodes and weights on ``[0, L]``."""
        n_points = 4 * self.n_quad if n_points is None else int(n_points)
        t, wt = np.polynomial.legendre.leggauss(n_points)
        return 0.5 * self.length * (t + 1.0), 0.5 * self.length * wt

    # -- operator calculus ------------------------------------------------

    def apply_laplacian(self, c):
        """Return the coefficients of ``Δu = -Au``."""
        return -self.eigenvalues[:, None] * self.check_coeffs(c)

    def apply_a(self, c):
        return self.eigenvalues[:, None] * self.check_coeffs(c)

    def fractional_norm(self, c, beta):
        """``||A_1^beta u||`` with ``A_1 = I + A``; ``beta = 1/2`` is the H^1 norm."""
        c = self.check_coeffs(c)
        scale = (1.0 + self.eigenvalues) ** (2.0 * beta)
        return float(np.sqrt(np.sum(scale[:, None] * c * c)))

    def l2_norm(self, c):
        c = self.check_coeffs(c)
        return float(np.sqrt(np.sum(c * c)))

    def exchange_energy(self, c):
        """``½ ||∇u||²`` computed spectrally."""
        c = self.check_coeffs(c)
        return 0.5 * float(np.sum(self.eigenvalues[:, None] * c * c))

    def project_modes(self, c, m):
        """Zero every mode with index ``k >= m``."""
        c = self.check_coeffs(c)
        if int(m) != m or m < 1 or m > self.n_modes:
            raise ValueError(f"cannot project onto {m} modes of a {self.n_modes}-mode basis")
        out = c.copy()
        out[..., int(m):, :] = 0.0
        return out

    def with_modes(self, n_modes):
        """Same domain and oversampling with a different cutoff."""
        return SpectralBasis(self.length, n_modes, self.oversample)


def build_basis(length: float, n_modes: int, oversample: int = 4) -> SpectralBasis:
    return SpectralBasis(length, n_modes, oversample)


def embed_coeffs(c, n_modes):
    """Zero-pad or truncate a coefficient array to ``n_modes`` rows."""
    c = np.asarray(c, dtype=float)
    out = np.zeros((n_modes, 3))
    m = min(n_modes, c.shape[0])
    out[:m] = c[:m]
    return out
