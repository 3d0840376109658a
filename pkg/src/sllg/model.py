"""Finite-dimensional stochastic LLG model on the Galerkin space.

The state is a coefficient array ``u`` of shape ``(n_modes, 3)``.  Every
nonlinear map is evaluated as synthesis -> nodewise algebra -> quadrature
projection; the oversampled grid makes the projections of products of up to
four modes exact.

Sign convention: the effective field is ``rho = Δu - π∇φ(u)`` and the
Stratonovich drift is ``λ1 u×rho - λ2 u×(u×rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .algebra import cross, dot
from .basis import SpectralBasis, embed_coeffs


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0:
        raise ValueError("axis must be a nonzero vector")
    return v / n


@dataclass(frozen=True)
class Anisotropy:
    """Anisotropy density ``φ`` acting on nodal values ``U[..., 3]``.

    ``kind="uniaxial"`` is ``K (1 - <u, e>²)``.  Passing ``cutoff=R`` replaces
    ``s = <u, e>`` by ``R tanh(s / R)`` and shifts by ``K (R² - 1)`` so the
    density, its gradient and Hessian are globally bounded; for ``|s| << R``
    this agrees with the plain uniaxial form up to the constant.
    """

    kind: str = "zero"
    axis: tuple = (0.0, 0.0, 1.0)
    strength: float = 0.0
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "uniaxial"):
            raise ValueError(f"unknown anisotropy kind {self.kind!r}")
        if self.strength < 0:
            raise ValueError("anisotropy strength must be nonnegative")
        if self.cutoff is not None and not self.cutoff >= 1:
            raise ValueError("truncation cutoff must be >= 1")
        object.__setattr__(self, "axis", tuple(float(a) for a in _unit(self.axis)))

    @classmethod
    def uniaxial(cls, strength, axis=(0.0, 0.0, 1.0), cutoff=None):
        return cls("uniaxial", tuple(axis), float(strength), cutoff)

    @property
    def is_zero(self):
        return self.kind == "zero" or self.strength == 0.0

    def _s(self, U):
        s = U @ np.asarray(self.axis)
        if self.cutoff is None:
            return s, np.ones_like(s), np.zeros_like(s)
        R = self.cutoff
        t = np.tanh(s / R)
        sech2 = 1.0 - t * t
        return R * t, sech2, -2.0 / R * sech2 * t

    def value(self, U):
        U = np.asarray(U, dtype=float)
        if self.is_zero:
            return np.zeros(U.shape[:-1])
        s, _, _ = self._s(U)
        top = 1.0 if self.cutoff is None else self.cutoff**2
        return self.strength * (top - s * s)

    def gradient(self, U):
        U = np.asarray(U, dtype=float)
        if self.is_zero:
            return np.zeros_like(U)
        s, ds, _ = self._s(U)
        return (-2.0 * self.strength * s * ds)[..., None] * np.asarray(self.axis)

    def hessian(self, U, G, K):
        """Nodewise bilinear form ``φ''(U)(G, K)``."""
        U = np.asarray(U, dtype=float)
        if self.is_zero:
            return np.zeros(U.shape[:-1])
        e = np.asarray(self.axis)
        s, ds, dds = self._s(U)
        curv = -2.0 * self.strength * (ds * ds + s * dds)
        return curv * (np.asarray(G) @ e) * (np.asarray(K) @ e)


@dataclass(frozen=True)
class NoiseChannel:
    """Spatial profile ``h_j`` of one Wiener channel.

    kinds: ``constant`` (``amplitude * vector``), ``cosine``
    (``amplitude * cos(mode π x / L) * vector``), or ``table`` (samples
    ``values`` at positions ``x`` interpolated linearly onto the grid).
    """

    kind: str = "constant"
    vector: tuple = (0.0, 0.0, 1.0)
    amplitude: float = 1.0
    mode: int = 0
    x: tuple | None = None
    values: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "table"):
            raise ValueError(f"unknown noise channel kind {self.kind!r}")
        object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))
        if self.kind == "table" and (self.x is None or self.values is None):
            raise ValueError("table channel needs x and values")

    def evaluate(self, basis: SpectralBasis, x=None):
        """Return ``(h, dh/dx)`` on the quadrature nodes, or at ``x`` if given."""
        x = basis.nodes if x is None else np.asarray(x, dtype=float)
        vec = np.asarray(self.vector)
        if self.kind == "constant":
            h = np.broadcast_to(self.amplitude * vec, (len(x), 3)).copy()
            return h, np.zeros_like(h)
        if self.kind == "cosine":
            kx = self.mode * np.pi / basis.length
            h = self.amplitude * np.cos(kx * x)[:, None] * vec
            dh = -self.amplitude * kx * np.sin(kx * x)[:, None] * vec
            return h, dh
        xs = np.asarray(self.x, dtype=float)
        vals = np.asarray(self.values, dtype=float).reshape(len(xs), 3)
        h = np.stack([np.interp(x, xs, vals[:, i]) for i in range(3)], axis=1)
        dh = np.gradient(h, x, axis=0)
        return h, dh


@dataclass(frozen=True)
class InitialDatum:
    """Initial magnetization, projected onto each basis on demand.

    kinds:
      ``constant``   -- ``vector`` everywhere;
      ``spherical``  -- unit field with azimuth ``a0 + a1 cos(mode π x/L)``
                        and polar angle ``b0 + b1 cos(mode π x/L)``;
      ``coefficients`` -- explicit coefficient rows (zero padded/truncated);
      ``function``   -- callable ``x -> (len(x), 3)`` array.
    """

    kind: str = "constant"
    vector: tuple = (1.0, 0.0, 0.0)
    azimuth: tuple = (0.0, 0.0)
    polar: tuple = (np.pi / 2, 0.0)
    mode: int = 1
    coefficients: tuple | None = None
    function: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "spherical", "coefficients", "function"):
            raise ValueError(f"unknown initial datum kind {self.kind!r}")

    def values(self, x, length):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.vector, float), (len(x), 3)).copy()
        if self.kind == "spherical":
            c = np.cos(self.mode * np.pi * x / length)
            az = self.azimuth[0] + self.azimuth[1] * c
            po = self.polar[0] + self.polar[1] * c
            return np.stack([np.sin(po) * np.cos(az), np.sin(po) * np.sin(az), np.cos(po)], axis=1)
        if self.kind == "function":
            return np.asarray(self.function(x), dtype=float)
        raise ValueError("coefficient data has no closed-form values")

    def project(self, basis: SpectralBasis):
        if self.kind == "coefficients":
            return embed_coeffs(np.asarray(self.coefficients, float).reshape(-1, 3), basis.n_modes)
        return basis.to_coeffs(self.values(basis.nodes, basis.length))


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one Galerkin model.

    ``drift=False`` switches off every deterministic term (the Itô correction
    stays, it belongs to the noise) and is used for the pure-rotation problem.
    """

    basis: SpectralBasis
    lambda1: float = 1.0
    lambda2: float = 1.0
    anisotropy: Anisotropy = Anisotropy()
    channels: tuple = ()
    initial: InitialDatum = InitialDatum()
    drift: bool = True

    def __post_init__(self):
        if not self.lambda2 > 0:
            raise ValueError("lambda2 must be > 0 (the damping constant is assumed strictly positive)")
        if not np.isfinite(self.lambda1):
            raise ValueError("lambda1 must be finite")
        object.__setattr__(self, "channels", tuple(self.channels))
        if not np.all(np.isfinite(self.noise)) or not np.all(np.isfinite(self.noise_grad)):
            raise ValueError("noise channel profiles must be finite on the grid")

    @property
    def n_channels(self):
        return len(self.channels)

    @cached_property
    def _noise_pair(self):
        nq = self.basis.n_quad
        if not self.channels:
            return np.zeros((0, nq, 3)), np.zeros((0, nq, 3))
        hs, dhs = zip(*(ch.evaluate(self.basis) for ch in self.channels))
        h, dh = np.array(hs), np.array(dhs)
        h.setflags(write=False)
        dh.setflags(write=False)
        return h, dh

    @property
    def noise(self):
        """Channel profiles on the nodes, shape ``(N, n_quad, 3)``."""
        return self._noise_pair[0]

    @property
    def noise_grad(self):
        return self._noise_pair[1]

    @cached_property
    def u0(self):
        c = self.initial.project(self.basis)
        c.setflags(write=False)
        return c

    def with_basis(self, basis: SpectralBasis):
        return replace(self, basis=basis)

    def with_modes(self, n_modes: int):
        return self.with_basis(self.basis.with_modes(n_modes))


# ---------------------------------------------------------------------------
# internal helpers


def _phys(u, m):
    return m.basis.synthesis @ u


def _project(X, m):
    return m.basis.analysis @ X


def _projected_anisotropy_field(U, m):
    """``π_n ∇φ(u)`` synthesized on the nodes."""
    if m.anisotropy.is_zero:
        return np.zeros_like(U)
    b = m.basis
    return b.synthesis @ (b.analysis @ m.anisotropy.gradient(U))


def _rho_phys(u, U, m):
    b = m.basis
    lap = b.synthesis @ (-b.eigenvalues[:, None] * u)
    return lap - _projected_anisotropy_field(U, m)


def _check(u, m):
    return m.basis.check_coeffs(u)


# ---------------------------------------------------------------------------
# drift pieces


def effective_field(u, m: ModelParams):
    """``rho_n = Δu - π_n ∇φ(u)`` as coefficients."""
    u = _check(u, m)
    U = _phys(u, m)
    g = m.anisotropy.gradient(U)
    return m.basis.apply_laplacian(u) - _project(g, m)


def drift_f1(u, m):
    u = _check(u, m)
    U = _phys(u, m)
    lap = m.basis.synthesis @ m.basis.apply_laplacian(u)
    return _project(cross(U, lap), m)


def drift_f2(u, m):
    u = _check(u, m)
    U = _phys(u, m)
    lap = m.basis.synthesis @ m.basis.apply_laplacian(u)
    return _project(cross(U, cross(U, lap)), m)


def drift_f3(u, m):
    u = _check(u, m)
    U = _phys(u, m)
    return -_project(cross(U, _projected_anisotropy_field(U, m)), m)


def drift_f4(u, m):
    u = _check(u, m)
    U = _phys(u, m)
    return -_project(cross(U, cross(U, _projected_anisotropy_field(U, m))), m)


def strat_drift(u, m):
    """Stratonovich drift ``λ1(F1+F3) - λ2(F2+F4) = π(λ1 u×rho - λ2 u×(u×rho))``."""
    if not m.drift:
        return np.zeros_like(u)
    U = _phys(u, m)
    C1 = cross(U, _rho_phys(u, U, m))
    C2 = cross(U, C1)
    return _project(m.lambda1 * C1 - m.lambda2 * C2, m)


# ---------------------------------------------------------------------------
# noise


def noise_g(u, j, m):
    """``G_j u = π_n(u × h_j)`` for the 1-based channel index ``j``."""
    if int(j) != j or not 1 <= j <= m.n_channels:
        raise IndexError(f"channel index {j} outside 1..{m.n_channels}")
    u = _check(u, m)
    return _project(cross(_phys(u, m), m.noise[int(j) - 1]), m)


def noise_all(u, m):
    """All channels at once, shape ``(N, n_modes, 3)``."""
    U = _phys(u, m)
    return _project(cross(U, m.noise), m)


def noise_increment(u, dW, m):
    """``sum_j G_j(u) dW_j``; the channels enter linearly, so fold them first."""
    if m.n_channels == 0:
        return np.zeros_like(u)
    H = np.tensordot(np.asarray(dW, dtype=float), m.noise, axes=(0, 0))
    return _project(cross(_phys(u, m), H), m)


def _g_then_cross(U, m):
    """``π(u×h_j)`` synthesized, followed by ``× h_j``; shape ``(N, n_quad, 3)``."""
    b = m.basis
    Y = b.synthesis @ (b.analysis @ cross(U, m.noise))
    return cross(Y, m.noise)


def ito_correction(u, m):
    """``½ sum_j G_j² u``."""
    u = _check(u, m)
    if m.n_channels == 0:
        return np.zeros_like(u)
    Z = _g_then_cross(_phys(u, m), m).sum(axis=0)
    return 0.5 * _project(Z, m)


def full_drift(u, m):
    """Itô drift: Stratonovich drift plus the correction ``½ sum_j G_j²``."""
    return strat_drift(u, m) + ito_correction(u, m)


# ---------------------------------------------------------------------------
# energy calculus


def energy_parts(u, m):
    """``(exchange, anisotropy)`` parts of the energy."""
    u = _check(u, m)
    b = m.basis
    ex = b.exchange_energy(u)
    an = float(b.weights @ m.anisotropy.value(_phys(u, m)))
    return ex, an


def energy(u, m):
    """``½ ||∇u||² + ∫ φ(u)``."""
    ex, an = energy_parts(u, m)
    return ex + an


def energy_gradient_pairing(u, g, m):
    """``Φ'(u)(g) = <Au, g> + ∫ <∇φ(u), g>``."""
    u = _check(u, m)
    g = _check(g, m)
    b = m.basis
    ex = float(np.sum(b.eigenvalues[:, None] * u * g))
    an = float(b.weights @ dot(m.anisotropy.gradient(_phys(u, m)), _phys(g, m)))
    return ex + an


def energy_hessian_pairing(u, g, k, m):
    """``Φ''(u)(g, k) = <∇g, ∇k> + ∫ φ''(u)(g, k)``."""
    u, g, k = _check(u, m), _check(g, m), _check(k, m)
    b = m.basis
    ex = float(np.sum(b.eigenvalues[:, None] * g * k))
    an = float(b.weights @ m.anisotropy.hessian(_phys(u, m), _phys(g, m), _phys(k, m)))
    return ex + an


def energy_drift_identity_lhs(u, m):
    return energy_gradient_pairing(u, full_drift(u, m), m)


def energy_drift_identity_rhs(u, m):
    """Closed form of ``Φ'(u)[F̂(u)]``:
    ``-λ2 ||u×rho||² - ½ sum_j <rho, π(u×h_j)×h_j>``.
    """
    u = _check(u, m)
    w = m.basis.weights
    U = _phys(u, m)
    rho = _rho_phys(u, U, m)
    total = 0.0
    if m.drift:
        C = cross(U, rho)
        total -= m.lambda2 * float(w @ dot(C, C))
    if m.n_channels:
        total -= 0.5 * float(w @ dot(rho, _g_then_cross(U, m).sum(axis=0)))
    return total


def noise_energy_pairing(u, m):
    """Per-channel ``Φ'(u)[G_j u] = -<Δu, u×h_j> + <∇φ(u), π(u×h_j)>``."""
    u = _check(u, m)
    b = m.basis
    U = _phys(u, m)
    lap = b.synthesis @ b.apply_laplacian(u)
    X = cross(U, m.noise)
    PX = b.synthesis @ (b.analysis @ X)
    return -(dot(X, lap) @ b.weights) + dot(PX, m.anisotropy.gradient(U)) @ b.weights


def noise_hessian_term(u, m):
    """Per-channel ``Φ''(u)[G_j u, G_j u] = ||∇π(u×h_j)||² + ∫ φ''(u)(G_j u, G_j u)``."""
    u = _check(u, m)
    b = m.basis
    U = _phys(u, m)
    gc = _project(cross(U, m.noise), m)
    ex = np.sum(b.eigenvalues[:, None] * gc * gc, axis=(1, 2))
    Gp = b.synthesis @ gc
    an = m.anisotropy.hessian(U, Gp, Gp) @ b.weights
    return ex + an


# ---------------------------------------------------------------------------
# gradient growth of the noise maps


def noise_gradient_ratios(u, m):
    """Per-channel ``||∇G_j u||² / (||∇u||² + 1)`` and the same for ``G_j²``."""
    u = _check(u, m)
    lam = m.basis.eigenvalues[:, None]
    denom = float(np.sum(lam * u * u)) + 1.0
    g1 = noise_all(u, m)
    r1 = np.array([np.sum(lam * g * g) for g in g1]) / denom
    r2 = []
    for j in range(m.n_channels):
        g2 = noise_g(g1[j], j + 1, m)
        r2.append(np.sum(lam * g2 * g2))
    return r1, np.array(r2) / denom


def noise_gradient_constants(m, l2_radius):
    """Growth constants ``(a, b, a1, b1)`` per channel, from ``h`` data alone.

    ``||∇(u×h)||² <= 2||h||∞² ||∇u||² + 2||h'||∞² ||u||²`` and projection
    does not increase the gradient norm, so ``||∇G u||² <= a||∇u||² + b``;
    applying it twice (with ``||G u|| <= ||h||∞ ||u||``) gives ``a1, b1``.
    """
    hinf = np.sqrt(dot(m.noise, m.noise)).max(axis=1) if m.n_channels else np.zeros(0)
    dinf = np.sqrt(dot(m.noise_grad, m.noise_grad)).max(axis=1) if m.n_channels else np.zeros(0)
    a = 2.0 * hinf**2
    b = 2.0 * dinf**2 * l2_radius**2
    b_inner = 2.0 * dinf**2 * (hinf * l2_radius) ** 2
    return a, b, a * a, a * b + b_inner
