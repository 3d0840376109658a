"""Operator-identity suite run by ``sllg verify`` and the acceptance tests.

Each check is evaluated on many random states and reports the worst
relative defect against its tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as mdl
from .algebra import cross, dot
from .basis import ORTHONORMAL_TOL

IDENTITY_TOL = 1e-9
FD_GRADIENT_TOL = 1e-6
FD_HESSIAN_TOL = 1e-5
ENERGY_IDENTITY_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.worst) and self.worst <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<38s} worst={self.worst:.3e}  tol={self.tol:.1e}"


def random_state(basis, rng, decay=1.0):
    """Random coefficients with spectrum decaying like ``(1 + k)^-(1 + decay)``."""
    k = np.arange(basis.n_modes)
    return rng.standard_normal((basis.n_modes, 3)) / (1.0 + k[:, None]) ** (1.0 + decay)


def _rel(defect, scale):
    return abs(defect) / max(scale, 1e-300)


def _inner(b, F, G):
    return float(b.weights @ dot(F, G))


def check_basis(basis):
    """Orthonormality of the modes under the quadrature, and transform round trip."""
    gram = basis.analysis @ basis.synthesis
    ortho = float(np.max(np.abs(gram - np.eye(basis.n_modes))))
    rng = np.random.default_rng(0)
    c = rng.standard_normal((basis.n_modes, 3))
    rt = float(np.max(np.abs(basis.to_coeffs(basis.to_physical(c)) - c)))
    return [CheckResult("basis orthonormality", ortho, ORTHONORMAL_TOL),
            CheckResult("basis round trip", rt, ORTHONORMAL_TOL)]


def operator_identities(m, n_states=100, seed=0):
    """Orthogonality of the drift pieces, skew noise maps and the weak forms
    of ``u×Au`` and ``u×(u×Au)``."""
    b = m.basis
    rng = np.random.default_rng(seed)
    worst = {}

    def note(name, value):
        worst[name] = max(worst.get(name, 0.0), value)

    drifts = (mdl.drift_f1, mdl.drift_f2, mdl.drift_f3, mdl.drift_f4)
    for _ in range(n_states):
        u = random_state(b, rng)
        v = random_state(b, rng)
        nu = b.l2_norm(u)
        for i, f in enumerate(drifts, 1):
            F = f(u, m)
            note(f"<F{i}(u), u> = 0", _rel(np.sum(F * u), b.l2_norm(F) * nu))
        for j in range(1, m.n_channels + 1):
            gu, gv = mdl.noise_g(u, j, m), mdl.noise_g(v, j, m)
            note("G_j skew-adjoint", _rel(np.sum(gu * v) + np.sum(u * gv), nu * b.l2_norm(v)))

        U, V = b.to_physical(u), b.to_physical(v)
        dU, dV = b.gradient(u), b.gradient(v)
        AU = b.to_physical(b.apply_a(u))
        uxAu = cross(U, AU)
        n_uxAu = _inner(b, uxAu, uxAu)
        note("<u x Au, Au> = 0", _rel(_inner(b, uxAu, AU), np.sqrt(n_uxAu * _inner(b, AU, AU))))
        note("<u x (u x Au), Au> = -|u x Au|^2", _rel(_inner(b, cross(U, uxAu), AU) + n_uxAu, n_uxAu))

        lhs = _inner(b, uxAu, V)
        rhs = _inner(b, dU, cross(dV, U))
        note("weak form of u x Au", _rel(lhs - rhs, np.sqrt(n_uxAu * _inner(b, V, V))))
        W = cross(V, U)
        dW = cross(dV, U) + cross(V, dU)
        lhs = _inner(b, cross(U, uxAu), V)
        rhs = _inner(b, dU, cross(dW, U))
        note("weak form of u x (u x Au)",
             _rel(lhs - rhs, np.sqrt(n_uxAu * _inner(b, W, W))))

    return [CheckResult(k, v, IDENTITY_TOL) for k, v in worst.items()]


def energy_calculus(m, n_fd=50, n_identity=100, seed=1, eps=1e-5):
    """Finite-difference checks of the energy pairings and the drift identity."""
    b = m.basis
    rng = np.random.default_rng(seed)
    g_worst = h_worst = 0.0
    for _ in range(n_fd):
        u, g, k = (random_state(b, rng) for _ in range(3))
        fd = (mdl.energy(u + eps * g, m) - mdl.energy(u - eps * g, m)) / (2 * eps)
        an = mdl.energy_gradient_pairing(u, g, m)
        g_worst = max(g_worst, _rel(fd - an, abs(an)))
        fd2 = (mdl.energy_gradient_pairing(u + eps * k, g, m)
               - mdl.energy_gradient_pairing(u - eps * k, g, m)) / (2 * eps)
        an2 = mdl.energy_hessian_pairing(u, g, k, m)
        h_worst = max(h_worst, _rel(fd2 - an2, abs(an2)))
    id_worst = 0.0
    for _ in range(n_identity):
        u = random_state(b, rng)
        lhs = mdl.energy_drift_identity_lhs(u, m)
        rhs = mdl.energy_drift_identity_rhs(u, m)
        id_worst = max(id_worst, _rel(lhs - rhs, max(abs(lhs), abs(rhs))))
    return [CheckResult("energy gradient vs finite difference", g_worst, FD_GRADIENT_TOL),
            CheckResult("energy hessian vs finite difference", h_worst, FD_HESSIAN_TOL),
            CheckResult("energy drift identity", id_worst, ENERGY_IDENTITY_TOL)]


def run_suite(m, seed=0):
    return check_basis(m.basis) + operator_identities(m, seed=seed) + energy_calculus(m, seed=seed + 1)
