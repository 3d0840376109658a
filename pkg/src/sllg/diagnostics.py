"""Trajectory observers and post-processing diagnostics.

The per-time columns follow a fixed order (``COLUMNS``), which is also the
CSV column order.  Time integrals use left-endpoint sums over the observed
times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model as mdl
from .algebra import cross, dot, sup_deviation_from_sphere

COLUMNS = ("time", "l2", "v_norm", "energy", "exchange", "anisotropy",
           "cum_dissipation", "sphere_dev", "xneg_beta")

# Running integrals kept beside the CSV columns; used by the ensemble functionals.
INTEGRALS = ("dissipation", "l32_sq", "xneg_sq")

DEFAULT_BETA = 0.3
DEFAULT_ALPHA = 0.25


@dataclass
class TrajectoryRecord:
    """Diagnostics and snapshots of one sample path."""

    basis: object = None
    scheme: str = ""
    dt: float = 0.0
    seed: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    integrals: dict = field(default_factory=lambda: dict.fromkeys(INTEGRALS, 0.0))
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    states: list | None = None
    final_state: np.ndarray | None = None
    weak_residuals: list = field(default_factory=list)

    def add_snapshot(self, t, u):
        self.snapshot_times.append(float(t))
        self.snapshots.append(np.array(u, dtype=float))

    def column(self, name):
        i = COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    @property
    def times(self):
        return self.column("time")

    def sup(self, name):
        return float(np.max(self.column(name)))

    def holder_table(self, alpha):
        """Pairwise ``||u(t) - u(s)|| / |t - s|^alpha`` over the snapshots."""
        t = np.asarray(self.snapshot_times)
        S = np.asarray(self.snapshots).reshape(len(t), -1)
        i, j = np.triu_indices(len(t), k=1)
        dist = np.sqrt(np.sum((S[i] - S[j]) ** 2, axis=1))
        return t[i], t[j], dist / np.abs(t[j] - t[i]) ** alpha


def pointwise_diagnostics(u, m, beta=DEFAULT_BETA):
    """Every per-time quantity except the time and running integrals."""
    b = m.basis
    w = b.weights
    U = b.synthesis @ u
    rho = mdl._rho_phys(u, U, m)
    C1 = cross(U, rho)
    C2 = cross(U, C1)
    ex, an = mdl.energy_parts(u, m)
    xi = b.analysis @ C2
    xneg = b.fractional_norm(xi, -beta)
    return {
        "l2": b.l2_norm(u),
        "v_norm": b.fractional_norm(u, 0.5),
        "energy": ex + an,
        "exchange": ex,
        "anisotropy": an,
        "dissipation": float(w @ dot(C1, C1)),
        "sphere_dev": sup_deviation_from_sphere(U),
        "xneg_beta": xneg,
        "xneg_sq": xneg * xneg,
        "l32_sq": float(w @ dot(C2, C2) ** 0.75) ** (4.0 / 3.0),
    }


class Observer:
    """Evaluates diagnostics every ``stride`` steps and stores snapshots
    every ``snapshot_stride`` steps (0 keeps only the first and last).

    Time integrals are left-endpoint sums over the observed times, so a
    stride above 1 turns them into coarser Riemann sums.
    """

    def __init__(self, beta=DEFAULT_BETA, stride=1, snapshot_stride=0):
        if stride < 1:
            raise ValueError("diagnostics stride must be >= 1")
        if snapshot_stride < 0:
            raise ValueError("snapshot stride must be >= 0")
        self.beta = beta
        self.stride = int(stride)
        self.snapshot_stride = int(snapshot_stride)
        self._last = None
        self._last_step = None

    def _record(self, u, step, t, m, rec):
        d = pointwise_diagnostics(u, m, self.beta)
        if self._last is not None:
            t_prev, prev = self._last
            for name in INTEGRALS:
                rec.integrals[name] += prev[name] * (t - t_prev)
        self._last = (t, d)
        rec.rows.append(tuple(
            t if c == "time" else rec.integrals["dissipation"] if c == "cum_dissipation" else d[c]
            for c in COLUMNS))
        self._last_step = step

    def observe(self, u, step, t, m, rec):
        if step == 0:
            self._last = None
        if step % self.stride == 0:
            self._record(u, step, t, m, rec)
        snap = step == 0 or (self.snapshot_stride and step % self.snapshot_stride == 0)
        if snap:
            rec.add_snapshot(t, u)

    def finish(self, u, step, t, m, rec):
        if self._last_step != step:
            self._record(u, step, t, m, rec)
        if not rec.snapshot_times or rec.snapshot_times[-1] != t:
            rec.add_snapshot(t, u)


def holder_quotient(record, alpha=DEFAULT_ALPHA):
    """``max ||u(t) - u(s)||_{L²} / |t - s|^alpha`` over stored snapshot pairs."""
    if len(record.snapshot_times) < 2:
        raise ValueError("Hölder quotient needs at least two snapshots")
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    return float(np.max(record.holder_table(alpha)[2]))


# ---------------------------------------------------------------------------
# weak formulation residual


@dataclass(frozen=True)
class TestFunction:
    """``ψ(x) = sin(mode π x / L) * vector``; vanishes at both ends."""

    __test__ = False  # not a pytest class

    mode: int = 1
    vector: tuple = (1.0, 0.0, 0.0)

    def evaluate(self, basis, x=None):
        """``(ψ, ψ')`` on the basis nodes, or at ``x`` if given."""
        x = basis.nodes if x is None else np.asarray(x, dtype=float)
        kx = self.mode * np.pi / basis.length
        v = np.asarray(self.vector, dtype=float)
        return np.sin(kx * x)[:, None] * v, kx * np.cos(kx * x)[:, None] * v


class _PairingGrid:
    """Gauss-Legendre grid for pairings against sine test functions.

    Sine-times-cosine integrands are not periodic on [0, L], so the
    trapezoid rule only reaches second order on them; Gauss-Legendre with
    ``4 * n_quad`` points is exact to rounding for the bandwidths involved.
    """

    def __init__(self, m, psi, n_points=None):
        b = m.basis
        self.x, self.w = b.gauss_grid(n_points)
        self.E, self.dE = b.synthesis_at(self.x)
        if m.n_channels:
            self.H = np.array([ch.evaluate(b, self.x)[0] for ch in m.channels])
        else:
            self.H = np.zeros((0, len(self.x), 3))
        self.P, self.dP = psi.evaluate(b, self.x)
        self.m = m

    def inner(self, f, g):
        return float(self.w @ dot(f, g))

    def value(self, u):
        return self.inner(self.E @ u, self.P)

    def drift(self, u):
        """Drift tested against ψ, second-order terms integrated by parts:

        ``λ1 <∂u, u×∂ψ> - λ1 <u×∇φ(u), ψ> - λ2 <∂u, ∂(u×ψ)×u> + λ2 <u×(u×∇φ(u)), ψ>``.
        """
        m = self.m
        if not m.drift:
            return 0.0
        U = self.E @ u
        dU = self.dE @ u
        ug = cross(U, m.anisotropy.gradient(U))
        P, dP = self.P, self.dP
        prec = self.inner(dU, cross(U, dP)) - self.inner(ug, P)
        damp = -self.inner(dU, cross(cross(dU, P) + cross(U, dP), U)) + self.inner(cross(U, ug), P)
        return m.lambda1 * prec + m.lambda2 * damp

    def noise(self, u):
        """``<u × h_j, ψ>`` for every channel."""
        return dot(cross(self.E @ u, self.H), self.P) @ self.w

    def ito_correction(self, u):
        """``<½ sum_j π(u×h_j)×h_j, ψ>``."""
        m = self.m
        # π(u×h_j) is a cosine series: re-synthesize it on the pairing grid
        coeff = m.basis.analysis @ cross(m.basis.synthesis @ u, m.noise)
        Y = self.E @ coeff
        return 0.5 * self.inner(cross(Y, self.H).sum(axis=0), self.P)


def weak_residual_terms(states, path, psi, m, stratonovich="midpoint", drift_rule="left"):
    """Both sides of the weak identity at the final time, tested against ``psi``.

    ``stratonovich="left"`` replaces the midpoint sums by left-point sums; this
    converges to the Itô integral and is kept as a negative control.
    """
    if states is None or len(states) < 2:
        raise ValueError("weak residual needs the state at every step")
    if stratonovich not in ("midpoint", "left"):
        raise ValueError("stratonovich rule must be 'midpoint' or 'left'")
    if drift_rule not in ("left", "midpoint"):
        raise ValueError("drift rule must be 'left' or 'midpoint'")
    n_steps = len(states) - 1
    if path.n_steps < n_steps:
        raise ValueError("path shorter than the stored trajectory")
    grid = _PairingGrid(m, psi)
    dt = path.dt
    dW = path.increments

    lhs = grid.value(states[-1])
    initial = grid.value(states[0])
    drift = 0.0
    stoch = 0.0
    for k in range(n_steps):
        mid = 0.5 * (states[k] + states[k + 1])
        drift += dt * grid.drift(mid if drift_rule == "midpoint" else states[k])
        if m.n_channels:
            at = mid if stratonovich == "midpoint" else states[k]
            stoch += float(grid.noise(at) @ dW[k])
    rhs = initial + drift + stoch
    return {"lhs": lhs, "initial": initial, "drift": drift, "stochastic": stoch,
            "rhs": rhs, "residual": lhs - rhs}


def weak_residual(states, path, psi, m, stratonovich="midpoint", drift_rule="left"):
    """``|LHS - RHS|`` of the weak identity at the final stored time."""
    return abs(weak_residual_terms(states, path, psi, m, stratonovich, drift_rule)["residual"])


def ito_correction_pairing(states, dt, psi, m):
    """``sum_k dt <½ sum_j π(u_k×h_j)×h_j, ψ>``: the gap a left-point rule leaves."""
    if not m.n_channels:
        return 0.0
    grid = _PairingGrid(m, psi)
    return dt * sum(grid.ito_correction(u) for u in states[:-1])


# ---------------------------------------------------------------------------
# energy balance and sphere studies


def ito_balance_defect(states, path, m):
    """``Φ(u_M) - Φ(u_0)`` minus its Itô expansion summed with left points.

    Expansion terms: ``Φ'(u)[F̂(u)] + ½ sum_j Φ''(u)(G_j u, G_j u)`` per unit
    time and ``Φ'(u)[G_j u]`` per Wiener increment.
    """
    dt = path.dt
    total = 0.0
    for k, u in enumerate(states[:-1]):
        total += dt * (mdl.energy_drift_identity_rhs(u, m) + 0.5 * float(np.sum(mdl.noise_hessian_term(u, m))))
        if m.n_channels:
            total += float(mdl.noise_energy_pairing(u, m) @ path.increments[k])
    return mdl.energy(states[-1], m) - mdl.energy(states[0], m) - total


def sphere_deviation_study(m, n_list, cfg, path):
    """Max-over-time sphere deviation for each cutoff, all driven by ``path``."""
    from .integrators import integrate

    rows = []
    for n in n_list:
        mn = m.with_modes(n)
        rec = integrate(mn, cfg, path, observer=Observer(stride=1))
        rows.append({"n_modes": n, "max_sphere_dev": rec.sup("sphere_dev"),
                     "initial_sphere_dev": float(rec.column("sphere_dev")[0])})
    return rows
