"""Time stepping for the Galerkin SDE.

Three schemes share one signature ``step(u, dW, params, cfg) -> u_next``:

* ``euler_maruyama_ito``  -- explicit Euler on the Itô form (drift includes
  the ``½ sum G²`` correction);
* ``heun_stratonovich``   -- predictor/corrector on the Stratonovich fields;
* ``implicit_midpoint``   -- Stratonovich fields evaluated at the midpoint,
  solved by fixed-point iteration.  Every field is orthogonal to its
  argument, so the L² norm is conserved up to the solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as mdl

SCHEMES = ("euler_maruyama_ito", "heun_stratonovich", "implicit_midpoint")


class IntegrationError(RuntimeError):
    """A trajectory hit a non-finite state or a failed implicit solve."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class StepSizeError(IntegrationError):
    """Fixed-point iteration of the midpoint scheme did not converge."""


@dataclass(frozen=True)
class StepperConfig:
    scheme: str = "implicit_midpoint"
    dt: float = 1e-3
    T: float = 1.0
    tol: float = 1e-13
    max_iter: int = 100

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.dt > 0 or not self.T >= 0:
            raise ValueError("dt must be positive and T nonnegative")
        if not self.tol > 0:
            raise ValueError("fixed-point tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        n = round(self.T / self.dt)
        if abs(n * self.dt - self.T) > 1e-12 * max(self.T, 1.0):
            raise ValueError(f"dt={self.dt} does not divide T={self.T}")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


def _finite(u, step=None):
    if not np.all(np.isfinite(u)):
        raise IntegrationError("non-finite state (blow-up); reduce dt", step)
    return u


def step_euler_ito(u, dW, m, cfg):
    out = u + cfg.dt * mdl.full_drift(u, m) + mdl.noise_increment(u, dW, m)
    return _finite(out)


def step_heun_stratonovich(u, dW, m, cfg):
    f0 = mdl.strat_drift(u, m)
    g0 = mdl.noise_increment(u, dW, m)
    pred = u + cfg.dt * f0 + g0
    f1 = mdl.strat_drift(pred, m)
    g1 = mdl.noise_increment(pred, dW, m)
    return _finite(u + 0.5 * cfg.dt * (f0 + f1) + 0.5 * (g0 + g1))


def step_implicit_midpoint(u, dW, m, cfg):
    """Solve ``v = u + dt F(ū) + sum_j G_j(ū) dW_j`` with ``ū = (u + v) / 2``."""
    # the noise map is linear: G(ū) = ½ G(u) + ½ G(v)
    g_half = 0.5 * mdl.noise_increment(u, dW, m)
    scale = max(float(np.sqrt(np.sum(u * u))), 1e-300)
    v = u
    for _ in range(cfg.max_iter):
        mid = 0.5 * (u + v)
        new = u + cfg.dt * mdl.strat_drift(mid, m) + g_half + 0.5 * mdl.noise_increment(v, dW, m)
        if not np.all(np.isfinite(new)):
            raise StepSizeError("fixed-point iterate became non-finite; reduce dt")
        change = float(np.sqrt(np.sum((new - v) ** 2)))
        v = new
        if change <= cfg.tol * scale:
            return v
    raise StepSizeError(
        f"fixed-point iteration did not reach tol={cfg.tol} in {cfg.max_iter} "
        f"iterations (last change {change / scale:.3e}); reduce dt")


STEPPERS = {
    "euler_maruyama_ito": step_euler_ito,
    "heun_stratonovich": step_heun_stratonovich,
    "implicit_midpoint": step_implicit_midpoint,
}


def integrate(m, cfg, path, observer=None, u0=None, keep_states=False):
    """Run ``cfg.n_steps`` steps driven by ``path``.

    Without an observer the returned record holds the initial and final
    states only.  ``keep_states`` stores every state (needed by the weak
    residual post-processing).
    """
    from .diagnostics import TrajectoryRecord

    n_steps = cfg.n_steps
    if path.n_steps < n_steps or path.n_channels != m.n_channels:
        raise ValueError(
            f"path with {path.n_steps} steps x {path.n_channels} channels cannot drive "
            f"{n_steps} steps of a {m.n_channels}-channel model")
    if abs(path.dt - cfg.dt) > 1e-15 * cfg.dt:
        raise ValueError(f"path dt {path.dt} differs from stepper dt {cfg.dt}")
    stepper = STEPPERS[cfg.scheme]
    u = np.array(m.u0 if u0 is None else m.basis.check_coeffs(u0), dtype=float)

    record = TrajectoryRecord(basis=m.basis, scheme=cfg.scheme, dt=cfg.dt)
    record.seed = path.seed_descriptor()
    if keep_states:
        record.states = [u.copy()]
    if observer is not None:
        observer.observe(u, 0, 0.0, m, record)
    else:
        record.add_snapshot(0.0, u)

    dW = path.increments
    for step in range(n_steps):
        try:
            # a diverging iterate is detected and reported below; no need for numpy warnings
            with np.errstate(over="ignore", invalid="ignore"):
                u = stepper(u, dW[step], m, cfg)
        except IntegrationError as exc:
            raise type(exc)(str(exc), step=step) from exc
        if keep_states:
            record.states.append(u.copy())
        if observer is not None:
            observer.observe(u, step + 1, (step + 1) * cfg.dt, m, record)
    if observer is not None:
        observer.finish(u, n_steps, n_steps * cfg.dt, m, record)
    elif n_steps > 0:
        record.add_snapshot(n_steps * cfg.dt, u)
    record.final_state = u
    return record
