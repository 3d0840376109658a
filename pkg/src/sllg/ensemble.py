"""Monte Carlo driver and the convergence / uniformity studies.

Replica ``r`` is always driven by the path keyed on ``(base_seed, r)``, so
results do not depend on how replicas are scheduled over workers.  Means and
variances are accumulated with ``math.fsum`` over replica-ordered values,
making the aggregation independent of completion order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as mdl
from .diagnostics import DEFAULT_ALPHA, DEFAULT_BETA, Observer, holder_quotient
from .integrators import IntegrationError, StepperConfig, integrate
from .wiener import WienerPath

WORKERS_ENV = "SLLG_WORKERS"
STUDIES = ("plain", "n_uniformity", "order_study", "ito_strat")


class EnsembleError(RuntimeError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


@dataclass(frozen=True)
class EnsembleSpec:
    params: mdl.ModelParams
    stepper: StepperConfig
    replicas: int = 1
    base_seed: int = 0
    stride: int = 1
    snapshot_stride: int = 0
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    powers: tuple = (1, 2)
    study: str = "plain"
    n_list: tuple = ()
    dt_list: tuple = ()
    workers: int | None = None

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError("replica count must be >= 1")
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}")
        if self.study == "n_uniformity" and not self.n_list:
            raise ValueError("n_uniformity study needs a nonempty n_list")
        if self.study in ("order_study", "ito_strat") and not self.dt_list:
            raise ValueError(f"{self.study} needs a nonempty dt_list")


@dataclass(frozen=True)
class Stat:
    mean: float
    se: float
    min: float
    max: float
    count: int


def summarize(values):
    """Mean, standard error, min and max of a sample; order independent."""
    v = [float(x) for x in values]
    n = len(v)
    mean = math.fsum(v) / n
    se = math.sqrt(math.fsum((x - mean) ** 2 for x in v) / (n - 1) / n) if n > 1 else 0.0
    lo, hi = min(v), max(v)
    # the division can round one ulp outside a sample of equal values
    return Stat(min(max(mean, lo), hi), se, lo, hi, n)


@dataclass
class EnsembleSummary:
    stats: dict
    replicas: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def __getitem__(self, name):
        return self.stats[name]

    @property
    def functionals(self):
        return list(self.stats)


def resolve_workers(workers=None):
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def _map(fn, tasks, workers):
    workers = min(resolve_workers(workers), len(tasks))
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def replica_path(spec, replica, dt=None):
    dt = spec.stepper.dt if dt is None else dt
    n_steps = int(round(spec.stepper.T / dt))
    return WienerPath.generate(n_steps, spec.params.n_channels, dt, spec.base_seed, replica)


def trajectory_functionals(record, m, spec):
    """The per-path quantities averaged by the ensemble."""
    out = {}
    sup_energy = record.sup("energy")
    diss = record.integrals["dissipation"]
    for p in spec.powers:
        out[f"sup_energy_p{p}"] = sup_energy**p
        out[f"dissipation_p{p}"] = diss**p
    out["l32_integral"] = record.integrals["l32_sq"]
    out["xneg_integral"] = record.integrals["xneg_sq"]
    out["holder"] = holder_quotient(record, spec.alpha)
    out["final_energy"] = mdl.energy(record.final_state, m)
    return out


def run_replica(spec, replica, retries=0):
    """One trajectory; on failure retry on the bridge-refined path up to ``retries`` times."""
    path = replica_path(spec, replica)
    cfg = spec.stepper
    attempts = []
    for attempt in range(retries + 1):
        snap = spec.snapshot_stride * 2**attempt
        observer = Observer(spec.beta, spec.stride * 2**attempt, snap)
        try:
            rec = integrate(spec.params, cfg, path, observer)
        except IntegrationError as exc:
            attempts.append({"dt": cfg.dt, "error": str(exc)})
            path = path.refine()
            cfg = replace(cfg, dt=cfg.dt / 2)
            continue
        values = trajectory_functionals(rec, spec.params, spec)
        return {"replica": replica, "seed": path.seed_descriptor(), "dt": cfg.dt,
                "values": values, "failed_attempts": attempts, "record": rec}
    return {"replica": replica, "seed": path.seed_descriptor(), "failed": True,
            "failed_attempts": attempts}


def _replica_task(spec, replica, retries):
    res = run_replica(spec, replica, retries)
    rec = res.pop("record", None)
    if rec is not None:
        res["final_state"] = rec.final_state
    return res


def run_ensemble(spec, retries=0):
    """Run ``spec.replicas`` trajectories and aggregate their functionals."""
    tasks = [(spec, r, retries) for r in range(spec.replicas)]
    results = sorted(_map(_replica_task, tasks, spec.workers), key=lambda r: r["replica"])
    ok = [r for r in results if not r.get("failed")]
    failures = [{"replica": r["replica"], "seed": r["seed"], "attempts": r["failed_attempts"]}
                for r in results if r.get("failed")]
    if not ok:
        raise EnsembleError("all replicas failed", failures)
    names = list(ok[0]["values"])
    stats = {k: summarize([r["values"][k] for r in ok]) for k in names}
    return EnsembleSummary(stats, ok, failures)


# ---------------------------------------------------------------------------
# studies


def n_uniformity_study(spec, n_list=None, retries=2):
    """Coupled ensembles at each cutoff; identical increments drive every ``n``."""
    n_list = tuple(spec.n_list if n_list is None else n_list)
    if list(n_list) != sorted(set(n_list)):
        raise ValueError("n_list must be strictly increasing")
    rows = []
    for n in n_list:
        sub = replace(spec, params=spec.params.with_modes(n), study="plain")
        rows.append({"n_modes": n, "summary": run_ensemble(sub, retries)})
    trend = {}
    for name in rows[0]["summary"].stats:
        means = np.array([r["summary"][name].mean for r in rows])
        ses = np.array([r["summary"][name].se for r in rows])
        diffs = np.diff(means)
        combined = np.sqrt(ses[1:] ** 2 + ses[:-1] ** 2)
        z = np.divide(np.abs(diffs), combined, out=np.zeros_like(diffs), where=combined > 0)
        trend[name] = {"differences": diffs.tolist(), "z_scores": z.tolist(),
                       "slope_vs_log_n": float(np.polyfit(np.log(n_list), means, 1)[0])
                       if len(n_list) > 1 else 0.0}
    return {"rows": rows, "trend": trend}


def _check_dyadic(dt_list):
    dts = np.asarray(dt_list, dtype=float)
    if len(dts) < 3:
        raise ValueError("an order study needs at least 3 step sizes")
    if not np.allclose(dts[:-1] / dts[1:], 2.0, rtol=1e-12):
        raise ValueError("step sizes must be dyadic and decreasing (each half the previous)")
    return dts


def rotation_solution(m, W_T):
    """Closed-form solution for drift-free, constant, parallel channels.

    With ``h_j = a_j e`` the flow is the rotation of every node's vector about
    ``e`` by the angle ``-sum_j a_j W_j(T)``; it acts row-wise on coefficients.
    """
    if m.drift:
        raise ValueError("rotation oracle requires the drift to be switched off")
    axis = None
    angle = 0.0
    for ch, w in zip(m.channels, np.atleast_1d(W_T)):
        if ch.kind != "constant":
            raise ValueError("rotation oracle requires constant channels")
        v = ch.amplitude * np.asarray(ch.vector)
        a = float(np.linalg.norm(v))
        if a == 0.0:
            continue
        e = v / a
        if axis is None:
            axis = e
        elif abs(abs(float(axis @ e)) - 1.0) > 1e-12:
            raise ValueError("rotation oracle requires parallel channels")
        angle += a * float(axis @ e) * w
    u0 = np.asarray(m.u0)
    if axis is None:
        return u0.copy()
    th = -angle
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    R = np.eye(3) + np.sin(th) * K + (1 - np.cos(th)) * (K @ K)
    return u0 @ R.T


def _order_task(spec, replica, dts, schemes, reference):
    base = WienerPath.generate(int(round(spec.stepper.T / dts[0])), spec.params.n_channels,
                               dts[0], spec.base_seed, replica)
    paths = base.hierarchy(len(dts) + (2 if reference == "fine" else 0))
    out = {}
    for scheme in schemes:
        if reference == "rotation":
            ref = rotation_solution(spec.params, base.increments.sum(axis=0))
        else:
            p = paths[-1]
            cfg = replace(spec.stepper, scheme=scheme, dt=p.dt)
            ref = integrate(spec.params, cfg, p).final_state
        errs = []
        for dt, p in zip(dts, paths):
            cfg = replace(spec.stepper, scheme=scheme, dt=float(dt))
            u = integrate(spec.params, cfg, p).final_state
            errs.append(float(np.sqrt(np.sum((u - ref) ** 2))))
        out[scheme] = errs
    return out


def order_study(spec, dt_list=None, schemes=("euler_maruyama_ito", "heun_stratonovich",
                                             "implicit_midpoint"), reference="rotation"):
    """Strong-error slopes on Brownian-bridge-coupled paths.

    ``reference="rotation"`` compares with the closed-form rotation,
    ``"fine"`` with the same scheme run on the path refined twice more.
    """
    dts = _check_dyadic(spec.dt_list if dt_list is None else dt_list)
    if reference not in ("rotation", "fine"):
        raise ValueError("reference must be 'rotation' or 'fine'")
    tasks = [(spec, r, dts, tuple(schemes), reference) for r in range(spec.replicas)]
    results = _map(_order_task, tasks, spec.workers)
    table = {}
    for scheme in schemes:
        errs = np.array([res[scheme] for res in results])
        stats = [summarize(errs[:, i]) for i in range(len(dts))]
        means = np.array([s.mean for s in stats])
        slope = float(np.polyfit(np.log(dts), np.log(means), 1)[0])
        table[scheme] = {"dt": dts.tolist(), "error": means.tolist(),
                         "se": [s.se for s in stats], "slope": slope}
    return table


def _ito_strat_task(spec, replica, dts):
    base = WienerPath.generate(int(round(spec.stepper.T / dts[0])), spec.params.n_channels,
                               dts[0], spec.base_seed, replica)
    out = []
    for dt, p in zip(dts, base.hierarchy(len(dts))):
        vals = []
        for scheme in ("euler_maruyama_ito", "heun_stratonovich"):
            cfg = replace(spec.stepper, scheme=scheme, dt=float(dt))
            try:
                vals.append(mdl.energy(integrate(spec.params, cfg, p).final_state, spec.params))
            except IntegrationError:
                vals.append(float("nan"))
        out.append(vals)
    return out


def ito_strat_agreement(spec, dt_list=None):
    """``E Φ(u_T)`` from Euler on the Itô form versus Heun on the Stratonovich
    form, on coupled paths; the gap is estimated from paired differences."""
    dts = _check_dyadic(spec.dt_list if dt_list is None else dt_list)
    results = np.array(_map(_ito_strat_task, [(spec, r, dts) for r in range(spec.replicas)],
                            spec.workers))
    rows = []
    for i, dt in enumerate(dts):
        em, heun = results[:, i, 0], results[:, i, 1]
        good = np.isfinite(em) & np.isfinite(heun)
        if not good.any():
            raise EnsembleError(f"every replica failed at dt={dt}")
        s_em, s_h = summarize(em[good]), summarize(heun[good])
        gap = summarize(em[good] - heun[good])
        rows.append({"dt": float(dt), "euler_mean": s_em.mean, "euler_se": s_em.se,
                     "heun_mean": s_h.mean, "heun_se": s_h.se,
                     "gap": gap.mean, "gap_se": gap.se, "failed": int((~good).sum())})
    return rows
