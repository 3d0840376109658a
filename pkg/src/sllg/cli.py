"""``sllg simulate|ensemble|study|verify --config PATH [overrides]``.

Exit status 0 on success, 1 when a run or check fails, 2 for bad input.
Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import io
from .config import ConfigError, parse_config, validate_config
from .diagnostics import Observer, weak_residual_terms
from .ensemble import (EnsembleError, ito_strat_agreement, n_uniformity_study, order_study,
                       run_ensemble)
from .integrators import SCHEMES, IntegrationError, integrate
from .verify import run_suite
from .wiener import WienerPath


def _simulate(cfg, out):
    m = cfg.build_params()
    stepper = cfg.build_stepper()
    dg = cfg.diagnostics
    path = WienerPath.generate(stepper.n_steps, m.n_channels, stepper.dt, cfg.ensemble.base_seed, 0)
    psis = cfg.build_test_functions()
    rec = integrate(m, stepper, path, Observer(dg.beta, dg.stride, dg.snapshot_stride),
                    keep_states=bool(psis))
    io.write_timeseries(out / "timeseries.csv", rec)
    io.write_snapshots(out / "snapshots.bin", rec.snapshot_times, rec.snapshots)
    files = ["timeseries.csv", "snapshots.bin"]
    if psis:
        rows = []
        for psi in psis:
            t = weak_residual_terms(rec.states, path, psi, m)
            rows.append((psi.mode, *psi.vector, t["lhs"], t["rhs"], abs(t["residual"])))
        io.write_csv(out / "weak_residual.csv",
                     ("mode", "v0", "v1", "v2", "lhs", "rhs", "residual"), rows)
        files.append("weak_residual.csv")
    print(f"simulate: {stepper.n_steps} steps, final energy {rec.rows[-1][3]:.6g}")
    return files, [rec.seed], {}


def _summary_rows(summary):
    return [(name, s.mean, s.se, s.min, s.max, s.count) for name, s in summary.stats.items()]


SUMMARY_HEADER = ("functional", "mean", "se", "min", "max", "count")


def _ensemble(cfg, out):
    spec = cfg.build_ensemble()
    summary = run_ensemble(spec, retries=0)
    io.write_csv(out / "summary.csv", SUMMARY_HEADER, _summary_rows(summary))
    names = list(summary.stats)
    io.write_csv(out / "replicas.csv", ("replica", "dt", *names),
                 [(r["replica"], r["dt"], *(r["values"][k] for k in names)) for r in summary.replicas])
    io.write_snapshots(out / "final_states.bin",
                       [spec.stepper.T] * len(summary.replicas),
                       [r["final_state"] for r in summary.replicas])
    seeds = [r["seed"] for r in summary.replicas] + [f["seed"] for f in summary.failures]
    seeds.sort(key=lambda s: s["replica"])
    print(f"ensemble: {len(summary.replicas)} replicas completed, {len(summary.failures)} failed")
    for f in summary.failures:
        print(f"  failed replica {f['replica']} (seed {f['seed']['base_seed']})")
    return (["summary.csv", "replicas.csv", "final_states.bin"], seeds,
            {"failures": summary.failures})


def _study(cfg, out):
    spec = cfg.build_ensemble()
    kind = cfg.ensemble.study
    seeds = [{"base_seed": spec.base_seed, "replica": r} for r in range(spec.replicas)]
    if kind == "n_uniformity":
        res = n_uniformity_study(spec, retries=cfg.ensemble.retries)
        rows = [(r["n_modes"], *row) for r in res["rows"] for row in _summary_rows(r["summary"])]
        io.write_csv(out / "n_uniformity.csv", ("n_modes", *SUMMARY_HEADER), rows)
        return ["n_uniformity.csv"], seeds, {"trend": res["trend"]}
    if kind == "order_study":
        table = order_study(spec, reference=cfg.ensemble.reference)
        io.write_csv(out / "order_study.csv", ("scheme", "dt", "error", "se"),
                     [(s, dt, e, se) for s, t in table.items()
                      for dt, e, se in zip(t["dt"], t["error"], t["se"])])
        io.write_csv(out / "order_slopes.csv", ("scheme", "slope"),
                     [(s, t["slope"]) for s, t in table.items()])
        for s, t in table.items():
            print(f"{s}: slope {t['slope']:.3f}")
        return ["order_study.csv", "order_slopes.csv"], seeds, {}
    if kind == "ito_strat":
        rows = ito_strat_agreement(spec)
        header = tuple(rows[0])
        io.write_csv(out / "ito_strat.csv", header, [tuple(r[k] for k in header) for r in rows])
        return ["ito_strat.csv"], seeds, {}
    raise ConfigError("ensemble.study must name a study (n_uniformity, order_study, ito_strat)")


def _verify(cfg, out):
    results = run_suite(cfg.build_params(), seed=cfg.ensemble.base_seed)
    for r in results:
        print(r.line())
    io.write_csv(out / "verify.csv", ("check", "worst", "tol", "passed"),
                 [(r.name, r.worst, r.tol, r.passed) for r in results])
    failed = [r.name for r in results if not r.passed]
    return ["verify.csv"], [], {"failed_checks": failed}


COMMANDS = {"simulate": _simulate, "ensemble": _ensemble, "study": _study, "verify": _verify}


def build_parser():
    p = argparse.ArgumentParser(prog="sllg", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config file; omitted means all defaults")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--dt", type=float)
    p.add_argument("--n-modes", type=int, dest="n_modes")
    return p


def _error(kind, message, code):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else validate_config({})
        cfg = cfg.with_overrides(args.seed, args.out, args.scheme, args.dt, args.n_modes)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        files, seeds, extra = COMMANDS[args.command](cfg, out)
        io.write_manifest(out, cfg, files, seeds, time.perf_counter() - start,
                          {"command": args.command, **extra})
    except ConfigError as exc:
        return _error("config", str(exc), 2)
    except (IntegrationError, EnsembleError) as exc:
        return _error(type(exc).__name__, str(exc), 1)
    except ValueError as exc:
        return _error("value", str(exc), 2)
    if extra.get("failed_checks"):
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
