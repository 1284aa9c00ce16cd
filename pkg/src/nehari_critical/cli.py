"""Batch front end.

Usage::

    nehari-critical <command> --config <path> [--out <dir>] [--seed N]

Every command writes ``report.json`` into the output directory; ``solve`` and
``classify`` also write ``profiles.csv``, ``verify`` and ``competitor`` write
``sweep.csv``. Exit codes: 0 success, 1 bad config or usage, 2 hypothesis
failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import algebra, bubbles, estimates, nehari
from .config import ConfigError, ExperimentConfig, build_spec, load_config
from .errors import HypothesisError, NehariError, NumericalError

SCHEMA_VERSION = 1
COMMANDS = ("thresholds", "fmax", "solve", "verify", "competitor", "limit-levels", "classify")

log = logging.getLogger("nehari_critical")


def _clean(obj):
    """JSON-ready copy: numpy scalars and arrays to Python, non-finite to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _solver_options(cfg: ExperimentConfig) -> nehari.SolverOptions:
    return nehari.SolverOptions(step=cfg.step, tol=cfg.tol, max_iter=cfg.max_iter,
                                restarts=cfg.restarts, seed=cfg.seed)


def _estimate_options(cfg: ExperimentConfig) -> estimates.EstimateOptions:
    return estimates.EstimateOptions(rho=cfg.rho, eps_list=cfg.eps, seed=cfg.seed)


def _write_profiles(path: Path, grid, state) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r"] + [f"u{i + 1}" for i in range(state.shape[0])])
        for k, r in enumerate(grid.nodes):
            w.writerow([repr(float(r))] + [repr(float(x)) for x in state[:, k]])


def _write_sweep(path: Path, entries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "upper_bound", "target", "satisfied", "gamma", "kind"])
        for e in entries:
            w.writerow([repr(float(e.eps)), repr(float(e.upper_bound)), repr(float(e.target)),
                        str(bool(e.satisfied)).lower(),
                        " ".join(str(h) for h in e.gamma), e.kind])


# ------------------------------------------------------------------- commands

def cmd_thresholds(cfg, spec, out):
    th = estimates.compute_thresholds(spec, _estimate_options(cfg))
    hyp = estimates.check_hypotheses(spec, "Thm1_1", thresholds=th)
    return {"thresholds": th.to_dict(), "hypotheses": hyp.to_dict()}


def cmd_fmax(cfg, spec, out):
    groups = []
    for h in range(spec.m):
        res = algebra.fmax(spec.sub_block(h))
        groups.append({
            "group": h,
            "components": list(spec.decomp.groups[h]),
            "f_max": res.f_max,
            "maximizers": [x.tolist() for x in res.maximizers],
            "degenerate": res.degenerate,
            "has_zero_components": res.has_zero_components,
        })
    full = algebra.fmax(spec.B)
    return {"groups": groups, "full_matrix": {"f_max": full.f_max,
                                              "maximizers": [x.tolist() for x in full.maximizers]}}


def _level_context(spec, gamma):
    St2 = bubbles.sobolev_tilde_sq()
    out = {"C_bar": estimates.c_bar(spec, St2)}
    try:
        out["l_h"] = [bubbles.subsystem_level(spec.sub_block(h)) for h in gamma]
        out["l_sum"] = float(sum(out["l_h"]))
    except HypothesisError:
        pass
    return out


def cmd_solve(cfg, spec, out):
    gamma = cfg.gamma or spec.all_groups()
    res = nehari.minimize(spec, gamma, _solver_options(cfg))
    _write_profiles(out / "profiles.csv", spec.grid, res.state)
    return {"minimizer": res.summary(), "bounds": _level_context(spec, gamma)}


def cmd_classify(cfg, spec, out):
    gamma = cfg.gamma or spec.all_groups()
    res = nehari.minimize(spec, gamma, _solver_options(cfg))
    _write_profiles(out / "profiles.csv", spec.grid, res.state)
    reports = [nehari.classify_minimizer(spec, res, h).summary() for h in gamma]
    return {"minimizer": res.summary(), "classification": reports}


def _proper_minimizers(cfg, spec):
    found, skipped = {}, []
    opts = _solver_options(cfg)
    for k in range(1, spec.m):
        for G in itertools.combinations(range(spec.m), k):
            try:
                found[G] = nehari.minimize(spec, G, opts)
            except NumericalError as exc:
                skipped.append({"gamma": list(G), "reason": str(exc)})
    return found, skipped


def cmd_verify(cfg, spec, out):
    minimizers, skipped = _proper_minimizers(cfg, spec) if cfg.mixed else ({}, [])
    try:
        report = estimates.verify_energy_estimates(spec, _estimate_options(cfg),
                                                   minimizers=minimizers, mixed=cfg.mixed)
    except NumericalError as exc:
        rep = getattr(exc, "report", None)
        if rep is not None:
            _write_sweep(out / "sweep.csv", rep.entries)
        raise
    _write_sweep(out / "sweep.csv", report.entries)
    return {
        "verification": report.to_dict(),
        "sub_levels": {" ".join(map(str, G)): r.summary() for G, r in sorted(minimizers.items())},
        "skipped_sub_levels": skipped,
    }


def cmd_competitor(cfg, spec, out):
    gamma = cfg.gamma or spec.all_groups()
    opts = _estimate_options(cfg)
    R = spec.grid.radius
    rho = opts.rho if opts.rho is not None else estimates.default_rho(spec.m, R)
    eps_list = opts.eps_list or tuple(rho * 2.0 ** (-j) for j in range(2, 9))
    entries = [estimates.competitor_disjoint(spec, e, cutoff_radius=rho, gamma=gamma)
               for e in sorted(eps_list, reverse=True)]
    _write_sweep(out / "sweep.csv", entries)
    return {"rho": rho, "competitors": [e.to_dict() for e in entries],
            "any_satisfied": any(e.satisfied for e in entries)}


def cmd_limit_levels(cfg, spec, out):
    lim = bubbles.limit_level(spec.B, spec.decomp)
    return {"l_h": list(lim.l_h), "l_total": lim.l_total, "attained": lim.attained,
            "marker": lim.marker, "S_tilde_sq": bubbles.sobolev_tilde_sq()}


HANDLERS = {
    "thresholds": cmd_thresholds,
    "fmax": cmd_fmax,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "competitor": cmd_competitor,
    "limit-levels": cmd_limit_levels,
    "classify": cmd_classify,
}


def run(command: str, cfg: ExperimentConfig, out_dir=None) -> tuple[int, dict]:
    """Run one command, write its artifacts and return (exit code, report)."""
    out = Path(out_dir if out_dir is not None else cfg.dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg.to_dict(),
        "config_text": cfg.to_text(),
        "provenance": dict(sorted(cfg.provenance.items())),
        "seed": cfg.seed,
    }
    start = time.perf_counter()
    code = 0
    try:
        spec = build_spec(cfg)
        report["results"] = HANDLERS[command](cfg, spec, out)
        report["status"] = "ok"
    except NehariError as exc:
        code = 1 if isinstance(exc, ConfigError) else 2 if isinstance(exc, HypothesisError) else 3
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        partial = getattr(exc, "result", None) or getattr(exc, "report", None)
        if partial is not None:
            report["partial"] = partial.summary() if hasattr(partial, "summary") else partial.to_dict()
    report["timings"] = {"total_seconds": time.perf_counter() - start}
    with open(out / "report.json", "w") as fh:
        json.dump(_clean(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return code, report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nehari-critical",
                                description="Critical Schrodinger systems on a ball in R^4.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="path to the experiment config")
    p.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, default=None, help="override [solver] seed")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    code, report = run(args.command, cfg, args.out)
    if code:
        print(f"error ({report['error']['type']}): {report['error']['message']}", file=sys.stderr)
    else:
        log.info("%s finished in %.2f s", args.command, report["timings"]["total_seconds"])
    return code


if __name__ == "__main__":
    sys.exit(main())
