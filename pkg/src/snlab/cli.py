"""Command line entry point: ``snlab <command> --config <path> [--seed N] [--out DIR]``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import tempfile
import time
from dataclasses import asdict, fields

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunConfig, parse_config
from .experiments import (CertificateFailed, DistortionReport, IntervalNeverEscapes,
                          SweepSettings, basin_fraction, distortion_audit, expansion_certificate,
                          homeo_sweep, n_threads, recheck_certificate, statistical_sweep,
                          stochastic_sweep)
from .families import ParameterRangeError, verify_hypotheses
from .normal_form import FlowError, NoSolution, NormalFormField, transition_domain, transition_map
from .orbits import NoiseKernel, iterate_orbit, random_orbit
from .ulam import ConvergenceError, averaged_ulam, build_ulam, invariant_density

log = logging.getLogger("snlab")

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2
SOUNDNESS_TOL = 1e-9


class UsageError(ValueError):
    pass


def _g(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_g(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


class Output:
    """Atomic writes confined to one directory."""

    def __init__(self, root):
        self.root = os.path.abspath(root)
        os.makedirs(self.root, exist_ok=True)
        self.files = []

    def write(self, name, text):
        if os.path.basename(name) != name:
            raise ValueError(f"artifact name must be a bare file name: {name!r}")
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, os.path.join(self.root, name))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.files.append(name)


def _settings(cfg: RunConfig) -> SweepSettings:
    return SweepSettings(bins=cfg["bins"], mc_samples=cfg["mc_samples"], burn=cfg["burn"],
                         seed=cfg["seed"], quad_m=cfg["quad_m"], tol=cfg["tol"],
                         max_iter=cfg["max_iter"], symbolic_samples=cfg["symbolic_samples"],
                         max_block=cfg["max_block"])


def _field(cfg):
    return NormalFormField(cfg["alpha"], cfg["beta"], cfg["gamma"], cfg["nf_a"], cfg["nf_b"])


def _distortion_csv(rep: DistortionReport) -> str:
    names = [f.name for f in fields(rep)]
    return csv_text(names, [[getattr(rep, n) for n in names]])


# ----------------------------------------------------------------------------
# commands; each returns an exit status


def cmd_orbit(cfg, out):
    fam = cfg.family()
    if cfg["eps"] > 0:
        rec = random_orbit(fam, NoiseKernel(cfg["eps"], fam.t0), cfg["x0"], cfg["n_iter"],
                           cfg["seed"], burn=cfg["burn"])
    else:
        rec = iterate_orbit(fam, cfg["t"], cfg["x0"], cfg["n_iter"], cfg["burn"])
    idx = np.arange(len(rec)) + cfg["burn"] + 1
    out.write("orbit.csv", csv_text(("i", "x", "t_i", "log_deriv"),
                                    zip(idx, rec.points, rec.params_used, rec.log_derivs)))
    return EXIT_OK


def cmd_ulam(cfg, out):
    fam = cfg.family()
    if cfg["eps"] > 0:
        P = averaged_ulam(fam, NoiseKernel(cfg["eps"], fam.t0), cfg["bins"], cfg["quad_m"])
    else:
        P = build_ulam(fam, cfg["t"], cfg["bins"])
    status = EXIT_OK
    try:
        mu, info = invariant_density(P, cfg["tol"], cfg["max_iter"], return_info=True)
        converged = True
    except ConvergenceError as err:
        log.error("%s", err)
        mu, info, converged = err.last, {"iterations": err.iterations, "residual": err.residual}, False
        status = EXIT_INVARIANT
    out.write("ulam_density.csv", mu.to_csv())
    out.write("ulam_diagnostics.csv",
              csv_text(("iterations", "residual", "row_sum_error", "converged"),
                       [[info["iterations"], info["residual"], P.row_sum_error(), converged]]))
    return status


def cmd_transition(cfg, out):
    fld = _field(cfg)
    lo, hi = transition_domain(fld)
    xs = np.linspace(lo, hi, cfg["grid_n"])
    rows = []
    try:
        for k in cfg["k_values"]:
            for s in cfg["sigma_values"]:
                for x in xs:
                    tk = transition_map(fld, k, s, float(x))
                    ti = transition_map(fld, np.inf, s, float(x))
                    rows.append((k, s, x, tk, ti, abs(tk - ti)))
    except (FlowError, NoSolution) as err:
        log.error("transition map failed: %s", err)
        return EXIT_INVARIANT
    out.write("transition.csv", csv_text(("k", "sigma", "x", "T_k", "T_inf", "abs_err"), rows))
    return EXIT_OK


def cmd_basin(cfg, out):
    fam = cfg.family()
    frac = basin_fraction(fam, cfg["n_grid"], cfg["basin_iter"], cfg["delta"])
    out.write("basin.csv", csv_text(("family", "param", "basin_fraction"), [[fam.kind, fam.param, frac]]))
    return EXIT_OK


def cmd_distortion(cfg, out):
    try:
        rep = distortion_audit(cfg.family(), cfg["n_intervals"], cfg["interval_length"], seed=cfg["seed"])
    except IntervalNeverEscapes as err:
        log.error("%s", err)
        return EXIT_INVARIANT
    out.write("distortion.csv", _distortion_csv(rep))
    if rep.violations:
        log.error("distortion bound violated on %d intervals", rep.violations)
        return EXIT_INVARIANT
    return EXIT_OK


def _sweep(name, res, out):
    out.write(f"{name}.csv", res.to_csv())
    return EXIT_OK


def cmd_stat_sweep(cfg, out):
    return _sweep("stat_sweep", statistical_sweep(cfg.family(), cfg["t_values"], _settings(cfg)), out)


def cmd_stoch_sweep(cfg, out):
    return _sweep("stoch_sweep", stochastic_sweep(cfg.family(), cfg["eps_values"], _settings(cfg)), out)


def cmd_homeo_sweep(cfg, out):
    fam = cfg.family()
    if fam.kind != "arnold":
        raise UsageError("homeo-sweep requires family=arnold")
    modes = ("deterministic", "random") if cfg["mode"] == "both" else (cfg["mode"],)
    for mode in modes:
        values = cfg["t_values"] if mode == "deterministic" else cfg["eps_values"]
        _sweep(f"homeo_sweep_{mode}", homeo_sweep(fam, values, mode, _settings(cfg)), out)
    return EXIT_OK


def cmd_verify(cfg, out):
    fam = cfg.family()
    status = EXIT_OK
    rep = verify_hypotheses(fam)
    hyp = asdict(rep)
    hyp["immediate_basin"] = f"{rep.immediate_basin.start:.17g}+{rep.immediate_basin.length:.17g}"
    hyp["fixed_points"] = " ".join(f"{p:.17g}" for p in rep.fixed_points)
    hyp["notes"] = "; ".join(rep.notes)
    out.write("hypotheses.csv", csv_text(("key", "value"), [[k, v if v is not None else ""]
                                                           for k, v in hyp.items()]))
    if not (rep.saddle_node_ok and (rep.h1_ok or not rep.h1_applicable)):
        log.error("hypotheses fail for %s: %s", fam.kind, "; ".join(rep.notes))
        status = EXIT_INVARIANT

    rows = []
    for t in cfg["cert_t_values"]:
        try:
            n, e0 = expansion_certificate(fam, t, cfg["n_max"], cfg["cert_grid"])
        except CertificateFailed:
            rows.append((t, 0, float("nan"), float("nan"), "none"))
            continue
        except ParameterRangeError as err:
            raise UsageError(str(err)) from None
        margin = recheck_certificate(fam, t, n, e0, cfg["cert_grid"])
        sound = margin >= -SOUNDNESS_TOL
        rows.append((t, n, e0, margin, "sound" if sound else "unsound"))
        if not sound:
            log.error("certificate at t=%g contradicted by recheck (margin %g)", t, margin)
            status = EXIT_INVARIANT
    out.write("certificates.csv", csv_text(("t", "N", "e0", "recheck_margin", "status"), rows))

    if rep.source_s is not None and rep.h1_ok:
        drep = distortion_audit(fam, cfg["n_intervals"], cfg["interval_length"], seed=cfg["seed"])
        out.write("distortion.csv", _distortion_csv(drep))
        if drep.violations:
            log.error("distortion bound violated on %d intervals", drep.violations)
            status = EXIT_INVARIANT
    return status


DISPATCH = {
    "orbit": cmd_orbit, "ulam": cmd_ulam, "transition": cmd_transition, "basin": cmd_basin,
    "distortion": cmd_distortion, "stat-sweep": cmd_stat_sweep, "stoch-sweep": cmd_stoch_sweep,
    "homeo-sweep": cmd_homeo_sweep, "verify": cmd_verify,
}


def versions():
    import numba
    import scipy
    return {"snlab": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def run(cfg: RunConfig, out_dir=None) -> int:
    """Dispatch ``cfg.command`` and write its artifacts plus ``manifest.json``."""
    out = Output(out_dir if out_dir is not None else cfg["out"])
    out.write("config.effective", cfg.echo())
    start = time.perf_counter()
    try:
        status = DISPATCH[cfg.command](cfg, out)
    except (UsageError, ParameterRangeError) as err:
        log.error("usage error: %s", err)
        status = EXIT_USAGE
    wall = time.perf_counter() - start
    manifest = {
        "command": cfg.command,
        "seed": cfg["seed"],
        "exit_status": status,
        "config": cfg.echo(),
        "versions": versions(),
        "threads": n_threads(),
        "wall_time_s": wall,
        "artifacts": list(out.files),
    }
    out.write("manifest.json", json.dumps(manifest, indent=2) + "\n")
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="snlab", description="Saddle-node unfolding experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int, help="master seed, overrides the config")
    p.add_argument("--out", help="output directory, overrides the config")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as err:
            log.error("cannot read config: %s", err)
            return EXIT_USAGE
    overrides = {}
    if args.seed is not None:
        if args.seed < 0:
            log.error("--seed must be >= 0")
            return EXIT_USAGE
        overrides["seed"] = args.seed
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as err:
        log.error("%s: %s", args.config, err)
        return EXIT_USAGE
    if _explicit_command(text) not in (None, args.command):
        log.error("config command %r does not match %r", cfg.command, args.command)
        return EXIT_USAGE
    cfg = RunConfig(args.command, {**cfg.values, "command": args.command})
    return run(cfg, args.out)


def _explicit_command(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line.startswith("command") and "=" in line and line.split("=", 1)[0].strip() == "command":
            return line.split("=", 1)[1].strip()
    return None


if __name__ == "__main__":
    sys.exit(main())
