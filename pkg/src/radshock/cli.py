"""Batch front end: ``radshock <mode> --config FILE`` or ``--key value`` flags.

Config files are flat ``key = value`` lines with ``#`` comments. Vectors are
comma separated; vector fluxes are ``;`` separated or given as ``f1``, ``f2``...

Exit codes: 0 success, 2 config error, 3 admissibility failure, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from radshock import evolution, profile, regularity, shock, system
from radshock.errors import AdmissibilityError, ConfigError, NumericalError, RadShockError
from radshock.flux import BUILTINS, builtin, parse_flux
from radshock.profile import format_number, write_atomic, write_csv

MODES = ("profile", "regularity", "system", "evolve", "verify")
EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_NUMERICAL = 0, 2, 3, 4
JUMP_HEADER = "xi0,u_left,u_right,rh_residual,oleinik_margin"
JUMP_RH_LIMIT = 1e-8

REQUIRED = {
    "profile": ("flux", "uminus", "uplus"),
    "regularity": ("flux",),
    "system": ("L", "G", "k", "uminus", "uplus"),
    "evolve": ("flux", "uminus", "uplus", "T"),
    "verify": ("flux", "uminus", "uplus", "T"),
}
DEFAULTS = {
    "eps": "1", "R": "1", "out": ".", "rtol": "1e-12", "samples": "4000",
    "nmax": "5", "M": "4096", "a": "-40", "b": "40", "snapshots": "5",
    "init": "profile",
}


@dataclass
class RunConfig:
    """Validated run parameters; ``values`` keeps every raw key."""

    mode: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        merged = dict(DEFAULTS)
        merged.update(self.values)
        self.values = merged
        if "sweep" in merged:
            # validated per job once the swept key is filled in
            return
        if self.mode == "system" and "flux" not in merged and "f1" not in merged:
            raise ConfigError("missing required key 'flux' (or f1..fn)")
        missing = [k for k in REQUIRED[self.mode] if k not in merged]
        if self.mode == "regularity" and not ({"uminus", "uplus"} <= merged.keys()
                                              or "size" in merged):
            missing.append("uminus/uplus or size")
        if missing:
            raise ConfigError(f"missing required key(s) for mode {self.mode}: {', '.join(missing)}")
        for key in ("eps", "R"):
            if not self.number(key) > 0:
                raise ConfigError(f"{key} must be positive")

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key) -> float:
        raw = self.values[key]
        try:
            x = float(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: not a number: {raw!r}") from None
        if not math.isfinite(x):
            raise ConfigError(f"key {key!r} must be finite")
        return x

    def integer(self, key) -> int:
        x = self.number(key)
        if x != int(x):
            raise ConfigError(f"key {key!r} must be an integer")
        return int(x)

    def vector(self, key) -> np.ndarray:
        raw = self.values[key]
        try:
            v = np.array([float(p) for p in str(raw).split(",")])
        except ValueError:
            raise ConfigError(f"key {key!r}: not a list of numbers: {raw!r}") from None
        if not np.all(np.isfinite(v)):
            raise ConfigError(f"key {key!r} must be finite")
        return v

    def path(self, name: str) -> str:
        out = self.values["out"]
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, name)

    def scalar_flux(self):
        expr = self.values["flux"]
        return builtin(expr) if expr in BUILTINS else parse_flux(expr)


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        values[key] = val
    return values


# {{{ modes

def _stage(module: str, op: str, fn, *args, **kwargs):
    """Run *fn*, prefixing any failure with the module and operation name."""
    try:
        return fn(*args, **kwargs)
    except RadShockError as exc:
        for cls in type(exc).__mro__:
            try:
                wrapped = cls(f"{module}.{op}: {exc}")
            except TypeError:
                continue
            raise wrapped from exc
        raise


def _scalar_profile(cfg: RunConfig):
    f = cfg.scalar_flux()
    triple = _stage("shock", "shock_speed", shock.shock_speed, f,
                    cfg.number("uminus"), cfg.number("uplus"))
    chord = _stage("shock", "build_chord", shock.build_chord, f, triple)
    prof = _stage("profile", "assemble_profile", profile.assemble_profile, chord,
                  cfg.number("eps"), cfg.number("rtol"), cfg.integer("samples"))
    return f, prof


def _check_jumps(records):
    for r in records:
        if not r["rh_residual"] < JUMP_RH_LIMIT:
            raise AdmissibilityError(f"profile.jump_checks: RH residual {r['rh_residual']:.3e}")
        if not r["oleinik_margin"] > 0:
            raise AdmissibilityError("profile.jump_checks: Oleinik margin not positive")


def _write_jumps(path, records):
    write_csv(path, JUMP_HEADER, [[r[k] for k in JUMP_HEADER.split(",")] for r in records])


def run_profile(cfg: RunConfig) -> list[str]:
    _, prof = _scalar_profile(cfg)
    records = prof.jump_records()
    out = [cfg.path("profile.csv"), cfg.path("jumps.csv")]
    prof.to_csv(out[0])
    _write_jumps(out[1], records)
    _check_jumps(records)
    return out


def run_regularity(cfg: RunConfig) -> list[str]:
    f = cfg.scalar_flux()
    if "size" in cfg.values:
        size = cfg.number("size")
        center = cfg.number("center") if "center" in cfg.values else 0.0
        um, up = center + size / 2, center - size / 2
    else:
        um, up = cfg.number("uminus"), cfg.number("uplus")
    triple = _stage("shock", "shock_speed", shock.shock_speed, f, um, up)
    chord = _stage("shock", "build_chord", shock.build_chord, f, triple)
    sf = _stage("regularity", "scaled_flux", regularity.scaled_flux, chord)
    rep = _stage("regularity", "expansion_and_thresholds",
                 regularity.expansion_and_thresholds, sf, cfg.integer("nmax"))
    path = cfg.path("regularity.txt")
    write_atomic(path, rep.to_text())
    return [path]


def _system_model(cfg: RunConfig):
    if "flux" in cfg.values:
        parts = [p.strip() for p in cfg.values["flux"].split(";")]
    else:
        parts, i = [], 1
        while f"f{i}" in cfg.values:
            parts.append(cfg.values[f"f{i}"])
            i += 1
    f = parse_flux(parts, dimension=len(parts))
    return system.SystemModel(f, cfg.vector("L"), cfg.vector("G"), cfg.number("R"),
                              cfg.number("eps"))


def run_system(cfg: RunConfig) -> list[str]:
    sysm = _system_model(cfg)
    um, up = cfg.vector("uminus"), cfg.vector("uplus")
    triple = (shock.ShockTriple(um, up, cfg.number("s")) if "s" in cfg.values
              else _stage("system", "system_speed", system.system_speed, sysm, um, up))
    k = cfg.integer("k")
    rmap = _stage("system", "build_reduction", system.build_reduction, sysm, triple, k)
    chord = _stage("shock", "build_chord", rmap.scalar_chord)
    prof = _stage("profile", "assemble_profile", profile.assemble_profile, chord,
                  rmap.scalar_epsilon, cfg.number("rtol"), cfg.integer("samples"))
    lifted = _stage("system", "lift_profile", system.lift_profile, rmap, prof)
    n = sysm.n
    header = "xi,z,dz,ddz," + ",".join(f"u{i + 1}" for i in range(n)) + ",q"
    out = [cfg.path("system_profile.csv"), cfg.path("system_report.txt")]
    write_csv(out[0], header, lifted.rows())
    lines = [f"s = {format_number(rmap.s)}", f"k = {k}",
             f"main_assumption_minus = {format_number(system.main_assumption(sysm, um, k))}",
             f"main_assumption_plus = {format_number(system.main_assumption(sysm, up, k))}",
             f"validated_w = {format_number(rmap.validated[0])}, {format_number(rmap.validated[1])}",
             f"residual_flux = {format_number(lifted.residuals[0])}",
             f"residual_elliptic = {format_number(lifted.residuals[1])}",
             f"jumps = {len(lifted.jumps)}"]
    reports = []
    for xi0, ul, ur in lifted.jumps:
        rep = _stage("system", "translate_admissibility", system.translate_admissibility,
                     rmap, (ul, ur, rmap.s))
        reports.append(rep)
        lines += [f"jump_xi0 = {format_number(xi0)}",
                  f"jump_u_left = {', '.join(format_number(x) for x in ul)}",
                  f"jump_u_right = {', '.join(format_number(x) for x in ur)}",
                  f"jump_rh_residual = {format_number(rep.rh_residual)}",
                  f"jump_lax = {rep.lax}", f"jump_liu = {rep.liu}",
                  f"jump_sign_consistent = {rep.sign_consistent}"]
    write_atomic(out[1], "\n".join(lines) + "\n")
    for rep in reports:
        if not rep.admissible:
            raise AdmissibilityError("system.translate_admissibility: inner jump not admissible")
    return out


def _grid(cfg: RunConfig, um, up):
    return evolution.Grid1D(cfg.number("a"), cfg.number("b"), cfg.integer("M"), "outflow",
                            um, up)


def run_evolve(cfg: RunConfig) -> list[str]:
    f = cfg.scalar_flux()
    um, up = cfg.number("uminus"), cfg.number("uplus")
    grid = _grid(cfg, um, up)
    x = grid.centers
    if cfg.values["init"] == "riemann":
        u0 = np.where(x < 0, um, up)
    elif cfg.values["init"] == "profile":
        _, prof = _scalar_profile(cfg)
        u0 = prof.evaluate(x)["u"]
    else:
        raise ConfigError("init must be 'riemann' or 'profile'")
    ev = evolution.Evolver(f, grid, cfg.number("eps"), "kernel")
    T = cfg.number("T")
    count = max(1, cfg.integer("snapshots"))
    snaps = [evolution.FieldState(u0)]
    state = snaps[0]
    for i in range(1, count + 1):
        state = _stage("evolution", "step", ev.run, state, T * i / count)
        snaps.append(state)
    path = cfg.path("snapshots.csv")
    evolution.write_snapshots(path, grid, snaps)
    return [path]


def run_verify(cfg: RunConfig) -> list[str]:
    f, prof = _scalar_profile(cfg)
    rep = _stage("evolution", "verify_traveling_wave", evolution.verify_traveling_wave,
                 prof, cfg.number("T"), cfg.integer("M"), cfg.number("a"), cfg.number("b"),
                 flux=f)
    path = cfg.path("drift.txt")
    write_atomic(path, rep.to_text())
    return [path]


RUNNERS = {"profile": run_profile, "regularity": run_regularity, "system": run_system,
           "evolve": run_evolve, "verify": run_verify}


def run(cfg: RunConfig) -> list[str]:
    """Run one configuration (or its sweep) and return the written paths."""
    if "sweep" in cfg.values:
        return run_sweep(cfg)
    return RUNNERS[cfg.mode](cfg)


def _run_one(args):
    mode, values = args
    return run(RunConfig(mode, values))


def run_sweep(cfg: RunConfig) -> list[str]:
    """``sweep = key: v1, v2, ...`` runs one config per value in parallel,
    each writing under ``<out>/<key>=<value>``."""
    sweep_text = cfg.values["sweep"]
    if ":" not in sweep_text:
        raise ConfigError("sweep must look like 'key: v1, v2, ...'")
    key, vals = sweep_text.split(":", 1)
    key = key.strip()
    vals = [v.strip() for v in vals.split(",") if v.strip()]
    if not vals:
        raise ConfigError("sweep has no values")
    jobs = []
    for v in vals:
        values = {k: x for k, x in cfg.values.items() if k != "sweep"}
        values[key] = v
        values["out"] = os.path.join(cfg.values["out"], f"{key}={v}")
        jobs.append((cfg.mode, values))
    workers = int(cfg.values.get("workers", min(len(jobs), os.cpu_count() or 1)))
    with ProcessPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(_run_one, jobs))
    return [p for paths in results for p in paths]

# }}}


def _parse_args(argv):
    parser = argparse.ArgumentParser(prog="radshock", description=__doc__.splitlines()[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="key = value configuration file")
    known, rest = parser.parse_known_args(argv)
    values = {}
    if known.config:
        try:
            with open(known.config, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        elif i + 1 < len(rest):
            val = rest[i + 1]
            i += 2
        else:
            raise ConfigError(f"flag --{key} needs a value")
        values[key] = val
    return known.mode, values


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        mode, values = _parse_args(argv)
        paths = run(RunConfig(mode, values))
    except ConfigError as exc:
        print(f"radshock: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(f"radshock: admissibility failure: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"radshock: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
