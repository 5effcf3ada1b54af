"""Command-line front end: config handling, orchestration, reports.

Subcommands
-----------

* ``mass``    — classical and Einstein-tensor mass of a flat-type metric
* ``center``  — both center-of-mass versions (needs nonvanishing mass)
* ``ah-mass`` — hyperbolic charges over the kernel basis
* ``verify``  — pohozaev / kernel / equivalence checks
* ``sweep``   — per-radius normalized flux series as plot-ready CSV

Runs are driven by an INI config file; every command-line flag overrides the
corresponding config key.  Reports are JSON (``schema_version`` 1, keys
sorted, timings removable with ``--no-timings`` so identical runs are
byte-identical) plus one CSV per charge with header
``r,raw_flux,normalized,quad_error`` at 17 significant digits.

Exit codes: 0 all charges/checks succeeded, 1 computation or verification
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import charges as charges_mod
from . import verify as verify_mod
from .catalog import MetricSpec
from .errors import AsymfluxError, ConfigError
from .fields import killing_basis
from .geometry import ChartKind
from .limits import RadialSeries, decay_rate
from .quadrature import sphere_rule, thread_count

__all__ = ["main", "RunConfig", "load_config", "config_from_echo"]

SCHEMA_VERSION = 1
_FMT = "%.17g"


@dataclass
class RunConfig:
    """Fully resolved run parameters (config file plus flag overrides)."""

    kind: str = "euclidean"
    n: int = 3
    m: float = 0.0
    center: tuple = ()
    components: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    chart: str | None = None
    schedule_start: float | None = None
    schedule_ratio: float = 2.0
    schedule_step: float = 0.75
    schedule_kind: str | None = None      # "geometric" | "arithmetic"
    schedule_count: int = 5
    degree: int = 16
    radial_degree: int = 16
    rel_tol: float = 1e-6
    annulus: tuple = ()
    seed: int = 0
    out_json: str | None = None
    csv_dir: str | None = None
    no_timings: bool = False
    threads: int | None = None

    def validate(self):
        if self.schedule_count < 3:
            raise ConfigError("schedule count must be at least 3")
        if not 1 <= self.degree <= 60:
            raise ConfigError(f"quadrature degree out of range: {self.degree}")
        return self


_SECTIONS = {
    "metric": {"kind": str, "n": int, "m": float, "center": "floats",
               "chart": str},
    "schedule": {"start": float, "ratio": float, "step": float,
                 "kind": str, "count": int},
    "quadrature": {"degree": int, "radial_degree": int},
    "run": {"rel_tol": float, "annulus": "floats", "seed": int,
            "out_json": str, "csv_dir": str, "no_timings": bool,
            "threads": int},
}

_KEYMAP = {("schedule", k): f"schedule_{k}"
           for k in ("start", "ratio", "step", "kind", "count")}


def _convert(section, key, raw):
    typ = _SECTIONS[section][key]
    try:
        if typ == "floats":
            return tuple(float(t) for t in raw.replace(",", " ").split())
        if typ is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(
            f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Read an INI config file and apply command-line overrides."""
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        for section in parser.sections():
            if section in ("components", "params"):
                target = cfg.components if section == "components" else cfg.params
                for key, raw in parser.items(section):
                    if section == "params":
                        target[key] = _convert("metric", "m", raw)  # float
                    else:
                        target[key] = raw
                continue
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                attr = _KEYMAP.get((section, key), key)
                setattr(cfg, attr, _convert(section, key, raw))
    for attr, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, attr, value)
    return cfg.validate()


def config_echo(cfg: RunConfig) -> dict:
    """Flat dictionary echo of the config, embedded into every report."""
    echo = asdict(cfg)
    echo["center"] = list(cfg.center)
    echo["annulus"] = list(cfg.annulus)
    return echo


def config_from_echo(echo: dict) -> RunConfig:
    """Rebuild a RunConfig from a report's config echo (round-trip contract)."""
    data = dict(echo)
    data["center"] = tuple(data.get("center", ()))
    data["annulus"] = tuple(data.get("annulus", ()))
    return RunConfig(**data).validate()


def build_spec(cfg: RunConfig) -> MetricSpec:
    components = None
    if cfg.components:
        components = {}
        for key, text in cfg.components.items():
            name = key.lower().removeprefix("g_").replace("_", "")
            if len(name) != 2 or not name.isdigit():
                raise ConfigError(f"bad component key {key!r}; use g_i_j")
            i, j = int(name[0]) - 1, int(name[1]) - 1
            if not (0 <= i <= j < cfg.n):
                raise ConfigError(f"component indices out of range in {key!r}")
            components[(i, j)] = text
    try:
        return MetricSpec(cfg.kind, cfg.n, m=cfg.m, center=tuple(cfg.center),
                          components=components,
                          params=dict(cfg.params) or None, chart=cfg.chart)
    except (ValueError, AsymfluxError) as exc:
        raise ConfigError(str(exc)) from exc


def schedule_radii(cfg: RunConfig, spec: MetricSpec):
    """Radius schedule in chart coordinates plus the natural radius used to fit.

    Flat charts default to a geometric schedule ``8 * 2^k``; hyperbolic charts
    to an arithmetic geodesic schedule ``3 + 0.75 k`` (converted to the area
    radius where the chart needs it).
    """
    flat = spec.is_flat_type
    start = cfg.schedule_start if cfg.schedule_start is not None \
        else (8.0 if flat else 3.0)
    kind = cfg.schedule_kind or ("geometric" if flat else "arithmetic")
    k = np.arange(cfg.schedule_count, dtype=float)
    if kind == "geometric":
        natural = start * cfg.schedule_ratio ** k
    elif kind == "arithmetic":
        natural = start + cfg.schedule_step * k
    else:
        raise ConfigError(f"unknown schedule kind {kind!r}")
    if spec.chart_kind == ChartKind.POLAR_AREA:
        return np.sinh(natural), natural
    return natural, natural


# ------------------------------------------------------------------ reporting

def _series_entry(charge_id: str, series: RadialSeries) -> dict:
    return {
        "id": charge_id,
        "samples": [{"r": s.r, "raw_flux": s.raw_flux,
                     "normalized": s.normalized, "quad_error": s.quad_error}
                    for s in series.samples],
        "limit": series.limit,
        "limit_error": series.limit_error,
        "model": series.model,
    }


def _write_csv(path: Path, series: RadialSeries):
    lines = ["r,raw_flux,normalized,quad_error"]
    for s in series.samples:
        lines.append(",".join(_FMT % v for v in
                              (s.r, s.raw_flux, s.normalized, s.quad_error)))
    path.write_text("\n".join(lines) + "\n")


class _Json(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, (np.bool_,)):
            return bool(o)
        return super().default(o)


def _emit(report: dict, cfg: RunConfig, timings: dict):
    if not cfg.no_timings:
        report["diagnostics"]["timings"] = timings
    text = json.dumps(report, sort_keys=True, indent=2, cls=_Json)
    if cfg.out_json:
        Path(cfg.out_json).write_text(text + "\n")
    else:
        print(text)
    if cfg.csv_dir:
        outdir = Path(cfg.csv_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for entry in report.get("charges", []):
            series = RadialSeries(
                [charges_mod.FluxSample(s["r"], s["raw_flux"], s["normalized"],
                                        s["quad_error"])
                 for s in entry["samples"]],
                entry["limit"], entry["limit_error"], entry["model"])
            _write_csv(outdir / f"{entry['id']}.csv", series)


def _base_report(cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": config_echo(cfg),
            "charges": [], "diagnostics": {}, "verdicts": []}


# ------------------------------------------------------------------- commands

def cmd_mass(cfg: RunConfig) -> tuple[dict, int]:
    spec = build_spec(cfg)
    radii, natural = schedule_radii(cfg, spec)
    rule = sphere_rule(spec.n, cfg.degree)
    report = _base_report(cfg)
    t0 = time.perf_counter()
    cls = charges_mod.classical_mass(spec, radii, rule, nthreads=cfg.threads)
    ric = charges_mod.ricci_mass(spec, radii, rule, nthreads=cfg.threads)
    timings = {"total_s": time.perf_counter() - t0}
    report["charges"] = [_series_entry("mass_classical", cls),
                         _series_entry("mass_ricci", ric)]
    diff = abs(cls.limit - ric.limit)
    budget = max(10.0 * (cls.limit_error + ric.limit_error),
                 cfg.rel_tol * max(abs(cls.limit), abs(ric.limit), 1.0))
    ok = diff <= budget
    report["verdicts"] = [{"id": "mass_agreement", "passed": bool(ok),
                           "difference": diff, "budget": budget}]
    decay = decay_rate(spec, radii)
    report["diagnostics"].update(tau_hat=decay.tau_hat,
                                 tau_threshold=decay.threshold,
                                 tau_ok=decay.satisfied)
    return _finish(report, cfg, timings, ok)


def cmd_center(cfg: RunConfig) -> tuple[dict, int]:
    spec = build_spec(cfg)
    radii, _ = schedule_radii(cfg, spec)
    rule = sphere_rule(spec.n, cfg.degree)
    report = _base_report(cfg)
    t0 = time.perf_counter()
    mass_series = charges_mod.classical_mass(spec, radii, rule,
                                             nthreads=cfg.threads)
    mass = mass_series.limit
    report["charges"].append(_series_entry("mass_classical", mass_series))
    ok = True
    for a in range(spec.n):
        cc = charges_mod.classical_center(spec, a, radii, rule, mass,
                                          nthreads=cfg.threads)
        rc = charges_mod.ricci_center(spec, a, radii, rule, mass,
                                      nthreads=cfg.threads)
        report["charges"] += [_series_entry(f"center_classical_{a}", cc),
                              _series_entry(f"center_ricci_{a}", rc)]
        diff = abs(cc.limit - rc.limit)
        budget = max(10.0 * (cc.limit_error + rc.limit_error), cfg.rel_tol)
        good = diff <= budget
        ok = ok and good
        report["verdicts"].append({"id": f"center_agreement_{a}",
                                   "passed": bool(good), "difference": diff,
                                   "budget": budget})
    rt = charges_mod.rt_diagnostics(spec, radii, rule)
    report["diagnostics"].update(rt_exponent=rt.exponent,
                                 rt_expected=rt.expected, rt_status=rt.status)
    timings = {"total_s": time.perf_counter() - t0}
    return _finish(report, cfg, timings, ok)


def cmd_ah_mass(cfg: RunConfig, kernel: str | None = None) -> tuple[dict, int]:
    spec = build_spec(cfg)
    radii, _ = schedule_radii(cfg, spec)
    rule = sphere_rule(spec.n, cfg.degree)
    report = _base_report(cfg)
    indices = range(spec.n + 1)
    if kernel is not None:
        if kernel == "V0":
            indices = [0]
        elif kernel.startswith("V") and kernel[1:].isdigit():
            indices = [int(kernel[1:])]
        else:
            raise ConfigError(f"unknown kernel selector {kernel!r}")
    t0 = time.perf_counter()
    ok = True
    for i in indices:
        am = charges_mod.ah_mass(spec, i, radii, rule, nthreads=cfg.threads)
        ar = charges_mod.ah_ricci_charge(spec, i, radii, rule,
                                         nthreads=cfg.threads)
        report["charges"] += [_series_entry(f"ah_mass_{i}", am),
                              _series_entry(f"ah_ricci_{i}", ar)]
        diff = abs(am.limit - ar.limit)
        budget = max(10.0 * (am.limit_error + ar.limit_error), cfg.rel_tol)
        good = diff <= budget
        ok = ok and good
        report["verdicts"].append({"id": f"ah_agreement_{i}",
                                   "passed": bool(good), "difference": diff,
                                   "budget": budget})
    timings = {"total_s": time.perf_counter() - t0}
    decay = decay_rate(spec, radii)
    report["diagnostics"].update(tau_hat=decay.tau_hat,
                                 tau_threshold=decay.threshold,
                                 tau_ok=decay.satisfied)
    return _finish(report, cfg, timings, ok)


def cmd_verify(cfg: RunConfig, which: str) -> tuple[dict, int]:
    spec = build_spec(cfg)
    rule = sphere_rule(spec.n, cfg.degree)
    report = _base_report(cfg)
    t0 = time.perf_counter()
    ok = True
    if which == "pohozaev":
        if cfg.annulus:
            r0, r1 = cfg.annulus
        else:
            r0, r1 = (8.0, 16.0) if spec.is_flat_type else (1.0, 2.0)
            if spec.chart_kind == ChartKind.POLAR_AREA and not cfg.annulus:
                r0, r1 = np.sinh(r0), np.sinh(r1)
        for X in killing_basis(spec.n, spec.chart_kind):
            rep = verify_mod.pohozaev_check(spec, X, r0, r1, rule,
                                            cfg.radial_degree,
                                            rel_tol=cfg.rel_tol,
                                            nthreads=cfg.threads)
            ok = ok and rep.passed
            report["verdicts"].append(
                {"id": rep.check_id, "passed": rep.passed, "lhs": rep.lhs,
                 "rhs": rep.rhs, "residual": rep.residual,
                 "relative_residual": rep.relative_residual,
                 "context": rep.context})
    elif which == "kernel":
        for X in killing_basis(spec.n, spec.chart_kind):
            rep = verify_mod.kernel_check_lemma22(spec, X, seed=cfg.seed)
            ok = ok and rep.passed
            report["verdicts"].append(
                {"id": rep.check_id, "passed": rep.passed,
                 "max_residual": rep.max_residual,
                 "trace_residual": rep.trace_residual,
                 "einstein_defect": rep.einstein_defect})
    elif which == "equivalence":
        radii, _ = schedule_radii(cfg, spec)
        rep = verify_mod.equivalence_report(spec, radii, rule,
                                            nthreads=cfg.threads)
        ok = rep.passed
        report["diagnostics"].update(rep.diagnostics)
        for row in rep.rows:
            report["verdicts"].append(
                {"id": f"equivalence:{row.charge}", "passed": row.passed,
                 "classical": row.classical, "ricci": row.ricci,
                 "difference": row.difference,
                 "warnings": list(row.warnings)})
    else:
        raise ConfigError(f"unknown verify target {which!r}")
    timings = {"total_s": time.perf_counter() - t0}
    return _finish(report, cfg, timings, ok)


def cmd_sweep(cfg: RunConfig) -> tuple[dict, int]:
    spec = build_spec(cfg)
    radii, _ = schedule_radii(cfg, spec)
    rule = sphere_rule(spec.n, cfg.degree)
    report = _base_report(cfg)
    t0 = time.perf_counter()
    if spec.is_flat_type:
        entries = [("mass_classical",
                    charges_mod.classical_mass(spec, radii, rule,
                                               nthreads=cfg.threads)),
                   ("mass_ricci",
                    charges_mod.ricci_mass(spec, radii, rule,
                                           nthreads=cfg.threads))]
    else:
        entries = [("ah_mass_0",
                    charges_mod.ah_mass(spec, 0, radii, rule,
                                        nthreads=cfg.threads)),
                   ("ah_ricci_0",
                    charges_mod.ah_ricci_charge(spec, 0, radii, rule,
                                                nthreads=cfg.threads))]
    report["charges"] = [_series_entry(cid, s) for cid, s in entries]
    report["verdicts"] = [{"id": "sweep", "passed": True}]
    timings = {"total_s": time.perf_counter() - t0}
    return _finish(report, cfg, timings, True)


def _finish(report, cfg, timings, ok):
    _emit(report, cfg, timings)
    return report, (0 if ok else 1)


# ----------------------------------------------------------------- arg parsing

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--kind", dest="kind", default=None, help="catalog metric kind")
    p.add_argument("--n", dest="n", type=int, default=None)
    p.add_argument("--m", dest="m", type=float, default=None)
    p.add_argument("--center", dest="center", default=None,
                   help="comma-separated translation of the center")
    p.add_argument("--start", dest="schedule_start", type=float, default=None)
    p.add_argument("--ratio", dest="schedule_ratio", type=float, default=None)
    p.add_argument("--step", dest="schedule_step", type=float, default=None)
    p.add_argument("--schedule", dest="schedule_kind", default=None,
                   choices=["geometric", "arithmetic"])
    p.add_argument("--count", dest="schedule_count", type=int, default=None)
    p.add_argument("--degree", dest="degree", type=int, default=None)
    p.add_argument("--radial-degree", dest="radial_degree", type=int,
                   default=None)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    p.add_argument("--seed", dest="seed", type=int, default=None)
    p.add_argument("--out-json", dest="out_json", default=None)
    p.add_argument("--csv-dir", dest="csv_dir", default=None)
    p.add_argument("--no-timings", dest="no_timings", action="store_true",
                   default=None)
    p.add_argument("--threads", dest="threads", type=int, default=None)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="asymflux",
        description="Asymptotic invariants of asymptotically flat and "
                    "hyperbolic metrics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("mass", "center", "ah-mass", "verify", "sweep"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "ah-mass":
            p.add_argument("--kernel", default=None,
                           help="kernel selector, e.g. V0 or V2")
        if name == "verify":
            p.add_argument("--which", required=True,
                           choices=["pohozaev", "kernel", "equivalence"])
            p.add_argument("--annulus", default=None,
                           help="r0,r1 for the pohozaev annulus")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "kernel", "which",
                              "annulus")}
    if overrides.get("center") is not None:
        overrides["center"] = tuple(
            float(t) for t in overrides["center"].replace(",", " ").split())
    try:
        cfg = load_config(args.config, overrides)
        if getattr(args, "annulus", None):
            parts = [float(t) for t in args.annulus.replace(",", " ").split()]
            if len(parts) != 2:
                raise ConfigError("--annulus expects r0,r1")
            cfg.annulus = tuple(parts)
        if args.command == "mass":
            _, code = cmd_mass(cfg)
        elif args.command == "center":
            _, code = cmd_center(cfg)
        elif args.command == "ah-mass":
            _, code = cmd_ah_mass(cfg, args.kernel)
        elif args.command == "verify":
            _, code = cmd_verify(cfg, args.which)
        else:
            _, code = cmd_sweep(cfg)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AsymfluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
