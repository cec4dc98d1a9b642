"""Command-line front end: simulate, construct, compare, scan and presets.

Exit status is 0 on success, 1 on a domain or I/O error (including a
rejected time step) and 2 on a usage or configuration error.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analytic_aa import bifurcation_point, bifurcation_scan, envelope_range
from .analytic_ar import critical_epsilon
from .config import PROFILE_BUILDERS, build_profile, parse_config
from .diagnostics import (centers_of_mass, diagnose, extract_support, measure_speed,
                          profile_error)
from .errors import ConfigError, CrossDiffError, InvalidArgument, NotFound, StepRejected
from .fv_scheme import build_kernels, run, snapshot_rows
from .model_core import SystemState, build_grid
from .presets import get_preset, list_presets
from .profiles import profile_from_json, profile_to_json

__all__ = ["main", "cmd_simulate", "cmd_construct", "cmd_compare", "cmd_scan", "cmd_preset_run"]

log = logging.getLogger("crossdiff")

OK, DOMAIN_ERROR, USAGE_ERROR = 0, 1, 2
FORMATS = ("csv", "json")


# -- file output --------------------------------------------------------------------

def _prepare_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"cannot create output directory {path}: {err.strerror or err}") from None
    return path


def _atomic_write(path, write):
    """Write through ``write(fh)`` into a temporary file, then rename it into place.

    A failure leaves no partial file behind.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    try:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            tmp.unlink()
        except OSError:
            pass
        raise
    return path


def _write_csv(path, header, rows):
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return _atomic_write(path, write)


def _write_json(path, doc):
    return _atomic_write(path, lambda fh: (json.dump(doc, fh, indent=2, default=_jsonable),
                                           fh.write("\n")))


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _clean(value):
    """Replace non-finite floats (not valid JSON) with None."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


# -- simulate ------------------------------------------------------------------------

def _config_echo(cfg):
    return {
        "name": cfg.name, "grid": {"L": cfg.L, "N": cfg.N},
        "model": {"epsilon": cfg.epsilon,
                  "potentials": dict(zip(("W11", "W12", "W21", "W22"), map(str, cfg.potentials)))},
        "initial": dict(cfg.initial_text),
        "controls": {"t_end": cfg.t_end, "steady_tol": cfg.steady_tol, "cfl_safety": cfg.cfl_safety,
                     "dt_max": cfg.dt_max, "snapshot_every": cfg.snapshot_every,
                     "max_steps": cfg.max_steps},
        "compare": cfg.compare_text,
    }


def _speed(snaps):
    t, com = centers_of_mass(snaps, "rho")
    try:
        return measure_speed(t, com)
    except InvalidArgument:
        return None


def cmd_simulate(cfg, out_dir, formats=FORMATS, plot=True):
    """Run one configuration and write its outputs into ``out_dir``.

    Files: ``snapshots.csv`` (t, x, rho, eta) and ``summary.csv`` for csv;
    ``diagnostics.jsonl`` (one report per snapshot) and ``run.json`` for
    json; ``run.png`` unless ``plot`` is false.

    Returns
    -------
    int
        0 for a normal finish, 1 when a step was rejected.
    """
    out = _prepare_dir(out_dir)
    state0 = cfg.initial_state()
    params = cfg.params()
    status, error = OK, None
    try:
        result = run(state0, params, cfg.controls(), kernels=build_kernels(params, state0.grid),
                     max_steps=cfg.max_steps)
    except StepRejected as err:
        result, status, error = err.result, DOMAIN_ERROR, str(err)
    snaps = result.snapshots
    speed = _speed(snaps)
    reports = [diagnose(s, cfg.compare) for s in snaps]
    reports[-1].measured_speed = speed
    doc = {"config": _config_echo(cfg), "reason": result.reason, "steps": result.steps,
           "final_time": result.final.time, "error": error,
           "final": _clean(reports[-1].to_dict())}
    if cfg.compare is not None:
        doc["comparison"] = _clean(compare_state(snaps, cfg.compare))
    fields = list(reports[0].to_dict())
    if "csv" in formats:
        _write_csv(out / "snapshots.csv", ("t", "x", "rho", "eta"),
                   (row for s in snaps for row in snapshot_rows(s)))
        _write_csv(out / "summary.csv", fields,
                   ([r.to_dict()[k] if r.to_dict()[k] is not None else "" for k in fields]
                    for r in reports))
    if "json" in formats:
        _atomic_write(out / "diagnostics.jsonl",
                      lambda fh: fh.writelines(json.dumps(_clean(r.to_dict())) + "\n" for r in reports))
        _write_json(out / "run.json", doc)
    if plot:
        from .plotting import plot_run
        plot_run(snaps, out / "run.png", profile=cfg.compare, title=f"{cfg.name}: {result.reason}")
    log.info("%s: %s after %d steps at t=%g", cfg.name, result.reason, result.steps, result.final.time)
    if error:
        print(f"error: {error}", file=sys.stderr)
    return status


# -- compare -------------------------------------------------------------------------

def _support_mismatch(state, profile):
    """Largest endpoint distance between simulated and analytic supports, per species."""
    comps = profile.components()
    shift = profile.speed * state.time
    out = {}
    for species in ("rho", "eta"):
        sim = extract_support(getattr(state, species), state.grid)
        ana = [(lo + shift, hi + shift) for lo, hi in comps[species]]
        if len(sim) != len(ana):
            out[species] = {"max_endpoint_error": None, "simulated": len(sim), "analytic": len(ana)}
            continue
        # compare interval lengths and gaps, which do not depend on translation
        sim_pts = np.array([p for iv in sim for p in (iv.lo, iv.hi)])
        ana_pts = np.array([p for iv in ana for p in iv])
        offset = np.mean(sim_pts - ana_pts)
        out[species] = {"max_endpoint_error": float(np.max(np.abs(sim_pts - ana_pts - offset))),
                        "simulated": len(sim), "analytic": len(ana), "offset": float(offset)}
    return out


def compare_state(snapshots, profile):
    """Errors, support mismatch and speed mismatch of a run against ``profile``."""
    final = snapshots[-1]
    speed = _speed(snapshots)
    doc = {"time": final.time, "dx": final.grid.dx,
           "l1_error": profile_error(final, profile, "L1"),
           "linf_error": profile_error(final, profile, "Linf"),
           "support": _support_mismatch(final, profile),
           "measured_speed": speed, "analytic_speed": float(profile.speed)}
    if speed is not None:
        doc["speed_error"] = abs(speed - profile.speed)
        doc["speed_relative_error"] = (abs(speed - profile.speed) / abs(profile.speed)
                                       if profile.speed else None)
    return doc


def _load_run(run_dir):
    run_dir = Path(run_dir)
    meta = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
    grid = build_grid(meta["config"]["grid"]["L"], meta["config"]["grid"]["N"])
    data = np.loadtxt(run_dir / "snapshots.csv", delimiter=",", skiprows=1, ndmin=2)
    snaps = []
    for t in np.unique(data[:, 0]):
        block = data[data[:, 0] == t]
        if block.shape[0] != grid.N or not np.allclose(block[:, 1], grid.centers, rtol=0, atol=1e-12):
            raise InvalidArgument(f"snapshot at t={t} in {run_dir} does not match the recorded grid")
        snaps.append(SystemState(block[:, 2], block[:, 3], grid, float(t)))
    return snaps


class _SampledProfile:
    """A profile known only through samples at cell centres (from ``construct``)."""

    speed = 0.0
    family = "sampled"

    def __init__(self, x, rho, eta):
        self.x, self.rho, self.eta = x, rho, eta

    def check_grid(self, grid):
        if self.x.size != grid.N or not np.allclose(self.x, grid.centers, rtol=0, atol=1e-12):
            raise InvalidArgument(f"profile samples are on a different grid ({self.x.size} points) "
                                  f"than the simulation (N={grid.N}, L={grid.L})")


def cmd_compare(run_dir, profile_path, out_dir=None):
    """Compare a finished simulation with a constructed profile.

    ``profile_path`` is a profile document (``.json``) or sampled values
    (``.csv`` with ``x,rho,eta``) on the simulation's grid.
    """
    snaps = _load_run(run_dir)
    path = Path(profile_path)
    if path.suffix == ".csv":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        sampled = _SampledProfile(data[:, 0], data[:, 1], data[:, 2])
        final = snaps[-1]
        sampled.check_grid(final.grid)
        dx = final.grid.dx
        d = [np.abs(final.rho - sampled.rho), np.abs(final.eta - sampled.eta)]
        doc = {"time": final.time, "dx": dx, "l1_error": float((d[0].sum() + d[1].sum()) * dx),
               "linf_error": float(d[0].max() + d[1].max()), "aligned": False}
    else:
        profile = profile_from_json(path.read_text(encoding="utf-8"))
        doc = compare_state(snaps, profile)
    out = _prepare_dir(out_dir or run_dir)
    _write_json(out / "comparison.json", _clean(doc))
    print(json.dumps(_clean(doc), indent=2))
    return OK


# -- construct -----------------------------------------------------------------------

def cmd_construct(family, params, out_dir, formats=FORMATS, L=3.0, N=800, plot=True):
    """Build a closed-form profile, print its document and write it with samples."""
    profile = build_profile(family, params)
    out = _prepare_dir(out_dir)
    grid = build_grid(L, N)
    text = profile_to_json(profile, indent=2)
    if "json" in formats:
        _atomic_write(out / "profile.json", lambda fh: fh.write(text + "\n"))
    if "csv" in formats:
        rho, eta = profile.evaluate(grid.centers)
        _write_csv(out / "profile.csv", ("x", "rho", "eta"), zip(grid.centers, rho, eta))
    if plot:
        from .plotting import plot_profile
        plot_profile(profile, np.linspace(-L, L, 4 * N + 1), out / "profile.png")
    print(text)
    return OK


# -- scan ----------------------------------------------------------------------------

def _envelope_row(m1, m2, eps):
    try:
        env = envelope_range(m1, m2, eps)
        return env.p_min, env.p_max
    except NotFound:
        return math.nan, math.nan


def cmd_scan(kind, params, out_dir, formats=FORMATS, jobs=1, plot=True):
    """Tabulate a bifurcation scan, envelope curves or critical diffusivities."""
    out = _prepare_dir(out_dir)
    executor = ProcessPoolExecutor(jobs) if jobs > 1 else None
    map_fn = executor.map if executor else map
    try:
        if kind in ("bifurcation", "envelopes"):
            m1, m2 = params["m1"], params["m2"]
            lo, hi, steps = params["eps_lo"], params["eps_hi"], int(params["steps"])
            if kind == "bifurcation":
                scan = bifurcation_scan(m1, m2, (lo, hi), steps, map_fn=map_fn)
                header = ("epsilon", "batman", "second_kind", "p_min", "p_max")
                rows = [(e, int(b), int(s), pm, px) for e, b, s, pm, px in scan.rows()]
                summary = {"eps1": scan.eps1, "eps2": scan.eps2}
            else:
                grid = np.linspace(lo, hi, steps)
                res = list(map_fn(_envelope_row, [m1] * steps, [m2] * steps, grid.tolist()))
                header = ("epsilon", "p_min", "p_max")
                rows = [(float(e), pm, px) for e, (pm, px) in zip(grid, res)]
                summary = {}
        elif kind == "critical":
            m1s, m2s = params["m1_values"], params["m2_values"]
            header = ("m1", "m2", "eps_c")
            rows = [(float(a), float(b), critical_epsilon(a, b)) for a in m1s for b in m2s]
            summary = {}
        else:
            raise InvalidArgument(f"unknown scan kind {kind!r}")
    finally:
        if executor:
            executor.shutdown()
    if "csv" in formats:
        _write_csv(out / f"{kind}.csv", header, rows)
    if "json" in formats:
        _write_json(out / f"{kind}.json",
                    _clean({"kind": kind, "parameters": params, **summary,
                            "columns": list(header), "rows": [list(r) for r in rows]}))
    if plot:
        from . import plotting
        cols = np.array(rows, dtype=float).T
        if kind == "bifurcation":
            plotting.plot_scan(cols[0], cols[3], cols[4], cols[1], out / f"{kind}.png",
                               summary["eps1"], summary["eps2"])
        elif kind == "envelopes":
            plotting.plot_scan(cols[0], cols[1], cols[2], np.zeros(len(rows)), out / f"{kind}.png")
        else:
            plotting.plot_critical(cols[0] / cols[1], cols[2], out / f"{kind}.png")
    for key, val in summary.items():
        print(f"{key} = {val:.6g}")
    return OK


# -- presets ---------------------------------------------------------------------------

def cmd_preset_list():
    for p in list_presets():
        parts = []
        if p.configs:
            parts.append(f"{len(p.configs)} run{'s' if len(p.configs) > 1 else ''}")
        if p.constructs:
            parts.append(f"{len(p.constructs)} profile{'s' if len(p.constructs) > 1 else ''}")
        if p.scans:
            parts.append(f"{len(p.scans)} scan{'s' if len(p.scans) > 1 else ''}")
        tag = " [qualitative]" if p.qualitative else ""
        print(f"{p.name:22s} {p.description} ({', '.join(parts)}){tag}")
    return OK


def cmd_preset_run(name, out_dir, formats=FORMATS, jobs=1, plot=True):
    preset = get_preset(name)
    root = _prepare_dir(Path(out_dir) / name)
    status = OK
    for text in preset.configs:
        cfg = parse_config(text)
        status = max(status, cmd_simulate(cfg, root / cfg.name, formats, plot))
    for k, (family, params) in enumerate(preset.constructs, start=1):
        try:
            cmd_construct(family, params, root / f"{family}_{k}", formats, plot=plot)
        except CrossDiffError as err:
            log.error("%s %s: %s", family, params, err)
            status = DOMAIN_ERROR
    for kind, params in preset.scans:
        cmd_scan(kind, params, root / kind, formats, jobs, plot)
    return status


# -- argument parsing -----------------------------------------------------------------

def _formats_arg(text):
    vals = tuple(v.strip() for v in text.split(",") if v.strip())
    if not vals or any(v not in FORMATS for v in vals):
        raise argparse.ArgumentTypeError("format must be csv, json or csv,json")
    return vals


def build_parser():
    ap = argparse.ArgumentParser(prog="crossdiff", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--format", type=_formats_arg, default=FORMATS,
                        help="csv, json or csv,json (default: both)")
    common.add_argument("--no-plot", action="store_true", help="skip the PNG figures")
    sub = ap.add_subparsers(dest="verb", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run the finite-volume scheme")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="configuration file")
    src.add_argument("--preset", help="preset name, optionally NAME:k for its k-th run")

    con = sub.add_parser("construct", parents=[common], help="build a closed-form profile")
    con.add_argument("family", choices=sorted(PROFILE_BUILDERS))
    for flag in ("m1", "m2", "M2", "p", "m", "mL", "mR", "x0"):
        con.add_argument(f"--{flag}", type=float)
    con.add_argument("--eps", "--epsilon", dest="epsilon", type=float, required=True)
    con.add_argument("--L", type=float, default=3.0, help="half width of the sampling grid")
    con.add_argument("--N", type=int, default=800, help="cells of the sampling grid")

    cmp_ = sub.add_parser("compare", help="compare a simulation with a constructed profile")
    cmp_.add_argument("run_dir", help="output directory of 'simulate'")
    cmp_.add_argument("profile", help="profile.json or profile.csv from 'construct'")
    cmp_.add_argument("--out", default=None, help="where to write comparison.json (default: run_dir)")

    scan = sub.add_parser("scan", parents=[common], help="parameter scans")
    scan.add_argument("kind", choices=("bifurcation", "envelopes", "critical"))
    scan.add_argument("--m1", default="0.1", help="mass (critical: comma-separated list)")
    scan.add_argument("--m2", default="0.6", help="mass (critical: comma-separated list)")
    scan.add_argument("--eps-lo", type=float, default=0.5)
    scan.add_argument("--eps-hi", type=float, default=3.0)
    scan.add_argument("--steps", type=int, default=26)
    scan.add_argument("--jobs", type=int, default=1, help="worker processes")

    pre = sub.add_parser("preset", help="list or run the named experiments")
    pre_sub = pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list", help="show the presets")
    prun = pre_sub.add_parser("run", parents=[common], help="run every part of a preset")
    prun.add_argument("name")
    prun.add_argument("--jobs", type=int, default=1, help="worker processes for scans")
    return ap


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise InvalidArgument(f"expected comma-separated numbers, got {text!r}") from None


def _dispatch(args):
    plot = not getattr(args, "no_plot", False)
    if args.verb == "simulate":
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as err:
                raise OSError(f"cannot read config {args.config}: {err.strerror}") from None
        else:
            text = f"preset = {args.preset}\n"
        cfg = parse_config(text)
        return cmd_simulate(cfg, args.out, args.format, plot)
    if args.verb == "construct":
        _, required = PROFILE_BUILDERS[args.family]
        params = {k: getattr(args, k) for k in required if getattr(args, k) is not None}
        missing = [k for k in required if k not in params]
        if missing:
            raise ConfigError([(0, f"{args.family} needs --{', --'.join(missing)}")])
        return cmd_construct(args.family, params, args.out, args.format, args.L, args.N, plot)
    if args.verb == "compare":
        return cmd_compare(args.run_dir, args.profile, args.out)
    if args.verb == "scan":
        if args.kind == "critical":
            params = {"m1_values": _floats(args.m1), "m2_values": _floats(args.m2)}
        else:
            (m1,), (m2,) = _floats(args.m1), _floats(args.m2)
            params = {"m1": m1, "m2": m2, "eps_lo": args.eps_lo, "eps_hi": args.eps_hi,
                      "steps": args.steps}
        return cmd_scan(args.kind, params, args.out, args.format, args.jobs, plot)
    if args.action == "list":
        return cmd_preset_list()
    return cmd_preset_run(args.name, args.out, args.format, args.jobs, plot)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except ConfigError as err:
        for line, msg in err.problems:
            print(f"config error{f' (line {line})' if line else ''}: {msg}", file=sys.stderr)
        return USAGE_ERROR
    except CrossDiffError as err:
        print(f"error: {err}", file=sys.stderr)
        return DOMAIN_ERROR
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return DOMAIN_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
