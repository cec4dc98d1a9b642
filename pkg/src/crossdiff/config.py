"""Run configuration: a small ``section.key = value`` text format.

Example::

    # Batman steady state
    grid.L = 3
    grid.N = 800
    model.system = attractive_attractive
    model.epsilon = 0.12
    initial.rho = indicator(-0.5, 0, 0.6)
    initial.eta = indicator(0, 0.5, 0.1)
    controls.t_end = 40
    compare.profile = batman(m1=0.6, m2=0.1, epsilon=0.12)

A line ``preset = NAME`` (or ``NAME:k`` for the k-th run of a multi-run
preset) loads that preset first; later lines override it.

Initial data is either a sum of ``indicator(a, b, mass)`` and
``constant(a, b, value)`` terms joined by ``+``, or one closed-form profile
such as ``two_pulse(m=1, epsilon=0.6667, x0=3, shift=-6)`` whose matching
species is projected onto the grid.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from . import analytic_aa, analytic_ar
from .errors import ConfigError, CrossDiffError, InvalidArgument
from .fv_scheme import StepControls
from .model_core import (ClosedForm, ModelParams, PiecewiseConstant, PotentialSpec,
                         SystemState, build_grid, project_initial_data)

__all__ = ["RunConfig", "parse_config", "parse_call", "build_profile", "parse_density",
           "PROFILE_BUILDERS", "SYSTEMS"]

SYSTEMS = {
    "attractive_attractive": ("quadratic", "abs", "abs", "quadratic"),
    "attractive_repulsive": ("quadratic", "abs", "-abs", "quadratic"),
}

# family -> (constructor, required keyword arguments)
PROFILE_BUILDERS = {
    "batman": (analytic_aa.solve_batman, ("m1", "m2", "epsilon")),
    "second_kind": (analytic_aa.solve_second_kind, ("p", "m1", "m2", "epsilon")),
    "segregated": (analytic_ar.segregated_state, ("m1", "m2", "M2", "epsilon")),
    "two_pulse": (analytic_ar.two_pulse, ("m", "epsilon", "x0")),
    "three_pulse": (analytic_ar.three_pulse, ("m", "mL", "mR", "M2", "epsilon")),
}

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")


def parse_call(text):
    """Split ``name(arg, key=value, ...)`` into ``(name, [args], {kwargs})``.

    Values are parsed as floats.

    Raises
    ------
    InvalidArgument
        On malformed text or non-numeric values.
    """
    m = _CALL.match(text)
    if not m:
        raise InvalidArgument(f"expected name(arguments), got {text.strip()!r}")
    name, body = m.group(1), m.group(2).strip()
    args, kwargs = [], {}
    if body:
        for part in body.split(","):
            key, eq, val = part.partition("=")
            target = val if eq else key
            try:
                num = float(target)
            except ValueError:
                raise InvalidArgument(f"not a number: {target.strip()!r} in {text.strip()!r}") from None
            if eq:
                kwargs[key.strip()] = num
            elif kwargs:
                raise InvalidArgument(f"positional argument after keyword in {text.strip()!r}")
            else:
                args.append(num)
    return name, args, kwargs


def build_profile(family, params):
    """Construct a closed-form profile from a family name and keyword parameters."""
    try:
        builder, required = PROFILE_BUILDERS[family]
    except KeyError:
        raise InvalidArgument(f"unknown profile family {family!r}; "
                              f"choose from {', '.join(PROFILE_BUILDERS)}") from None
    missing = [k for k in required if k not in params]
    extra = [k for k in params if k not in required]
    if missing or extra:
        raise InvalidArgument(f"{family} takes {', '.join(required)}"
                              + (f"; missing {', '.join(missing)}" if missing else "")
                              + (f"; unknown {', '.join(extra)}" if extra else ""))
    return builder(**{k: params[k] for k in required})


def _profile_term(name, args, kwargs, species):
    if args:
        raise InvalidArgument(f"profile {name} takes keyword arguments only")
    kwargs = dict(kwargs)
    shift = kwargs.pop("shift", 0.0)
    prof = build_profile(name, kwargs)
    dens = prof.density(species)
    return ClosedForm(lambda x: dens(x - shift), tuple(b + shift for b in dens.breakpoints))


def parse_density(text, species):
    """Initial density for ``species`` from its configuration value."""
    terms = [t for t in re.split(r"\+(?![^()]*\))", text)]
    if any(not t.strip() for t in terms):
        raise InvalidArgument(f"empty term in {text.strip()!r}")
    calls = [parse_call(t) for t in terms]
    if len(calls) == 1 and calls[0][0] in PROFILE_BUILDERS:
        return _profile_term(*calls[0], species)
    segs = []
    for name, args, kwargs in calls:
        if kwargs or len(args) != 3:
            raise InvalidArgument(f"{name} takes three numbers (a, b, {'mass' if name == 'indicator' else 'value'})")
        a, b, v = args
        if name == "indicator":
            if not b > a:
                raise InvalidArgument(f"indicator interval [{a}, {b}] is empty")
            segs.append((a, b, v / (b - a)))
        elif name == "constant":
            segs.append((a, b, v))
        elif name in PROFILE_BUILDERS:
            raise InvalidArgument(f"profile {name} cannot be combined with other terms")
        else:
            raise InvalidArgument(f"unknown initial-data term {name!r}")
    return PiecewiseConstant(tuple(segs))


@dataclass
class RunConfig:
    """Everything one simulation needs, validated."""

    L: float = 3.0
    N: int = 800
    epsilon: float = math.nan
    potentials: tuple = tuple(PotentialSpec.parse(s) for s in SYSTEMS["attractive_attractive"])
    initial: dict = field(default_factory=dict)       # species -> density
    initial_text: dict = field(default_factory=dict)  # species -> source text
    t_end: float = math.nan
    steady_tol: float = 1e-8
    cfl_safety: float = 0.9
    dt_max: float = 0.1
    snapshot_every: Optional[float] = None
    max_steps: Optional[int] = None
    out_dir: str = "out"
    formats: tuple = ("csv", "json")
    compare: object = None
    compare_text: Optional[str] = None
    name: str = "run"

    def grid(self):
        return build_grid(self.L, self.N)

    def params(self):
        return ModelParams(self.epsilon, self.potentials)

    def controls(self):
        return StepControls(t_end=self.t_end, cfl_safety=self.cfl_safety, dt_max=self.dt_max,
                            steady_tol=self.steady_tol, snapshot_every=self.snapshot_every)

    def initial_state(self):
        g = self.grid()
        return SystemState(project_initial_data(self.initial["rho"], g),
                           project_initial_data(self.initial["eta"], g), g)


def _num(text):
    return float(text)


def _positive(v):
    if not v > 0 or not math.isfinite(v):
        raise ValueError("must be positive")
    return v


def _count(text):
    v = float(text)
    if v != int(v) or v < 2:
        raise ValueError("must be an integer >= 2")
    return int(v)


def _steps(text):
    v = float(text)
    if v != int(v) or v < 1:
        raise ValueError("must be a positive integer")
    return int(v)


def _safety(text):
    v = float(text)
    if not 0 < v <= 1:
        raise ValueError("must lie in (0, 1]")
    return v


def _formats(text):
    vals = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    bad = [v for v in vals if v not in ("csv", "json")]
    if bad or not vals:
        raise ValueError("must be a comma-separated subset of csv, json")
    return vals


def _optional_positive(text):
    if text.strip().lower() in ("none", ""):
        return None
    return _positive(float(text))


# key -> (RunConfig attribute, converter)
_SCALARS = {
    "grid.L": ("L", lambda s: _positive(_num(s))),
    "grid.N": ("N", _count),
    "model.epsilon": ("epsilon", lambda s: _positive(_num(s))),
    "controls.t_end": ("t_end", lambda s: _positive(_num(s))),
    "controls.steady_tol": ("steady_tol", lambda s: _positive(_num(s))),
    "controls.cfl_safety": ("cfl_safety", _safety),
    "controls.dt_max": ("dt_max", lambda s: _positive(_num(s))),
    "controls.snapshot_every": ("snapshot_every", _optional_positive),
    "controls.max_steps": ("max_steps", _steps),
    "output.dir": ("out_dir", str.strip),
    "output.formats": ("formats", _formats),
    "name": ("name", str.strip),
}
_POTENTIAL_KEYS = ("model.W11", "model.W12", "model.W21", "model.W22")
KNOWN_KEYS = (tuple(_SCALARS) + _POTENTIAL_KEYS
              + ("model.system", "initial.rho", "initial.eta", "compare.profile", "preset"))


def _lines(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def _extent(density):
    """Smallest interval holding the support of an initial density."""
    if isinstance(density, PiecewiseConstant):
        pts = [x for a, b, v in density.segments if v != 0 for x in (a, b)]
    else:
        pts = list(density.breakpoints)
    return (min(pts), max(pts)) if pts else (0.0, 0.0)


def _expand_preset(value):
    from .presets import get_preset  # presets import this module

    name, _, idx = value.strip().strip('"').strip("'").partition(":")
    preset = get_preset(name)
    configs = preset.configs
    if not configs:
        raise InvalidArgument(f"preset {name!r} has no simulation; use 'preset run {name}'")
    k = int(idx) if idx else 1
    if not 1 <= k <= len(configs):
        raise InvalidArgument(f"preset {name!r} has {len(configs)} runs, asked for run {k}")
    return configs[k - 1]


def parse_config(text):
    """Parse and validate configuration text.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        Listing every problem with its line number (0 for missing keys).
    """
    problems = []
    entries = {}
    for n, line in _lines(text):
        key, eq, value = line.partition("=")
        key = key.strip()
        if not eq:
            problems.append((n, f"expected 'key = value', got {line!r}"))
            continue
        if key not in KNOWN_KEYS:
            problems.append((n, f"unknown key {key!r}"))
            continue
        if key == "preset":
            try:
                base = _expand_preset(value)
            except CrossDiffError as err:
                problems.append((n, f"preset: {err}"))
                continue
            for _, bline in _lines(base):
                bkey, _, bval = bline.partition("=")
                entries[bkey.strip()] = (n, bval.strip())
            continue
        entries[key] = (n, value.strip())

    cfg = RunConfig()
    system = entries.get("model.system")
    if system is not None:
        n, val = system
        if val not in SYSTEMS:
            problems.append((n, f"model.system must be one of {', '.join(SYSTEMS)}"))
        else:
            cfg.potentials = tuple(PotentialSpec.parse(s) for s in SYSTEMS[val])
    pots = list(cfg.potentials)
    for i, key in enumerate(_POTENTIAL_KEYS):
        if key in entries:
            n, val = entries[key]
            try:
                pots[i] = PotentialSpec.parse(val)
            except InvalidArgument as err:
                problems.append((n, f"{key}: {err}"))
    cfg.potentials = tuple(pots)

    for key, (attr, conv) in _SCALARS.items():
        if key in entries:
            n, val = entries[key]
            try:
                setattr(cfg, attr, conv(val))
            except ValueError as err:
                problems.append((n, f"{key}: {val!r} {err}" if "must" in str(err)
                                 else f"{key}: expected a number, got {val!r}"))

    for key in ("model.epsilon", "controls.t_end", "initial.rho", "initial.eta"):
        if key not in entries:
            problems.append((0, f"missing required key {key}"))

    for species in ("rho", "eta"):
        key = f"initial.{species}"
        if key in entries:
            n, val = entries[key]
            try:
                cfg.initial[species] = parse_density(val, species)
                cfg.initial_text[species] = val
            except CrossDiffError as err:
                problems.append((n, f"{key}: {err}"))

    if "compare.profile" in entries:
        n, val = entries["compare.profile"]
        try:
            name, args, kwargs = parse_call(val)
            if args:
                raise InvalidArgument("profile parameters must be given as key=value")
            cfg.compare = build_profile(name, kwargs)
            cfg.compare_text = val
        except CrossDiffError as err:
            problems.append((n, f"compare.profile: {err}"))

    for species, dens in cfg.initial.items():
        lo, hi = _extent(dens)
        if lo < -cfg.L or hi > cfg.L:
            problems.append((entries[f"initial.{species}"][0],
                             f"initial.{species}: data on [{lo:g}, {hi:g}] reaches outside the "
                             f"domain [{-cfg.L:g}, {cfg.L:g}]; increase grid.L"))

    if not problems:
        try:
            cfg.initial_state()
        except CrossDiffError as err:
            n = min(entries["initial.rho"][0], entries["initial.eta"][0])
            problems.append((n, f"initial data: {err}"))
    if problems:
        raise ConfigError(sorted(problems))
    return cfg
