"""Named experiments that reproduce the reference steady states and pulses.

A preset bundles simulation configurations (in the text format of
:mod:`crossdiff.config`), profile constructions and parameter scans.
Grids default to ``L = 3`` for steady states and ``L = 12`` for travelling
pulses with ``N = 800``; runs whose supports are wider use a larger ``L``
so that mass stays at least ten cells away from the boundary.  Presets
marked ``qualitative`` use reconstructed initial data because the exact
values of the reference runs are not known.
"""

from dataclasses import dataclass

from .analytic_ar import critical_epsilon, three_pulse_M2_range
from .errors import InvalidArgument

__all__ = ["Preset", "PRESETS", "get_preset", "list_presets"]


@dataclass(frozen=True)
class Preset:
    """One named experiment.

    Attributes
    ----------
    configs : tuple of str
        Simulation configurations, run in order.
    constructs : tuple of (str, dict)
        Closed-form profiles to build, as ``(family, parameters)``.
    scans : tuple of (str, dict)
        Parameter scans, as ``(kind, parameters)``; kinds are
        ``bifurcation``, ``envelopes`` and ``critical``.
    """

    name: str
    description: str
    configs: tuple = ()
    constructs: tuple = ()
    scans: tuple = ()
    qualitative: bool = False


def _sim(name, system, eps, rho, eta, t_end, L=3.0, N=800, every=None, compare=None,
         potentials=None):
    lines = [f"name = {name}", f"grid.L = {L}", f"grid.N = {N}",
             f"model.system = {system}", f"model.epsilon = {eps!r}",
             f"initial.rho = {rho}", f"initial.eta = {eta}", f"controls.t_end = {t_end}"]
    if potentials:
        lines += [f"model.{k} = {v}" for k, v in potentials.items()]
    if every is not None:
        lines.append(f"controls.snapshot_every = {every}")
    if compare is not None:
        lines.append(f"compare.profile = {compare}")
    return "\n".join(lines) + "\n"


AA, AR = "attractive_attractive", "attractive_repulsive"
EPS_C = critical_epsilon(1.0, 1.0)
TWO_THIRDS = 2.0 / 3.0
# first moment leaving equal gaps on both sides of rho (midpoint of the admissible range)
_R3 = three_pulse_M2_range(1.0, 1 / 3, 2 / 3, 0.05)
M2_EQUAL_GAPS = 0.5 * (_R3.M2_min + _R3.M2_max)

_LIST = [
    Preset(
        "batman", "Batman steady state, eps=0.12, m1=0.6, m2=0.1",
        configs=(_sim("batman", AA, 0.12, "indicator(-0.5, 0, 0.6)", "indicator(0, 0.5, 0.1)",
                      40, every=2, compare="batman(m1=0.6, m2=0.1, epsilon=0.12)"),),
        constructs=(("batman", {"m1": 0.6, "m2": 0.1, "epsilon": 0.12}),)),
    Preset(
        "overlap", "complete overlap (cosine), eps=1, m1=m2=1",
        configs=(_sim("overlap", AA, 1.0, "indicator(-0.5, 0.5, 1)", "indicator(-1, 1, 1)",
                      6, every=0.5, compare="batman(m1=1, m2=1, epsilon=1)"),),
        constructs=(("batman", {"m1": 1.0, "m2": 1.0, "epsilon": 1.0}),)),
    Preset(
        "second_kind", "second-kind profile with corner bumps, eps=1.5, m1=0.1, m2=0.6",
        configs=(_sim("second_kind", AA, 1.5, "indicator(-1, 1, 0.1)", "indicator(-0.5, 0.5, 0.6)",
                      20, every=1),),
        constructs=(("second_kind", {"p": 0.3, "m1": 0.1, "m2": 0.6, "epsilon": 1.5}),),
        qualitative=True),
    Preset(
        "bifurcation", "existence of Batman and second-kind profiles over eps, m1=0.1, m2=0.6",
        scans=(("bifurcation", {"m1": 0.1, "m2": 0.6, "eps_lo": 0.5, "eps_hi": 3.0, "steps": 26}),)),
    Preset(
        "envelopes", "p_min and p_max reached from two initial data, eps=1.7, m1=0.1, m2=0.6",
        configs=(
            _sim("eta_inside", AA, 1.7, "indicator(-1, 1, 0.1)", "indicator(-0.5, 0.5, 0.6)",
                 20, every=1),
            _sim("eta_around", AA, 1.7, "indicator(-0.5, 0.5, 0.1)",
                 "indicator(-1.5, -0.5, 0.3) + indicator(0.5, 1.5, 0.3)", 20, every=1)),
        scans=(("envelopes", {"m1": 0.1, "m2": 0.6, "eps_lo": 1.7, "eps_hi": 1.7, "steps": 1}),),
        qualitative=True),
    Preset(
        "asymmetric", "asymmetric (m1=1, m2=2) and antisymmetric (m1=m2=1) states at eps=3",
        configs=(
            _sim("asymmetric", AA, 3.0, "indicator(-1, 0, 1)", "indicator(0, 1.5, 2)", 20, L=6,
                 every=1),
            _sim("antisymmetric", AA, 3.0, "indicator(-1, 0, 1)", "indicator(0, 1, 1)", 20, L=6,
                 every=1)),
        qualitative=True),
    Preset(
        "asymmetric_family", "asymmetric family with decreasing left corner mass, eps=1.2, m1=0.6, m2=0.1",
        configs=tuple(
            _sim(f"left_corner_{k}", AA, 1.2, "indicator(-1, 1, 0.6)",
                 f"indicator(-1.4, -1, {mL!r}) + indicator(-0.2, 0.2, 0.05) + indicator(1, 1.4, {0.05 - mL!r})",
                 20, every=1)
            for k, mL in enumerate((0.04, 0.025, 0.01), start=1)),
        qualitative=True),
    Preset(
        "segregation", "segregated states below eps_c and the range of M2 (m1=m2=1)",
        constructs=tuple(
            [("segregated", {"m1": 1.0, "m2": 1.0, "M2": 0.0, "epsilon": e})
             for e in (0.01, 0.05, 0.1, EPS_C)]
            + [("segregated", {"m1": 1.0, "m2": 1.0, "M2": M, "epsilon": 0.05})
               for M in (-0.2435671923080407, 0.0, 0.2435671923080407)]),
        scans=(("critical", {"m1_values": (0.5, 1.0, 2.0), "m2_values": (0.5, 1.0, 2.0)}),)),
    Preset(
        "eps_sweep", "segregated, touching and adjacent states for eps = 1/20, eps_c, 1/2",
        configs=tuple(
            _sim(f"eps_{tag}", AR, e, "indicator(-0.5, 0.5, 1)",
                 "indicator(-2, -1, 0.5) + indicator(1, 2, 0.5)", 10, every=1,
                 compare=(f"segregated(m1=1, m2=1, M2=0, epsilon={e!r})" if e < EPS_C else None))
            for tag, e in (("0.05", 0.05), ("critical", EPS_C), ("0.5", 0.5)))),
    Preset(
        "two_pulse", "two travelling pulses with speed m=1, eps=2/3",
        configs=(_sim("two_pulse", AR, TWO_THIRDS, "indicator(-10, -8, 1)", "indicator(-7, -5, 1)",
                      10, L=12, every=0.25),),
        constructs=(("two_pulse", {"m": 1.0, "epsilon": TWO_THIRDS, "x0": 3.0}),)),
    Preset(
        "three_pulse", "three travelling pulses, mL=1/3 and mR=2/3, speed 1/3",
        configs=(_sim("three_pulse", AR, 0.05, "indicator(-8.5, -7.5, 1)",
                      f"indicator(-9.5, -8.5, {1 / 3!r}) + indicator(-7.5, -6.5, {2 / 3!r})",
                      24, L=12, every=0.25),),
        constructs=(("three_pulse", {"m": 1.0, "mL": 1 / 3, "mR": 2 / 3, "M2": M2_EQUAL_GAPS,
                                     "epsilon": 0.05}),)),
    Preset(
        "generality", "Batman-like states for power and Morse cross-interactions",
        configs=tuple(
            _sim(f"cross_{pot.replace(':', '_')}", AA, 0.12, "indicator(-0.5, 0, 0.6)",
                 "indicator(0, 0.5, 0.1)", 40, every=2,
                 potentials={"W12": pot, "W21": pot})
            for pot in ("power:0.5", "abs", "power:1.5", "morse:0.5", "morse:1", "morse:1.5")),
        qualitative=True),
]

PRESETS = {p.name: p for p in _LIST}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidArgument(f"unknown preset {name!r}; see 'preset list'") from None


def list_presets():
    return list(PRESETS.values())
