"""Conserved quantities, energy, error norms, supports and pulse speeds."""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.signal import correlate
from scipy.special import xlogy

from .errors import InvalidArgument
from .model_core import SystemState, project_initial_data

__all__ = [
    "DiagnosticsReport", "SupportInterval",
    "total_mass", "moments", "energy", "profile_error", "extract_support",
    "centers_of_mass", "measure_speed", "diagnose",
]

SUPPORT_THRESHOLD = 1e-4
MIN_SPEED_SAMPLES = 10


def _values(field):
    return np.asarray(field, dtype=float)


def total_mass(field, grid):
    """``dx * sum(values)``."""
    return float(np.sum(_values(field)) * grid.dx)


def moments(field, grid):
    """First and second moments ``(dx sum x f, dx sum x^2 f)``."""
    f = _values(field)
    x = grid.centers
    return float(np.sum(x * f) * grid.dx), float(np.sum(x * x * f) * grid.dx)


def energy(state):
    """``dx * sum(rho log rho + eta log eta)`` with ``0 log 0 = 0``.

    Raises
    ------
    InvalidArgument
        If a cell is negative.
    """
    for name in ("rho", "eta"):
        f = getattr(state, name)
        if np.any(f < 0):
            i = int(np.argmin(f))
            raise InvalidArgument(f"energy needs non-negative fields; {name}[{i}] = {f[i]:.3e}")
    return float((np.sum(xlogy(state.rho, state.rho)) + np.sum(xlogy(state.eta, state.eta)))
                 * state.grid.dx)


def _shift(arr, s):
    """``out[i] = arr[i - s]`` with zero fill."""
    out = np.zeros_like(arr)
    n = arr.size
    if s >= 0:
        out[s:] = arr[:n - s] if s < n else 0.0
    else:
        out[:n + s] = arr[-s:]
    return out


def _best_shift(num, ref):
    """Integer shift ``s`` maximising ``sum_i num[i] ref[i - s]`` over both species."""
    corr = sum(correlate(a, b, mode="full", method="direct") for a, b in zip(num, ref))
    n = num[0].size
    return int(np.argmax(corr)) - (n - 1)


def profile_error(numeric, profile, norm="L1", align=True):
    """Distance between a simulated state and an analytic profile.

    The profile is projected onto the state's grid (cell averages at the
    state's time, so travelling profiles are compared in place).  With
    ``align`` the projection is first translated by the whole number of
    cells that maximises its cross-correlation with the state; every profile
    family here is translation invariant.

    Parameters
    ----------
    norm : {"L1", "Linf"}
        ``L1`` is the dx-weighted sum of absolute differences; ``Linf`` the
        largest absolute difference.  Both species are summed.
    """
    if norm not in ("L1", "Linf"):
        raise InvalidArgument(f"norm must be 'L1' or 'Linf', got {norm!r}")
    grid = numeric.grid
    ref = [project_initial_data(profile.density(s, numeric.time), grid) for s in ("rho", "eta")]
    num = [numeric.rho, numeric.eta]
    if align:
        s = _best_shift(num, ref)
        ref = [_shift(r, s) for r in ref]
    diffs = [np.abs(a - b) for a, b in zip(num, ref)]
    if norm == "L1":
        return float(sum(np.sum(d) for d in diffs) * grid.dx)
    return float(sum(np.max(d) for d in diffs))


@dataclass(frozen=True)
class SupportInterval:
    """Cells ``first..last`` (inclusive) spanning ``[lo, hi]`` between cell edges."""

    lo: float
    hi: float
    first: int
    last: int

    def overlaps(self, other):
        return self.first <= other.last and other.first <= self.last


def extract_support(field, grid, threshold_fraction=SUPPORT_THRESHOLD):
    """Maximal runs of cells above ``threshold_fraction * max(field)``.

    Runs separated by a single cell below the threshold are merged.
    """
    if not 0 < threshold_fraction < 1:
        raise InvalidArgument(f"threshold_fraction must lie in (0, 1), got {threshold_fraction}")
    f = _values(field)
    top = float(np.max(f)) if f.size else 0.0
    if top <= 0:
        return []
    idx = np.flatnonzero(f > threshold_fraction * top)
    runs = []
    start = prev = int(idx[0])
    for i in idx[1:]:
        i = int(i)
        if i - prev > 2:  # gap of two or more cells
            runs.append((start, prev))
            start = i
        prev = i
    runs.append((start, prev))
    edges = grid.edges
    return [SupportInterval(float(edges[a]), float(edges[b + 1]), a, b) for a, b in runs]


def centers_of_mass(snapshots, species="rho"):
    """``(times, centres)`` of one species over a sequence of states."""
    t = np.array([s.time for s in snapshots])
    com = []
    for s in snapshots:
        f = getattr(s, species)
        m = np.sum(f)
        com.append(np.sum(s.grid.centers * f) / m if m > 0 else np.nan)
    return t, np.array(com)


def measure_speed(times, centers):
    """Least-squares slope of ``centers`` against ``times`` over the final half.

    Raises
    ------
    InvalidArgument
        If fewer than 10 samples fall in the final half of the time span.
    """
    t = np.asarray(times, dtype=float)
    c = np.asarray(centers, dtype=float)
    if t.size != c.size:
        raise InvalidArgument("times and centers differ in length")
    if t.size == 0:
        raise InvalidArgument("no samples")
    half = t[0] + 0.5 * (t[-1] - t[0])
    sel = t >= half
    if np.count_nonzero(sel) < MIN_SPEED_SAMPLES:
        raise InvalidArgument(f"need at least {MIN_SPEED_SAMPLES} samples in the final half, "
                              f"got {np.count_nonzero(sel)}")
    slope, _ = np.polyfit(t[sel], c[sel], 1)
    return float(slope)


@dataclass
class DiagnosticsReport:
    time: float
    mass_rho: float
    mass_eta: float
    M1: float
    M2: float
    Mbar1: float
    Mbar2: float
    energy: float
    min_cell: float
    l1_error: Optional[float] = None
    linf_error: Optional[float] = None
    measured_speed: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def diagnose(state: SystemState, profile=None, measured_speed=None, align=True):
    """Report on one state, with errors against ``profile`` when given."""
    g = state.grid
    M1, Mb1 = moments(state.rho, g)
    M2, Mb2 = moments(state.eta, g)
    rep = DiagnosticsReport(
        time=float(state.time),
        mass_rho=total_mass(state.rho, g), mass_eta=total_mass(state.eta, g),
        M1=M1, M2=M2, Mbar1=Mb1, Mbar2=Mb2, energy=energy(state),
        min_cell=float(min(np.min(state.rho), np.min(state.eta))),
        measured_speed=measured_speed)
    if profile is not None:
        rep.l1_error = profile_error(state, profile, "L1", align)
        rep.linf_error = profile_error(state, profile, "Linf", align)
    return rep
