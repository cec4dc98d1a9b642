"""Grids, species states, interaction potentials and kernel tables.

Everything here is immutable value data.  Cell fields are plain 1-D float
arrays (marked read-only once they are stored in a :class:`SystemState`).
"""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "Grid", "PotentialSpec", "KernelTable", "ModelParams", "SystemState",
    "PiecewiseConstant", "ClosedForm",
    "build_grid", "eval_potential", "build_kernel_table", "project_initial_data",
    "attractive_attractive", "attractive_repulsive",
]

FAMILIES = ("quadratic", "power", "power_normalized", "abs", "morse")

# 5-point Gauss-Legendre on [-1, 1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform partition of [-L, L] into N control volumes."""

    L: float
    N: int
    dx: float
    centers: np.ndarray = field(repr=False)

    @property
    def edges(self):
        return -self.L + self.dx * np.arange(self.N + 1)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.L == other.L and self.N == other.N

    def __hash__(self):
        return hash((self.L, self.N))


def build_grid(L, N):
    """Grid on [-L, L] with N cells and midpoint centres."""
    if not np.isfinite(L) or L <= 0:
        raise InvalidArgument(f"half width L must be positive, got {L}")
    if int(N) != N or N < 2:
        raise InvalidArgument(f"cell count N must be an integer >= 2, got {N}")
    N = int(N)
    L = float(L)
    dx = 2.0 * L / N
    centers = -L + (np.arange(N) + 0.5) * dx
    centers.setflags(write=False)
    return Grid(L=L, N=N, dx=dx, centers=centers)


@dataclass(frozen=True)
class PotentialSpec:
    """An even interaction potential ``sign * W_family(|x|)``.

    family:
        ``quadratic`` x^2/2, ``power`` |x|^p, ``power_normalized`` |x|^p/p,
        ``abs`` |x|, ``morse`` 1 - exp(-|x|^p).
    """

    family: str
    p: float = 1.0
    sign: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgument(f"unknown potential family {self.family!r}")
        if not self.p > 0:
            raise InvalidArgument(f"potential exponent must be positive, got {self.p}")
        if self.sign not in (1.0, -1.0):
            raise InvalidArgument(f"potential sign must be +1 or -1, got {self.sign}")

    def __call__(self, x):
        return eval_potential(self, x)

    def __neg__(self):
        return PotentialSpec(self.family, self.p, -self.sign)

    @classmethod
    def parse(cls, text):
        """Parse ``[-]family[:p]``, e.g. ``quadratic``, ``-abs``, ``morse:0.5``."""
        s = text.strip().lower()
        sign = 1.0
        if s.startswith("-"):
            sign, s = -1.0, s[1:].strip()
        elif s.startswith("+"):
            s = s[1:].strip()
        name, _, arg = s.partition(":")
        name = name.strip()
        if name not in FAMILIES:
            raise InvalidArgument(f"unknown potential family {name!r}")
        if arg:
            try:
                p = float(arg)
            except ValueError:
                raise InvalidArgument(f"bad potential exponent {arg!r}") from None
        elif name in ("power", "power_normalized", "morse"):
            raise InvalidArgument(f"potential family {name!r} needs an exponent, e.g. {name}:1.5")
        else:
            p = 2.0 if name == "quadratic" else 1.0
        return cls(name, p, sign)

    def __str__(self):
        head = "-" if self.sign < 0 else ""
        if self.family in ("quadratic", "abs"):
            return head + self.family
        return f"{head}{self.family}:{self.p:g}"


def eval_potential(spec, x):
    """Evaluate ``spec`` at ``x`` (scalar or array); even in ``x``."""
    r = np.abs(np.asarray(x, dtype=float))
    fam = spec.family
    if fam == "quadratic":
        w = 0.5 * r * r
    elif fam == "abs":
        w = r
    elif fam == "power":
        w = r ** spec.p
    elif fam == "power_normalized":
        w = r ** spec.p / spec.p
    else:  # morse
        w = -np.expm1(-(r ** spec.p))
    w = spec.sign * w
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Samples ``W(d*dx)`` for ``d = -(N-1) .. N-1``.

    ``samples[N - 1 + d]`` holds the value for index difference ``d``;
    use :meth:`at` for signed lookups.
    """

    samples: np.ndarray = field(repr=False)
    N: int

    def at(self, d):
        return self.samples[self.N - 1 + np.asarray(d)]


def build_kernel_table(spec, grid):
    n = grid.N
    d = np.arange(n)
    half = eval_potential(spec, d * grid.dx)
    # mirror the non-negative half so evenness is exact
    samples = np.concatenate([half[:0:-1], half])
    samples.setflags(write=False)
    return KernelTable(samples=samples, N=n)


@dataclass(frozen=True)
class ModelParams:
    """Cross-diffusivity and the potentials ``(W11, W12, W21, W22)``."""

    epsilon: float
    potentials: tuple

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon}")
        if len(self.potentials) != 4:
            raise InvalidArgument("potentials must be (W11, W12, W21, W22)")
        object.__setattr__(self, "potentials", tuple(self.potentials))

    @property
    def W11(self):
        return self.potentials[0]

    @property
    def W12(self):
        return self.potentials[1]

    @property
    def W21(self):
        return self.potentials[2]

    @property
    def W22(self):
        return self.potentials[3]

    def with_epsilon(self, epsilon):
        return ModelParams(epsilon, self.potentials)


def attractive_attractive(epsilon):
    """W11 = W22 = x^2/2 and W12 = W21 = |x|."""
    q, a = PotentialSpec("quadratic"), PotentialSpec("abs")
    return ModelParams(epsilon, (q, a, a, q))


def attractive_repulsive(epsilon):
    """W11 = W22 = x^2/2 and W12 = |x| = -W21."""
    q, a = PotentialSpec("quadratic"), PotentialSpec("abs")
    return ModelParams(epsilon, (q, a, -a, q))


@dataclass(frozen=True, eq=False)
class SystemState:
    rho: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    grid: Grid
    time: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        eta = np.array(self.eta, dtype=float)
        if rho.shape != (self.grid.N,) or eta.shape != (self.grid.N,):
            raise InvalidArgument(
                f"fields must have length {self.grid.N}, got {rho.shape} and {eta.shape}")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(eta))):
            raise InvalidArgument("cell values must be finite")
        if self.time < 0:
            raise InvalidArgument(f"time must be non-negative, got {self.time}")
        rho.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "eta", eta)

    @property
    def sigma(self):
        return self.rho + self.eta

    def masses(self):
        dx = self.grid.dx
        return float(np.sum(self.rho) * dx), float(np.sum(self.eta) * dx)


# -- initial data -----------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseConstant:
    """Sum of constant pieces ``value * 1_[a, b]``."""

    segments: tuple = ()

    def __post_init__(self):
        segs = tuple((float(a), float(b), float(v)) for a, b, v in self.segments)
        for a, b, v in segs:
            if not b > a:
                raise InvalidArgument(f"segment [{a}, {b}] is empty")
            if v < 0:
                raise InvalidArgument(f"negative density {v} on [{a}, {b}]")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def indicator(cls, a, b, mass):
        """Uniform density of total ``mass`` on ``[a, b]``."""
        return cls(((a, b, mass / (b - a)),))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, v in self.segments:
            out = out + np.where((x >= a) & (x < b), v, 0.0)
        return out

    def mass(self):
        return sum((b - a) * v for a, b, v in self.segments)

    def shifted(self, s):
        return PiecewiseConstant(tuple((a + s, b + s, v) for a, b, v in self.segments))


@dataclass(frozen=True)
class ClosedForm:
    """A vectorised density with the points where it is not smooth."""

    func: Callable
    breakpoints: Sequence[float] = ()

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def project_initial_data(density, grid):
    """Cell averages of ``density`` over the cells of ``grid``.

    Piecewise-constant input is integrated exactly by interval overlap.
    Other input (a :class:`ClosedForm` or any vectorised callable) is
    integrated with 5-point Gauss-Legendre on every sub-interval between
    consecutive breakpoints inside each cell.
    """
    if isinstance(density, (int, float)) and density == 0:
        return np.zeros(grid.N)
    edges = grid.edges
    if isinstance(density, PiecewiseConstant):
        values = np.zeros(grid.N)
        for a, b, v in density.segments:
            overlap = np.clip(np.minimum(edges[1:], b) - np.maximum(edges[:-1], a), 0.0, None)
            values += v * overlap
        return values / grid.dx

    func = density
    bps = np.asarray(sorted(getattr(density, "breakpoints", ())), dtype=float)
    values = np.empty(grid.N)
    for i in range(grid.N):
        lo, hi = edges[i], edges[i + 1]
        inner = bps[(bps > lo) & (bps < hi)]
        pts = np.concatenate(([lo], inner, [hi]))
        a, b = pts[:-1, None], pts[1:, None]
        xq = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
        fq = np.asarray(func(xq), dtype=float)
        if np.any(fq < 0):
            raise InvalidArgument(f"negative density near x = {xq[fq < 0][0]:.6g}")
        values[i] = np.sum(0.5 * (b - a) * (fq @ _GL_WEIGHTS[:, None]))
    return values / grid.dx
