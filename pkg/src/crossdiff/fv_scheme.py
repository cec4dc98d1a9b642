"""Positivity-preserving upwind finite-volume scheme and its run loop.

One explicit Euler step::

    xi_i   = dx * sum_k (W11[i-k] rho_k + W12[i-k] eta_k) + eps (rho_i + eta_i)
    U_i+.5 = -(xi_i+1 - xi_i) / dx                (zero on the two boundary edges)
    F_i+.5 = max(U, 0) rho_i + min(U, 0) rho_i+1
    rho_i <- rho_i - dt/dx (F_i+.5 - F_i-.5)

and the same for ``eta`` with ``zeta``, W22, W21, V and G.  The step keeps
cell averages non-negative when ``dt <= dx / (2 max(|U|, |V|))``.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument, StepRejected
from .model_core import SystemState, build_kernel_table

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

log = logging.getLogger(__name__)

__all__ = [
    "PotentialField", "EdgeVelocities", "EdgeFluxes", "StepControls", "RunResult",
    "BoundaryWarning", "build_kernels", "compute_potential_fields",
    "compute_velocities", "compute_fluxes", "cfl_dt", "diffusion_dt", "step", "run", "snapshot_rows",
]

REJECT_TOL = -1e-14
BOUNDARY_CELLS = 10


class BoundaryWarning(UserWarning):
    """Mass came within a few cells of the no-flux boundary."""


@dataclass(frozen=True, eq=False)
class PotentialField:
    xi: np.ndarray
    zeta: np.ndarray


@dataclass(frozen=True, eq=False)
class EdgeVelocities:
    U: np.ndarray
    V: np.ndarray


@dataclass(frozen=True, eq=False)
class EdgeFluxes:
    F: np.ndarray
    G: np.ndarray


@dataclass(frozen=True)
class StepControls:
    t_end: float
    cfl_safety: float = 0.9
    dt_max: float = 0.1
    steady_tol: float = 1e-8
    snapshot_every: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 1:
            raise InvalidArgument(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        for name in ("t_end", "dt_max", "steady_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)}")
        if self.snapshot_every is not None and not self.snapshot_every > 0:
            raise InvalidArgument(f"snapshot_every must be positive, got {self.snapshot_every}")


def build_kernels(params, grid):
    """Kernel tables for ``(W11, W12, W21, W22)`` on ``grid``."""
    return tuple(build_kernel_table(w, grid) for w in params.potentials)


# -- discrete convolution -----------------------------------------------------

# Sources below this value are left out of the convolution.  Their
# contributions lie hundreds of orders of magnitude below the rounding unit
# of any potential built from normal-sized data, while the underflowing tails
# that the upwind flux pushes ahead of each support would otherwise produce
# subnormal products, whose arithmetic dominates the run time.
NEGLIGIBLE = 1e-250


def _active(fa, fb):
    # source columns with at least one non-negligible species
    return np.flatnonzero((fa >= NEGLIGIBLE) | (fb >= NEGLIGIBLE))


def _direct_sum_py(wa, fa, wb, fb, active):
    n = fa.shape[0]
    out = np.zeros(n)
    for k in active:
        # column k of the Toeplitz sum, added in increasing k for every i
        a = fa[k] if fa[k] >= NEGLIGIBLE else 0.0
        b = fb[k] if fb[k] >= NEGLIGIBLE else 0.0
        out += wa[n - 1 - k: 2 * n - 1 - k] * a + wb[n - 1 - k: 2 * n - 1 - k] * b
    return out


if njit is not None:
    @njit(cache=True, error_model="numpy")
    def _direct_sum(wa, fa, wb, fb, active):
        # same k order as the fallback; the inner loop over i vectorises
        n = fa.shape[0]
        out = np.zeros(n)
        for k in active:
            a = fa[k] if fa[k] >= NEGLIGIBLE else 0.0
            b = fb[k] if fb[k] >= NEGLIGIBLE else 0.0
            base = n - 1 - k
            va = wa[base:base + n]
            vb = wb[base:base + n]
            for i in range(n):
                out[i] += va[i] * a + vb[i] * b
        return out
else:  # pragma: no cover
    _direct_sum = _direct_sum_py


def compute_potential_fields(state, kernels, params):
    W11, W12, W21, W22 = kernels
    n = state.grid.N
    if any(k.N != n for k in kernels):
        raise InvalidArgument(f"kernel tables built for N={kernels[0].N}, state has N={n}")
    dx = state.grid.dx
    rho, eta = state.rho, state.eta
    press = params.epsilon * (rho + eta)
    active = _active(rho, eta)
    xi = dx * _direct_sum(W11.samples, rho, W12.samples, eta, active) + press
    zeta = dx * _direct_sum(W22.samples, eta, W21.samples, rho, active) + press
    return PotentialField(xi=xi, zeta=zeta)


def compute_velocities(fields, grid):
    n = fields.xi.shape[0]
    U = np.zeros(n + 1)
    V = np.zeros(n + 1)
    U[1:-1] = -(fields.xi[1:] - fields.xi[:-1]) / grid.dx
    V[1:-1] = -(fields.zeta[1:] - fields.zeta[:-1]) / grid.dx
    return EdgeVelocities(U=U, V=V)


def _upwind(u, f):
    flux = np.zeros_like(u)
    inner = u[1:-1]
    flux[1:-1] = np.maximum(inner, 0.0) * f[:-1] + np.minimum(inner, 0.0) * f[1:]
    return flux


def compute_fluxes(vel, state):
    return EdgeFluxes(F=_upwind(vel.U, state.rho), G=_upwind(vel.V, state.eta))


def cfl_dt(vel, grid, controls):
    vmax = max(float(np.max(np.abs(vel.U))), float(np.max(np.abs(vel.V))))
    if vmax == 0.0:
        return controls.dt_max
    return min(controls.dt_max, controls.cfl_safety * grid.dx / (2.0 * vmax))


def diffusion_dt(state, params, controls):
    """Explicit-Euler stability bound of the cross-diffusion term.

    The positivity bound of :func:`cfl_dt` scales with ``1/|U|`` and the
    diffusive part of ``U`` is proportional to the gradient of
    ``rho + eta``, so it does not damp cell-to-cell oscillations of the
    sum.  Those are damped only when
    ``dt <= dx^2 / (2 eps max(rho + eta))``; the safety factor is applied
    as for :func:`cfl_dt`.
    """
    top = float(np.max(state.rho + state.eta))
    if top == 0.0:
        return controls.dt_max
    dx = state.grid.dx
    return min(controls.dt_max, controls.cfl_safety * dx * dx / (2.0 * params.epsilon * top))


def _update(rho, eta, fluxes, dt, dx):
    lam = dt / dx
    new_rho = rho - lam * (fluxes.F[1:] - fluxes.F[:-1])
    new_eta = eta - lam * (fluxes.G[1:] - fluxes.G[:-1])
    for name, arr in (("rho", new_rho), ("eta", new_eta)):
        i = int(np.argmin(arr))
        if arr[i] < REJECT_TOL:
            raise StepRejected(name, i, float(arr[i]))
        # roundoff-level negatives only
        np.maximum(arr, 0.0, out=arr)
    return new_rho, new_eta


def step(state, dt, kernels, params):
    """Advance ``state`` by one explicit Euler step of size ``dt``."""
    if not dt > 0:
        raise InvalidArgument(f"dt must be positive, got {dt}")
    fields = compute_potential_fields(state, kernels, params)
    vel = compute_velocities(fields, state.grid)
    fluxes = compute_fluxes(vel, state)
    rho, eta = _update(state.rho, state.eta, fluxes, dt, state.grid.dx)
    return SystemState(rho, eta, state.grid, state.time + dt)


@dataclass
class RunResult:
    snapshots: list
    reason: str
    steps: int
    final: SystemState = field(repr=False)

    @property
    def times(self):
        return np.array([s.time for s in self.snapshots])


def _near_boundary(rho, eta):
    k = min(BOUNDARY_CELLS, rho.shape[0] // 2)
    sigma = rho + eta
    top = float(np.max(sigma))
    if top == 0.0:
        return False
    thresh = 1e-10 * top
    return bool(np.any(sigma[:k] > thresh) or np.any(sigma[-k:] > thresh))


# -- fused kernels for the run loop --------------------------------------------
# They perform exactly the floating-point operations of compute_velocities,
# compute_fluxes and _update, so run() and repeated step() calls agree bitwise.

def _edge_velocity_py(phi, dx):
    u = np.zeros(phi.shape[0] + 1)
    u[1:-1] = -(phi[1:] - phi[:-1]) / dx
    return u


def _upwind_update_py(f, u, lam):
    flux = _upwind(u, f)
    new = f - lam * (flux[1:] - flux[:-1])
    return new, float(np.sum(np.abs(new - f)))


if njit is not None:
    @njit(cache=True, error_model="numpy")
    def _edge_velocity(phi, dx):
        n = phi.shape[0]
        u = np.zeros(n + 1)
        for i in range(1, n):
            u[i] = -(phi[i] - phi[i - 1]) / dx
        return u

    @njit(cache=True, error_model="numpy")
    def _upwind_update(f, u, lam):
        n = f.shape[0]
        flux = np.zeros(n + 1)
        for i in range(1, n):
            flux[i] = max(u[i], 0.0) * f[i - 1] + min(u[i], 0.0) * f[i]
        new = np.empty(n)
        change = 0.0
        for i in range(n):
            new[i] = f[i] - lam * (flux[i + 1] - flux[i])
            change += abs(new[i] - f[i])
        return new, change
else:  # pragma: no cover
    _edge_velocity = _edge_velocity_py
    _upwind_update = _upwind_update_py


def run(state0, params, controls, kernels=None, sink: Optional[Callable] = None,
        keep_snapshots=True, max_steps=None):
    """Time-step ``state0`` until ``t_end`` or a steady state.

    Each step uses the smaller of :func:`cfl_dt` and :func:`diffusion_dt`.

    Snapshots (the initial state, every ``controls.snapshot_every`` time
    units, and the final state) are appended to the result and passed to
    ``sink`` when given.  The steady criterion is
    ``||state_new - state_old||_1 / (dt (m1 + m2)) < steady_tol`` with the
    dx-weighted L1 norm.  ``max_steps`` caps the number of steps (reason
    ``"max_steps"``).

    A :class:`StepRejected` error propagates with the partial
    :class:`RunResult` attached as ``err.result``.
    """
    if np.any(state0.rho < 0) or np.any(state0.eta < 0):
        raise InvalidArgument("initial data must be non-negative")
    grid = state0.grid
    if kernels is None:
        kernels = build_kernels(params, grid)
    if any(k.N != grid.N for k in kernels):
        raise InvalidArgument(f"kernel tables built for N={kernels[0].N}, state has N={grid.N}")
    w11, w12, w21, w22 = (k.samples for k in kernels)
    dx = grid.dx
    eps = params.epsilon
    snaps = []

    def record(s):
        if keep_snapshots:
            snaps.append(s)
        if sink is not None:
            sink(s)

    record(state0)
    rho = np.array(state0.rho)
    eta = np.array(state0.eta)
    t = state0.time
    total = float(np.sum(rho) + np.sum(eta)) * dx
    if total == 0.0:
        return RunResult(snaps, "steady_state", 0, state0)

    every = controls.snapshot_every
    next_snap = t + every if every else math.inf
    warned = False
    n = 0
    reason = "time_reached"
    last = state0
    fresh = True  # last recorded snapshot is the current state
    while t < controls.t_end * (1 - 1e-14):
        if max_steps is not None and n >= max_steps:
            reason = "max_steps"
            break
        press = eps * (rho + eta)
        active = _active(rho, eta)
        xi = dx * _direct_sum(w11, rho, w12, eta, active) + press
        zeta = dx * _direct_sum(w22, eta, w21, rho, active) + press
        U = _edge_velocity(xi, dx)
        V = _edge_velocity(zeta, dx)
        vmax = max(float(np.max(np.abs(U))), float(np.max(np.abs(V))))
        dt = controls.dt_max
        if vmax > 0.0:
            dt = min(dt, controls.cfl_safety * dx / (2.0 * vmax))
        top = float(np.max(rho + eta))
        dt = min(dt, controls.cfl_safety * dx * dx / (2.0 * eps * top))
        dt = min(dt, controls.t_end - t, next_snap - t)
        lam = dt / dx
        new_rho, ch_rho = _upwind_update(rho, U, lam)
        new_eta, ch_eta = _upwind_update(eta, V, lam)
        for name, arr in (("rho", new_rho), ("eta", new_eta)):
            i = int(np.argmin(arr))
            if arr[i] < REJECT_TOL:
                err = StepRejected(name, i, float(arr[i]))
                last = SystemState(rho, eta, grid, t)
                record(last)
                err.result = RunResult(snaps, "step_rejected", n, last)
                raise err
            np.maximum(arr, 0.0, out=arr)
        change = (ch_rho + ch_eta) * dx
        rho, eta = new_rho, new_eta
        t_new = t + dt
        if every and abs(t_new - next_snap) <= 1e-12 * max(1.0, abs(next_snap)):
            t_new = next_snap
        t = t_new
        n += 1
        fresh = False
        if every and t >= next_snap:
            last = SystemState(rho, eta, grid, t)
            record(last)
            fresh = True
            next_snap += every
            if not warned and _near_boundary(rho, eta):
                warned = True
                warnings.warn(
                    f"mass within {BOUNDARY_CELLS} cells of the boundary at t={t:.4g}; "
                    "increase L", BoundaryWarning, stacklevel=2)
        if change / (dt * total) < controls.steady_tol:
            reason = "steady_state"
            break
    if not fresh:
        last = SystemState(rho, eta, grid, t)
        record(last)
    log.debug("run finished: %s after %d steps at t=%.6g", reason, n, t)
    return RunResult(snaps, reason, n, last)


def snapshot_rows(state):
    """Yield ``(t, x, rho, eta)`` rows for one snapshot."""
    for x, r, e in zip(state.grid.centers, state.rho, state.eta):
        yield state.time, float(x), float(r), float(e)
