import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossdiff import fv_scheme
from crossdiff.analytic_aa import solve_batman
from crossdiff.errors import InvalidArgument, StepRejected
from crossdiff.fv_scheme import (BoundaryWarning, EdgeVelocities, PotentialField, StepControls,
                                 build_kernels, cfl_dt, compute_fluxes, compute_potential_fields,
                                 compute_velocities, diffusion_dt, run, snapshot_rows, step)
from crossdiff.model_core import (ModelParams, PiecewiseConstant, PotentialSpec, SystemState,
                                  attractive_attractive, attractive_repulsive, build_grid,
                                  project_initial_data)

FAMILIES = ["quadratic", "abs", "power:1.5", "power_normalized:3", "morse:1", "-abs", "-morse:0.5"]


def _state(rho, eta, L=3.0, N=None):
    rho = np.asarray(rho, float)
    g = build_grid(L, N or rho.size)
    return SystemState(rho, np.asarray(eta, float), g)


def _random_params(rng, eps=None):
    pots = tuple(PotentialSpec.parse(s) for s in rng.choice(FAMILIES, 4))
    return ModelParams(eps if eps is not None else float(rng.uniform(0.05, 1.0)), pots)


def _next_dt(state, kernels, params, controls):
    f = compute_potential_fields(state, kernels, params)
    v = compute_velocities(f, state.grid)
    return min(cfl_dt(v, state.grid, controls), diffusion_dt(state, params, controls))


class TestPotentialFields:
    def test_zero_state(self):
        s = _state(np.zeros(8), np.zeros(8))
        p = attractive_attractive(0.3)
        f = compute_potential_fields(s, build_kernels(p, s.grid), p)
        np.testing.assert_array_equal(f.xi, 0.0)
        np.testing.assert_array_equal(f.zeta, 0.0)

    def test_single_cell(self):
        g = build_grid(2.0, 16)
        j = 5
        rho = np.zeros(16)
        rho[j] = 1.0 / g.dx
        s = SystemState(rho, np.zeros(16), g)
        p = ModelParams(0.2, (PotentialSpec("abs"),) * 4)
        f = compute_potential_fields(s, build_kernels(p, g), p)
        np.testing.assert_allclose(f.xi, np.abs(g.centers - g.centers[j]) + 0.2 * rho, atol=1e-14)

    def test_batman_potential_flat_on_support(self):
        prof = solve_batman(0.6, 0.1, 0.12)
        g = build_grid(3.0, 800)
        s = SystemState(project_initial_data(prof.density("rho"), g),
                        project_initial_data(prof.density("eta"), g), g)
        p = attractive_attractive(0.12)
        f = compute_potential_fields(s, build_kernels(p, g), p)
        inside = s.rho > 0
        inside[np.flatnonzero(inside)[[0, -1]]] = False  # partially covered end cells
        assert np.ptp(f.xi[inside]) < 1e-3

    def test_mismatched_kernels(self):
        p = attractive_attractive(0.3)
        s = _state(np.ones(8), np.ones(8))
        with pytest.raises(InvalidArgument):
            compute_potential_fields(s, build_kernels(p, build_grid(3.0, 9)), p)

    def test_matches_dense_convolution(self):
        rng = np.random.default_rng(3)
        g = build_grid(2.0, 64)
        rho = np.where(rng.random(64) < 0.5, rng.random(64), 0.0)
        eta = np.where(rng.random(64) < 0.5, rng.random(64), 0.0)
        p = _random_params(rng)
        k = build_kernels(p, g)
        f = compute_potential_fields(SystemState(rho, eta, g), k, p)
        idx = np.arange(64)[:, None] - np.arange(64)[None, :] + 63
        xi = g.dx * (k[0].samples[idx] @ rho + k[1].samples[idx] @ eta) + p.epsilon * (rho + eta)
        np.testing.assert_allclose(f.xi, xi, rtol=1e-13, atol=1e-13)

    def test_numba_kernel_matches_fallback_bitwise(self):
        rng = np.random.default_rng(4)
        n = 50
        wa, wb = rng.random(2 * n - 1), rng.random(2 * n - 1)
        fa = np.where(rng.random(n) < 0.6, rng.random(n), 0.0)
        fb = np.where(rng.random(n) < 0.6, rng.random(n), 0.0)
        act = fv_scheme._active(fa, fb)
        np.testing.assert_array_equal(fv_scheme._direct_sum(wa, fa, wb, fb, act),
                                      fv_scheme._direct_sum_py(wa, fa, wb, fb, act))


class TestVelocitiesAndFluxes:
    def test_difference_quotient(self):
        v = compute_velocities(PotentialField(np.array([0.0, 1.0]), np.zeros(2)), build_grid(0.5, 2))
        np.testing.assert_array_equal(v.U, [0.0, -2.0, 0.0])

    def test_constant_field(self):
        v = compute_velocities(PotentialField(np.full(6, 3.0), np.full(6, -1.0)), build_grid(1, 6))
        np.testing.assert_array_equal(v.U, 0.0)
        np.testing.assert_array_equal(v.V, 0.0)

    def test_symmetric_state_gives_antisymmetric_velocity(self):
        g = build_grid(2.0, 40)
        x = g.centers
        s = SystemState(np.maximum(1 - x ** 2, 0), np.maximum(0.5 - np.abs(x), 0), g)
        p = attractive_attractive(0.4)
        v = compute_velocities(compute_potential_fields(s, build_kernels(p, g), p), g)
        np.testing.assert_allclose(v.U, -v.U[::-1], atol=1e-13)
        np.testing.assert_allclose(v.V, -v.V[::-1], atol=1e-13)

    @pytest.mark.parametrize("u, flux", [(1.0, 2.0), (-1.0, -5.0), (0.0, 0.0)])
    def test_upwind(self, u, flux):
        s = _state([2.0, 5.0], [0.0, 0.0])
        f = compute_fluxes(EdgeVelocities(np.array([0.0, u, 0.0]), np.zeros(3)), s)
        assert f.F[1] == flux
        assert f.F[0] == f.F[-1] == f.G[0] == f.G[-1] == 0.0


class TestCfl:
    def _vel(self, u, v):
        return EdgeVelocities(np.array([0.0, u, -u, 0.0]), np.array([0.0, v, 0.0, 0.0]))

    def test_formula(self):
        g = build_grid(0.015, 3)  # dx = 0.01
        assert cfl_dt(self._vel(1.0, 0.5), g, StepControls(1.0, cfl_safety=1.0)) == pytest.approx(0.005)

    def test_zero_velocity(self):
        assert cfl_dt(self._vel(0.0, 0.0), build_grid(1, 3), StepControls(1.0, dt_max=0.07)) == 0.07

    def test_safety(self):
        g = build_grid(0.015, 3)
        assert cfl_dt(self._vel(1.0, 0.5), g, StepControls(1.0, cfl_safety=0.5)) == pytest.approx(0.0025)

    @pytest.mark.parametrize("kw", [{"t_end": 0}, {"t_end": 1, "cfl_safety": 0},
                                    {"t_end": 1, "cfl_safety": 1.5}, {"t_end": 1, "steady_tol": -1},
                                    {"t_end": 1, "snapshot_every": 0}])
    def test_controls_validation(self, kw):
        with pytest.raises(InvalidArgument):
            StepControls(**kw)

    def test_diffusion_dt(self):
        s = _state([0.0, 2.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], L=1.0)  # dx = 0.5
        p = attractive_attractive(0.5)
        assert diffusion_dt(s, p, StepControls(1.0, cfl_safety=1.0)) == pytest.approx(0.25 / 3.0)


class TestStep:
    def test_zero_velocity_leaves_state(self):
        g = build_grid(1, 8)
        s = SystemState(np.zeros(8), np.zeros(8), g)
        p = attractive_attractive(0.3)
        out = step(s, 0.01, build_kernels(p, g), p)
        np.testing.assert_array_equal(out.rho, 0.0)
        assert out.time == pytest.approx(0.01)

    def test_mass_and_time(self):
        rng = np.random.default_rng(1)
        g = build_grid(3.0, 128)
        s = SystemState(rng.random(128), rng.random(128), g, time=2.0)
        p = _random_params(rng)
        k = build_kernels(p, g)
        dt = _next_dt(s, k, p, StepControls(1.0))
        out = step(s, dt, k, p)
        for a, b in zip(s.masses(), out.masses()):
            assert abs(a - b) <= 1e-13 * a
        assert out.time == 2.0 + dt

    def test_cfl_violation_rejected(self):
        g = build_grid(1.0, 20)
        rho = np.zeros(20)
        rho[8:12] = 1.0
        s = SystemState(rho, np.zeros(20), g)
        p = attractive_attractive(0.1)
        with pytest.raises(StepRejected) as info:
            step(s, 5.0, build_kernels(p, g), p)
        assert info.value.species == "rho"
        assert info.value.value < 0

    def test_rejects_nonpositive_dt(self):
        s = _state(np.ones(4), np.ones(4))
        p = attractive_attractive(1.0)
        with pytest.raises(InvalidArgument):
            step(s, 0.0, build_kernels(p, s.grid), p)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_positivity_over_100_steps(self, seed):
        rng = np.random.default_rng(seed)
        g = build_grid(3.0, 96)
        mask = rng.random(96) < 0.4
        s = SystemState(np.where(mask, rng.random(96) * 3, 0.0), np.where(~mask, rng.random(96), 0.0), g)
        p = _random_params(rng)
        k = build_kernels(p, g)
        c = StepControls(1.0, cfl_safety=float(rng.uniform(0.1, 1.0)))
        for _ in range(100):
            s = step(s, _next_dt(s, k, p, c), k, p)
            assert s.rho.min() >= 0 and s.eta.min() >= 0


def _two_bumps(N=200, L=3.0, shift=0.0):
    g = build_grid(L, N)
    rho = project_initial_data(PiecewiseConstant.indicator(-0.8 + shift, 0.1 + shift, 0.6), g)
    eta = project_initial_data(PiecewiseConstant(((-0.2 + shift, 0.5 + shift, 0.3),
                                                  (0.6 + shift, 0.9 + shift, 0.1))), g)
    return SystemState(rho, eta, g)


class TestRun:
    def test_empty_state_is_steady(self):
        s = _state(np.zeros(10), np.zeros(10))
        r = run(s, attractive_attractive(1.0), StepControls(5.0))
        assert r.reason == "steady_state" and r.steps == 0

    def test_rejects_negative_initial_data(self):
        with pytest.raises(InvalidArgument):
            run(_state([-1.0, 1.0], [0.0, 0.0]), attractive_attractive(1.0), StepControls(1.0))

    def test_matches_repeated_steps_bitwise(self):
        s0 = _two_bumps()
        p = ModelParams(0.3, tuple(PotentialSpec.parse(x) for x in ("quadratic", "morse:1", "-abs", "power:1.5")))
        k = build_kernels(p, s0.grid)
        c = StepControls(10.0)
        r = run(s0, p, c, kernels=k, max_steps=60)
        assert r.reason == "max_steps" and r.steps == 60
        s = s0
        for _ in range(60):
            s = step(s, _next_dt(s, k, p, c), k, p)
        np.testing.assert_array_equal(r.final.rho, s.rho)
        np.testing.assert_array_equal(r.final.eta, s.eta)
        assert r.final.time == s.time

    def test_snapshots_and_end_time(self):
        r = run(_two_bumps(N=200, L=6.0), attractive_repulsive(0.5), StepControls(1.0, snapshot_every=0.25))
        np.testing.assert_allclose(r.times, [0.0, 0.25, 0.5, 0.75, 1.0], rtol=0, atol=1e-12)
        assert r.reason == "time_reached"
        assert r.final is r.snapshots[-1]

    def test_sink_and_no_snapshots(self):
        seen = []
        r = run(_two_bumps(N=100), attractive_attractive(0.5), StepControls(0.5, snapshot_every=0.1),
                sink=seen.append, keep_snapshots=False)
        assert r.snapshots == [] and len(seen) == 6

    def test_mass_conservation_over_many_steps(self):
        s0 = _two_bumps(N=100)
        r = run(s0, attractive_repulsive(0.4), StepControls(100.0), max_steps=10_000)
        for a, b in zip(s0.masses(), r.final.masses()):
            assert abs(a - b) < 1e-12 * a

    def test_translation_equivariance_exact(self):
        N, L, k = 200, 3.0, 7
        p = attractive_repulsive(0.3)
        s0 = _two_bumps(N, L)
        shifted = SystemState(np.roll(s0.rho, k), np.roll(s0.eta, k), s0.grid)
        a = run(s0, p, StepControls(0.5))
        b = run(shifted, p, StepControls(0.5))
        assert a.steps == b.steps
        for x, y in ((a.final.rho, b.final.rho), (a.final.eta, b.final.eta)):
            x = np.roll(x, k)
            bulk = x > 1e-30  # far tails feel the zero-flux ends at different distances
            np.testing.assert_array_equal(x[bulk], y[bulk])
            np.testing.assert_allclose(x, y, rtol=0, atol=1e-30)

    def test_reflection_equivariance(self):
        s0 = _two_bumps()
        p = attractive_attractive(0.25)
        refl = SystemState(s0.rho[::-1], s0.eta[::-1], s0.grid)
        a = run(s0, p, StepControls(0.5))
        b = run(refl, p, StepControls(0.5))
        np.testing.assert_allclose(a.final.rho[::-1], b.final.rho, rtol=0, atol=1e-13)
        np.testing.assert_allclose(a.final.eta[::-1], b.final.eta, rtol=0, atol=1e-13)

    def test_batman_profile_is_nearly_fixed(self):
        prof = solve_batman(0.6, 0.1, 0.12)
        g = build_grid(3.0, 800)
        s = SystemState(project_initial_data(prof.density("rho"), g),
                        project_initial_data(prof.density("eta"), g), g)
        r = run(s, attractive_attractive(0.12), StepControls(1.0), keep_snapshots=False)
        dist = (np.abs(r.final.rho - s.rho).sum() + np.abs(r.final.eta - s.eta).sum()) * g.dx
        assert dist < 5 * g.dx

    @pytest.mark.xfail(strict=True, reason="a slow translation mode keeps the relative change near "
                                           "2e-5, far above steady_tol = 1e-8")
    def test_batman_profile_reaches_steady_criterion(self):
        prof = solve_batman(0.6, 0.1, 0.12)
        g = build_grid(3.0, 800)
        s = SystemState(project_initial_data(prof.density("rho"), g),
                        project_initial_data(prof.density("eta"), g), g)
        r = run(s, attractive_attractive(0.12), StepControls(1.0), keep_snapshots=False)
        assert r.reason == "steady_state"

    def test_step_rejected_carries_partial_result(self, monkeypatch):
        monkeypatch.setattr(fv_scheme, "REJECT_TOL", np.inf)  # any step counts as negative
        with pytest.raises(StepRejected) as info:
            run(_two_bumps(N=50), attractive_attractive(0.5), StepControls(1.0))
        assert info.value.result.reason == "step_rejected"
        assert info.value.result.snapshots[-1].time == 0.0

    def test_boundary_warning(self):
        g = build_grid(1.0, 40)
        rho = project_initial_data(PiecewiseConstant.indicator(-1.0, -0.8, 0.5), g)
        s = SystemState(rho, np.zeros(40), g)
        with pytest.warns(BoundaryWarning):
            run(s, attractive_attractive(0.5), StepControls(0.02, snapshot_every=0.01))

    def test_no_warning_away_from_boundary(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error", BoundaryWarning)
            run(_two_bumps(N=100), attractive_attractive(0.5), StepControls(0.1, snapshot_every=0.05))

    def test_snapshot_rows(self):
        s = _state([1.0, 2.0], [3.0, 4.0], L=1.0)
        assert list(snapshot_rows(s)) == [(0.0, -0.5, 1.0, 3.0), (0.0, 0.5, 2.0, 4.0)]
