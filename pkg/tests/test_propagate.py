import math

import numpy as np
import pytest

from qrlab.errors import CausticError, CollinearityError, DomainError
from qrlab.families import coherent_state
from qrlab.grids import GridFunction, PeriodicGrid
from qrlab.propagate import (
    KernelEstimate,
    apply_parametrix,
    duhamel_solve,
    eikonal_residual,
    eta_grid,
    fit_kernel_exponents,
    reference_propagator,
    restricted_kernel_decay,
    solve_eikonal,
)
from qrlab.symbols import (
    SymbolField,
    free_hamiltonian,
    frequency_window,
    kinetic_plus_potential,
    pendulum_hamiltonian,
)


def strong_pendulum():
    return kinetic_plus_potential(
        kin=lambda xi: 0.5 * xi[0] ** 2,
        kin_grad=lambda xi: np.asarray(xi, float),
        kin_hess=lambda xi: np.ones((1, 1) + np.asarray(xi)[0].shape),
        pot=lambda x: 2.0 * np.cos(x[0]),
        pot_grad=lambda x: -2.0 * np.sin(np.asarray(x, float)),
        name="strong_pendulum",
    )


class TestEikonal:
    def test_free_phase_closed_form(self):
        grid = PeriodicGrid(1, 64)
        etas = eta_grid(grid, 0.1)
        times = np.linspace(0, 0.5, 5)
        table = solve_eikonal(free_hamiltonian(1), grid, etas, times)
        x = grid.axis_points()
        for j, t in enumerate(times):
            expect = x[:, None] * etas[None, :] - t * etas[None, :] ** 2 / 2
            assert np.max(np.abs(table.phi[j] - expect)) < 1e-8
            assert np.max(np.abs(table.xi[j] - etas[None, :])) < 1e-8

    def test_pendulum_residual(self):
        grid = PeriodicGrid(1, 128)
        etas = eta_grid(grid, 0.05)
        times = np.linspace(0, 0.4, 33)
        table = solve_eikonal(pendulum_hamiltonian(), grid, etas, times)
        assert eikonal_residual(table) < 1e-6

    def test_caustic_detected(self):
        grid = PeriodicGrid(1, 128)
        times = np.linspace(0, 1.5, 16)
        with pytest.raises(CausticError) as err:
            solve_eikonal(strong_pendulum(), grid, np.array([0.0]), times)
        assert 0 < err.value.critical_time <= 1.5


class TestParametrix:
    def test_identity_at_zero(self):
        grid = PeriodicGrid(1, 128)
        h = 0.05
        table = solve_eikonal(pendulum_hamiltonian(), grid, eta_grid(grid, h),
                              np.array([0.0, 0.1]))
        u = coherent_state([0.5], [0.3], h, grid)
        out = apply_parametrix(table, u, 0.0)
        assert np.max(np.abs(out.values - u.values)) < 1e-12

    def test_free_is_exact(self):
        grid = PeriodicGrid(1, 128)
        h = 0.05
        sym = free_hamiltonian(1)
        table = solve_eikonal(sym, grid, eta_grid(grid, h), np.array([0.0, 0.25, 0.5]))
        u = coherent_state([0.0], [0.5], h, grid)
        got = apply_parametrix(table, u, 0.5)
        ref = reference_propagator(sym, u, 0.5)
        assert np.max(np.abs(got.values - ref.values)) < 1e-7

    def test_pendulum_error_shrinks_with_h(self):
        grid = PeriodicGrid(1, 256)
        sym = pendulum_hamiltonian()
        t = 0.3
        errs = []
        for h in (0.1, 0.05):
            table = solve_eikonal(sym, grid, eta_grid(grid, h), np.array([0.0, t]))
            u = coherent_state([0.0], [0.0], h, grid)
            got = apply_parametrix(table, u, t)
            ref = reference_propagator(sym, u, t)
            errs.append(GridFunction(grid, got.values - ref.values, h).norm(2))
        assert errs[1] < 0.7 * errs[0]

    def test_eta_mismatch_rejected(self):
        grid = PeriodicGrid(1, 64)
        table = solve_eikonal(free_hamiltonian(1), grid, eta_grid(grid, 0.1),
                              np.array([0.0, 0.1]))
        u = coherent_state([0.0], [0.0], 0.07, grid)
        with pytest.raises(DomainError):
            apply_parametrix(table, u, 0.1)


class TestReference:
    def test_multiplier_plane_wave(self):
        grid = PeriodicGrid(1, 64)
        h = 0.1
        x = grid.axis_points()
        u = GridFunction(grid, np.exp(1j * 4 * x), h)
        out = reference_propagator(free_hamiltonian(1), u, 0.3)
        expect = np.exp(-1j * 0.3 * (h * 4) ** 2 / (2 * h)) * u.values
        assert np.max(np.abs(out.values - expect)) < 1e-12

    def test_split_step_unitary(self):
        grid = PeriodicGrid(1, 256)
        h = 0.05
        u = coherent_state([0.0], [0.5], h, grid)
        out = reference_propagator(pendulum_hamiltonian(), u, 0.3)
        assert abs(out.norm(2) - 1.0) < 1e-10

    def test_split_step_converged(self):
        grid = PeriodicGrid(1, 256)
        h = 0.05
        u = coherent_state([0.0], [0.5], h, grid)
        a = reference_propagator(pendulum_hamiltonian(), u, 0.3)
        b = reference_propagator(pendulum_hamiltonian(), u, 0.3, steps=2000)
        assert GridFunction(grid, a.values - b.values, h).norm(2) < 1e-5


class TestDuhamel:
    def test_manufactured_solution_second_order(self):
        grid = PeriodicGrid(1, 64)
        h = 0.1
        m, omega = 3, 0.7
        x = grid.axis_points()
        u0 = GridFunction(grid, np.exp(1j * m * x), h)
        a_m = (h * m) ** 2 / 2
        sym = free_hamiltonian(1)

        def forcing(s):
            return GridFunction(grid, (omega + a_m / h) * np.exp(1j * omega * s) * u0.values, h)

        t = 0.5
        exact = np.exp(1j * omega * t) * u0.values
        errs = []
        for steps in (16, 32, 64):
            got = duhamel_solve(sym, u0, forcing, t, steps=steps)
            errs.append(GridFunction(grid, got.values - exact, h).norm(2))
        rate = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
        assert min(rate) > 1.8


class TestKernelDecay:
    def test_free_point_kernel_near_closed_form(self):
        grid = PeriodicGrid(1, 4096)
        window = frequency_window(1.5, 3.0, dim=1)
        h = 2 ** -7
        ests = restricted_kernel_decay(free_hamiltonian(1), window, [h],
                                       lambda h: [0.25], grid, restriction="point")
        expect = (2 * math.pi * h * 0.25) ** -0.5
        assert ests[0].sup_value == pytest.approx(expect, rel=0.03)

    def test_fit_exact_recovery(self):
        ests = [KernelEstimate(h, tau, 2.0 * h ** -0.5 * (h + tau) ** -0.5,
                               1.5 * h ** -0.25 * (h + tau) ** -0.75)
                for h in (0.1, 0.05, 0.025)
                for tau in (0.05, 0.1, 0.3)]
        fit = fit_kernel_exponents(ests, "sup")
        assert fit.mu == pytest.approx(0.5, abs=1e-9)
        assert fit.sigma == pytest.approx(0.5, abs=1e-9)
        fit2 = fit_kernel_exponents(ests, "l2")
        assert fit2.mu == pytest.approx(0.25, abs=1e-9)
        assert fit2.sigma == pytest.approx(0.75, abs=1e-9)

    def test_fit_robust_to_noise(self):
        rng = np.random.default_rng(11)
        ests = [KernelEstimate(h, tau,
                               h ** -0.5 * (h + tau) ** -0.5 * (1 + 0.01 * rng.standard_normal()),
                               1.0)
                for h in (0.1, 0.05, 0.025, 0.0125)
                for tau in (0.05, 0.1, 0.2, 0.4)]
        fit = fit_kernel_exponents(ests, "sup")
        assert fit.mu == pytest.approx(0.5, abs=0.05)
        assert fit.sigma == pytest.approx(0.5, abs=0.05)

    def test_collinear_design_rejected(self):
        ests = [KernelEstimate(h, h, 1.0, 1.0) for h in (0.1, 0.05, 0.025)]
        with pytest.raises(CollinearityError):
            fit_kernel_exponents(ests, "sup")
