"""Wigner representation: Laguerre recurrence against independent oracles,
trace/overlap identities, and radial node counting."""

import numpy as np
import pytest
from scipy.special import eval_laguerre

from povm_forge.detectors import PovmElement, apd_povm
from povm_forge.fock import CoherentAmplitude, coherent_fock_distribution
from povm_forge.wigner import (
    WignerField,
    WignerGrid,
    diagonal_wigner,
    fock_wigner,
    povm_wigner,
    radial_nodes,
    radial_profile,
    state_wigner,
    wigner_overlap,
)


class TestFockWigner:
    def test_vacuum_peak_value(self):
        # W_0(0, 0) = 1 / (pi hbar)
        assert fock_wigner(0, 0.0, 0.0) == pytest.approx(1.0 / np.pi, rel=1e-12)

    def test_matches_scipy_laguerre(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-3, 3, size=40)
        p = rng.uniform(-3, 3, size=40)
        r2 = x * x + p * p
        for n in range(8):
            expected = (-1.0) ** n / np.pi * np.exp(-r2) * eval_laguerre(n, 2 * r2)
            np.testing.assert_allclose(fock_wigner(n, x, p), expected, atol=1e-12)

    def test_one_photon_negative_at_origin(self):
        assert fock_wigner(1, 0.0, 0.0) == pytest.approx(-1.0 / np.pi, rel=1e-12)

    def test_hbar_scaling(self):
        # W scales as (1/hbar) f(r^2/hbar)
        assert fock_wigner(0, 1.0, 0.0, hbar=2.0) == pytest.approx(
            np.exp(-0.5) / (2 * np.pi), rel=1e-12
        )

    def test_rejects_negative_photon_number(self):
        with pytest.raises(ValueError):
            fock_wigner(-1, 0.0, 0.0)


class TestDiagonalWigner:
    def test_weighted_sum_of_fock_terms(self):
        grid = WignerGrid(-4, 4, -4, 4, 51)
        weights = np.array([0.5, 0.2, 0.3])
        field = diagonal_wigner(weights, grid)
        x, p = grid.mesh()
        expected = sum(weights[n] * fock_wigner(n, x, p) for n in range(3))
        np.testing.assert_allclose(field.values, expected, atol=1e-12)

    def test_volume_equals_trace(self):
        grid = WignerGrid(-7, 7, -7, 7, 401)
        weights = np.array([0.4, 0.3, 0.2, 0.1])
        field = diagonal_wigner(weights, grid)
        assert field.volume() == pytest.approx(weights.sum(), abs=1e-4)

    def test_coherent_state_volume_is_one(self):
        grid = WignerGrid(-8, 8, -8, 8, 401)
        state = coherent_fock_distribution(CoherentAmplitude(2.0), 40)
        field = state_wigner(state, grid)
        assert field.volume() == pytest.approx(1.0, abs=1e-4)

    def test_rejects_empty_weights(self):
        with pytest.raises(ValueError):
            diagonal_wigner(np.array([]), WignerGrid())


class TestWignerOverlap:
    def test_recovers_outcome_probability(self, apd_60):
        grid = WignerGrid(-6, 6, -6, 6, 301)
        state = coherent_fock_distribution(CoherentAmplitude(1.0), 7, renormalize=True)
        state_field = state_wigner(state, grid)
        for element in apd_60.elements:
            expected = float(element.diag @ state.probs)
            overlap = wigner_overlap(state_field, povm_wigner(element, grid))
            assert overlap == pytest.approx(expected, abs=1e-4)

    def test_orthogonal_fock_states_have_zero_overlap(self):
        grid = WignerGrid(-7, 7, -7, 7, 401)
        w0 = diagonal_wigner(np.array([1.0]), grid)
        w1 = diagonal_wigner(np.array([0.0, 1.0]), grid)
        assert wigner_overlap(w0, w1) == pytest.approx(0.0, abs=1e-6)
        assert wigner_overlap(w0, w0) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_mismatched_grids(self):
        a = diagonal_wigner(np.array([1.0]), WignerGrid(-4, 4, -4, 4, 51))
        b = diagonal_wigner(np.array([1.0]), WignerGrid(-5, 5, -5, 5, 51))
        with pytest.raises(ValueError):
            wigner_overlap(a, b)


class TestRadialProfile:
    def test_matches_field_along_positive_x_axis(self):
        weights = np.array([0.3, 0.4, 0.3])
        r, values = radial_profile(weights, 4.0, 101)
        x = r.reshape(-1, 1)
        grid_vals = sum(
            weights[n] * fock_wigner(n, r, np.zeros_like(r)) for n in range(3)
        )
        np.testing.assert_allclose(values, grid_vals, atol=1e-12)

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            radial_profile(np.array([1.0]), -1.0, 50)
        with pytest.raises(ValueError):
            radial_profile(np.array([1.0]), 1.0, 1)


class TestRadialNodes:
    def test_fock_state_n_has_n_nodes(self):
        # L_n has n positive roots, all below r^2 = 4n + 2
        for n in range(7):
            weights = np.zeros(n + 1)
            weights[n] = 1.0
            element = PovmElement(weights, n)
            assert radial_nodes(element, r_max=8.0, samples=4001) == n

    def test_vacuum_has_no_nodes(self):
        element = PovmElement(np.array([1.0, 0.0]), 0)
        assert radial_nodes(element, r_max=6.0, samples=500) == 0

    def test_count_is_sampling_stable(self):
        weights = np.zeros(6)
        weights[5] = 1.0
        element = PovmElement(weights, 5)
        counts = {
            radial_nodes(element, r_max=8.0, samples=s) for s in (801, 2001, 8001)
        }
        assert counts == {5}

    def test_rejects_coarse_sampling(self):
        with pytest.raises(ValueError):
            radial_nodes(PovmElement(np.array([1.0]), 0), 5.0, samples=50)


class TestGridAndField:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            WignerGrid(x_min=2, x_max=-2)
        with pytest.raises(ValueError):
            WignerGrid(points_per_axis=1)
        with pytest.raises(ValueError):
            WignerGrid(hbar=0.0)

    def test_field_shape_validation(self):
        with pytest.raises(ValueError):
            WignerField(WignerGrid(points_per_axis=11), np.zeros((5, 5)))

    def test_default_grid_extent(self):
        grid = WignerGrid()
        assert grid.x_axis()[0] == -6.0
        assert grid.x_axis()[-1] == 6.0
        assert grid.points_per_axis == 301
