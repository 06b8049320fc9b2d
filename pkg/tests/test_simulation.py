"""Forward simulation: exact datasets, seeded multinomial sampling, and
response curves."""

import numpy as np
import pytest

from povm_forge.calibration import linspace_probes
from povm_forge.detectors import apd_povm, outcome_probabilities
from povm_forge.fock import CoherentAmplitude, coherent_fock_distribution
from povm_forge.simulate import (
    TomographyDataset,
    exact_dataset,
    response_curve,
    sample_dataset,
)


class TestExactDataset:
    def test_rows_match_outcome_probabilities(self, apd_60, apd_probes):
        dataset = exact_dataset(apd_60, apd_probes, max_tail_mass=1.0)
        for i, probe in enumerate(apd_probes.probes):
            state = coherent_fock_distribution(probe.amplitude, 7)
            expected = outcome_probabilities(apd_60, state)
            np.testing.assert_allclose(
                dataset.frequencies[i], expected / expected.sum(), atol=1e-13
            )

    def test_rows_sum_to_one(self, builtin_tmd_48):
        probes = linspace_probes(0.0, 10.0, 30, dimension=30)
        dataset = exact_dataset(builtin_tmd_48, probes)
        np.testing.assert_allclose(dataset.frequencies.sum(axis=1), 1.0, atol=1e-14)
        assert dataset.shots_per_probe == 0

    def test_refuses_heavy_truncation_tails_and_names_the_probe(self, apd_60):
        probes = linspace_probes(0.5, 25.0, 4, dimension=8)
        with pytest.raises(ValueError, match="probe 1"):
            exact_dataset(apd_60, probes)

    def test_renormalize_disarms_the_guard(self, apd_60):
        probes = linspace_probes(0.5, 25.0, 4, dimension=8)
        dataset = exact_dataset(apd_60, probes, max_tail_mass=1.0, renormalize=True)
        np.testing.assert_allclose(dataset.frequencies.sum(axis=1), 1.0, atol=1e-14)


class TestSampleDataset:
    def test_same_seed_is_identical(self, apd_60, apd_probes):
        a = sample_dataset(apd_60, apd_probes, shots=500, seed=11, max_tail_mass=1.0)
        b = sample_dataset(apd_60, apd_probes, shots=500, seed=11, max_tail_mass=1.0)
        np.testing.assert_array_equal(a.frequencies, b.frequencies)

    def test_different_seeds_differ(self, apd_60, apd_probes):
        a = sample_dataset(apd_60, apd_probes, shots=500, seed=11, max_tail_mass=1.0)
        b = sample_dataset(apd_60, apd_probes, shots=500, seed=12, max_tail_mass=1.0)
        assert np.any(a.frequencies != b.frequencies)

    def test_degenerate_distribution_is_deterministic(self, builtin_tmd_48):
        # a vacuum probe can only produce the 0-click outcome
        probes = linspace_probes(0.0, 0.0, 1, dimension=30)
        dataset = sample_dataset(builtin_tmd_48, probes, shots=1000, seed=5)
        expected = np.zeros(9)
        expected[0] = 1.0
        np.testing.assert_array_equal(dataset.frequencies[0], expected)

    def test_frequencies_are_counts_over_shots(self, apd_60, apd_probes):
        shots = 137
        dataset = sample_dataset(apd_60, apd_probes, shots=shots, seed=3, max_tail_mass=1.0)
        counts = dataset.frequencies * shots
        np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)
        np.testing.assert_allclose(counts.sum(axis=1), shots, atol=1e-9)

    def test_million_shots_tracks_exact_probabilities(self):
        """Binomial standard error at 10^6 shots keeps every frequency
        within 5e-3 of the exact probability (seed-fixed regression)."""
        povm = apd_povm(0.5, truncation=30)
        probes = linspace_probes(1.0, 1.0, 1, dimension=31)
        exact = exact_dataset(povm, probes)
        sampled = sample_dataset(povm, probes, shots=1_000_000, seed=99)
        assert np.max(np.abs(sampled.frequencies - exact.frequencies)) < 5e-3

    def test_rejects_zero_shots(self, apd_60, apd_probes):
        with pytest.raises(ValueError):
            sample_dataset(apd_60, apd_probes, shots=0, seed=1)

    def test_probe_substreams_are_independent_of_set_size(self, apd_60):
        """Substreams keyed on (seed, probe index) make each probe's sample
        identical whether or not other probes are processed."""
        wide = linspace_probes(0.05, 4.0, 10, dimension=8)
        narrow = linspace_probes(0.05, 0.05, 1, dimension=8)
        a = sample_dataset(apd_60, wide, shots=400, seed=21, max_tail_mass=1.0)
        b = sample_dataset(apd_60, narrow, shots=400, seed=21)
        np.testing.assert_array_equal(a.frequencies[0], b.frequencies[0])


class TestTomographyDataset:
    def test_rejects_rows_not_summing_to_one(self, apd_probes):
        rows = np.full((60, 2), 0.4)
        with pytest.raises(ValueError):
            TomographyDataset(apd_probes, rows)

    def test_rejects_negative_frequencies(self, apd_probes):
        rows = np.zeros((60, 2))
        rows[:, 0] = 1.1
        rows[:, 1] = -0.1
        with pytest.raises(ValueError):
            TomographyDataset(apd_probes, rows)


class TestResponseCurve:
    def test_matches_exact_dataset_column(self, builtin_tmd_48):
        grid = np.linspace(0.0, 8.0, 20)
        probes = linspace_probes(0.0, 8.0, 20, dimension=30)
        dataset = exact_dataset(builtin_tmd_48, probes)
        for outcome in (0, 1, 5):
            curve = response_curve(builtin_tmd_48, outcome, grid)
            np.testing.assert_allclose(
                curve.probability, dataset.frequencies[:, outcome], atol=1e-9
            )

    def test_all_bins_click_curve_is_nondecreasing(self):
        """Outcome 8 (every bin fires) can only become more likely with
        brighter probes."""
        from povm_forge.detectors import builtin_convolution_matrix, loss_matrix, tmd_povm

        trunc = 140
        povm = tmd_povm(
            builtin_convolution_matrix(max_photons=trunc), loss_matrix(0.48, trunc)
        )
        curve = response_curve(povm, 8, np.linspace(0.0, 40.0, 100))
        assert np.all(np.diff(curve.probability) >= -1e-12)

    def test_rejects_invalid_outcome(self, apd_60):
        with pytest.raises(ValueError):
            response_curve(apd_60, 2, np.linspace(0, 1, 5))
