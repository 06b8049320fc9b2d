"""Detector forward models: loss matrix, bin convolution (three independent
evaluation routes), the shipped 8-bin dataset, and POVM assembly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from povm_forge.detectors import (
    PAPER_TMD_8BIN,
    ConvolutionMatrix,
    PovmElement,
    PovmSet,
    apd_povm,
    builtin_convolution_matrix,
    builtin_convolution_raw,
    convolution_bruteforce,
    convolution_closed_form,
    convolution_matrix,
    loss_matrix,
    outcome_probabilities,
    tmd_povm,
)
from povm_forge.fock import CoherentAmplitude, coherent_fock_distribution


def random_bin_probs(rng, n_bins):
    raw = rng.random(n_bins) + 0.05
    return raw / raw.sum()


class TestApdPovm:
    def test_no_click_is_geometric_in_photon_number(self):
        povm = apd_povm(0.3, truncation=6)
        n = np.arange(7)
        np.testing.assert_allclose(povm.elements[0].diag, 0.7**n, rtol=1e-14)
        np.testing.assert_allclose(povm.elements[1].diag, 1 - 0.7**n, rtol=1e-13)

    def test_unit_efficiency_clicks_on_any_photon(self):
        povm = apd_povm(1.0, truncation=4)
        np.testing.assert_array_equal(povm.elements[0].diag, [1, 0, 0, 0, 0])

    def test_zero_efficiency_never_clicks(self):
        povm = apd_povm(0.0, truncation=4)
        np.testing.assert_array_equal(povm.elements[1].diag, np.zeros(5))

    def test_rejects_bad_efficiency(self):
        with pytest.raises(ValueError):
            apd_povm(1.2, truncation=3)


class TestLossMatrix:
    def test_matches_binomial_pmf(self):
        loss = loss_matrix(0.48, truncation=12)
        for n in range(13):
            expected = stats.binom.pmf(np.arange(n + 1), n, 1 - 0.48)
            np.testing.assert_allclose(loss.entries[: n + 1, n], expected, rtol=1e-10)

    def test_no_loss_is_identity(self):
        loss = loss_matrix(0.0, truncation=5)
        np.testing.assert_allclose(loss.entries, np.eye(6), atol=1e-15)

    def test_total_loss_maps_everything_to_vacuum(self):
        loss = loss_matrix(1.0, truncation=5)
        np.testing.assert_allclose(loss.entries[0], np.ones(6), atol=1e-15)

    def test_columns_are_stochastic(self):
        loss = loss_matrix(0.31, truncation=40)
        np.testing.assert_allclose(loss.entries.sum(axis=0), 1.0, atol=1e-13)

    @given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
    @settings(max_examples=40, deadline=None)
    def test_vacuum_output_monotone_in_loss(self, a, b):
        """More loss can only raise the chance that every photon is lost."""
        lo, hi = sorted((a, b))
        n = 6
        assert (
            loss_matrix(hi, n).entries[0, n] >= loss_matrix(lo, n).entries[0, n] - 1e-12
        )

    def test_rejects_photon_gain(self):
        entries = np.eye(3)
        entries[2, 1] = 0.5
        entries[1, 1] = 0.5
        with pytest.raises(ValueError):
            from povm_forge.detectors import LossMatrix

            LossMatrix(entries, 0.5)


class TestConvolutionOracles:
    """The dynamic program, the exhaustive enumeration, and the literal
    route-counting sum are three independent evaluations of one quantity."""

    def test_dp_equals_bruteforce_uniform_bins(self):
        for n_bins in (2, 3, 4, 8):
            probs = np.full(n_bins, 1.0 / n_bins)
            conv = convolution_matrix(probs, max_photons=6)
            for n in range(7):
                np.testing.assert_allclose(
                    conv.entries[:, n],
                    convolution_bruteforce(probs, n),
                    atol=1e-12,
                )

    def test_dp_equals_bruteforce_random_bins(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n_bins = rng.integers(2, 5)
            probs = random_bin_probs(rng, n_bins)
            conv = convolution_matrix(probs, max_photons=6)
            for n in range(7):
                np.testing.assert_allclose(
                    conv.entries[:, n],
                    convolution_bruteforce(probs, n),
                    atol=1e-12,
                )

    def test_dp_equals_closed_form(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n_bins = rng.integers(2, 5)
            probs = random_bin_probs(rng, n_bins)
            conv = convolution_matrix(probs, max_photons=5)
            for n in range(6):
                np.testing.assert_allclose(
                    conv.entries[:, n],
                    convolution_closed_form(probs, n),
                    atol=1e-12,
                )

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.05, max_value=1), min_size=2, max_size=4),
        st.integers(min_value=0, max_value=5),
    )
    def test_property_dp_equals_bruteforce(self, raw, photons):
        probs = np.array(raw) / np.sum(raw)
        conv = convolution_matrix(probs, max_photons=photons)
        np.testing.assert_allclose(
            conv.entries[:, photons], convolution_bruteforce(probs, photons), atol=1e-12
        )

    def test_single_photon_occupies_one_bin(self):
        conv = convolution_matrix(np.array([0.2, 0.3, 0.5]), max_photons=3)
        np.testing.assert_allclose(conv.entries[:, 1], [0, 1, 0, 0], atol=1e-15)

    def test_two_photons_two_uniform_bins(self):
        # both in one bin: 2 * (1/2)^2 = 1/2; one in each: 1/2
        conv = convolution_matrix(np.array([0.5, 0.5]), max_photons=2)
        np.testing.assert_allclose(conv.entries[:, 2], [0, 0.5, 0.5], atol=1e-15)

    def test_bruteforce_refuses_large_photon_number(self):
        with pytest.raises(ValueError):
            convolution_bruteforce(np.array([0.5, 0.5]), 9)

    def test_rejects_unnormalized_bins(self):
        with pytest.raises(ValueError):
            convolution_matrix(np.array([0.5, 0.6]), 3)


class TestBuiltinDataset:
    def test_raw_contains_published_anchor_entries(self):
        raw = builtin_convolution_raw()
        assert raw[1][2] == 0.128
        assert raw[2][2] == 0.872

    def test_raw_columns_nearly_stochastic(self):
        sums = builtin_convolution_raw().sum(axis=0)
        np.testing.assert_allclose(sums, 1.0, atol=0.005)

    def test_normalized_columns_are_exactly_stochastic(self):
        conv = builtin_convolution_matrix(max_photons=8)
        np.testing.assert_allclose(conv.entries.sum(axis=0), 1.0, atol=1e-14)

    def test_extension_uses_equal_bin_model(self):
        conv = builtin_convolution_matrix(max_photons=12)
        model = convolution_matrix(np.full(8, 1.0 / 8), max_photons=12)
        np.testing.assert_allclose(
            conv.entries[:, 9:], model.entries[:, 9:], atol=1e-14
        )

    def test_measured_and_model_columns_agree_roughly(self):
        """The equal-bin model reproduces the shipped n = 2 column to ~0.003,
        justifying its use for the unpublished columns."""
        conv = builtin_convolution_matrix(max_photons=8)
        model = convolution_matrix(np.full(8, 1.0 / 8), max_photons=8)
        assert np.max(np.abs(conv.entries[:, 2] - model.entries[:, 2])) < 0.005

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            builtin_convolution_raw("no-such-dataset")
        assert PAPER_TMD_8BIN == "paper-tmd-8bin"


class TestTmdPovm:
    def test_diagonals_are_rows_of_c_dot_l(self):
        conv = builtin_convolution_matrix(max_photons=10)
        loss = loss_matrix(0.48, truncation=10)
        povm = tmd_povm(conv, loss)
        np.testing.assert_allclose(
            povm.as_matrix(), conv.entries @ loss.entries, atol=1e-15
        )

    def test_nine_outcomes_for_eight_bins(self):
        conv = builtin_convolution_matrix(max_photons=8)
        assert tmd_povm(conv, loss_matrix(0.3, 8)).n_outcomes == 9

    def test_completeness_at_large_truncation(self):
        conv = builtin_convolution_matrix(max_photons=60)
        povm = tmd_povm(conv, loss_matrix(0.48, 60))
        np.testing.assert_allclose(povm.as_matrix().sum(axis=0), 1.0, atol=1e-12)

    def test_rejects_mismatched_truncations(self):
        conv = builtin_convolution_matrix(max_photons=8)
        with pytest.raises(ValueError):
            tmd_povm(conv, loss_matrix(0.3, 9))


class TestPovmTypes:
    def test_povm_set_requires_completeness(self):
        half = PovmElement(np.full(3, 0.5), 0)
        with pytest.raises(ValueError):
            PovmSet((half,))
        assert PovmSet((half, half)).truncation == 2

    def test_element_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            PovmElement(np.array([0.5, 1.4]), 0)

    def test_convolution_type_rejects_occupancy_above_photons(self):
        entries = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        entries[2, 1] = entries[1, 1]
        entries[1, 1] = 0.0
        with pytest.raises(ValueError):
            ConvolutionMatrix(entries, np.array([0.5, 0.5]))


class TestOutcomeProbabilities:
    def test_matches_matrix_vector_product(self, apd_60):
        state = coherent_fock_distribution(CoherentAmplitude(1.3), 7)
        probs = outcome_probabilities(apd_60, state)
        np.testing.assert_allclose(probs, apd_60.as_matrix() @ state.probs)

    def test_unit_mass_state_gives_unit_total(self, apd_60):
        state = coherent_fock_distribution(CoherentAmplitude(0.8), 7, renormalize=True)
        assert outcome_probabilities(apd_60, state).sum() == pytest.approx(
            1.0, abs=1e-12
        )

    def test_truncated_state_reports_deficit(self, apd_60):
        state = coherent_fock_distribution(CoherentAmplitude(6.0), 7)
        total = outcome_probabilities(apd_60, state).sum()
        assert total < 1.0
        assert total == pytest.approx(state.probs.sum(), abs=1e-12)

    def test_rejects_mismatched_truncation(self, apd_60):
        state = coherent_fock_distribution(CoherentAmplitude(1.0), 9)
        with pytest.raises(ValueError):
            outcome_probabilities(apd_60, state)
