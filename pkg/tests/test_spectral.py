"""
Tests for coupling frequencies and spectra.

Tests include:
- Single-configuration frequencies against the polygon formula
- Exact spectra at d = lambda/2 and d = lambda/4
- Root-of-unity class reduction against brute-force enumeration
- Binning, sampling and worker invariance
- Integer lines at d = lambda/2 and d = lambda/4
- Closed-form mean-square frequency
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import comb, ive

from cavity_bragg.constants import INTEGER_SPECTRUM_TOLERANCE
from cavity_bragg.errors import BudgetExceeded, DomainError
from cavity_bragg.interfaces import Binning, Spectrum
from cavity_bragg.lattice_stats import total_variation_distance
from cavity_bragg.spectral import (
    bin_lines, configuration_frequencies, configuration_frequency, coupling_fluctuation,
    mean_square_frequency, merge_lines, sampled_spectrum, sf2_number_difference_std, spectrum,
    spectrum_sweep,
)
from cavity_bragg.states import (
    CoherentSuperfluidState, LatticeGeometry, MottState, NumberSuperfluidState,
    enumerate_configuration_arrays,
)


def brute_force_lines(state, geometry, epsilon=1e-10):
    """Frequencies of every enumerated configuration, without class reduction."""
    omegas, probabilities = [], []
    for occupations, weights in enumerate_configuration_arrays(state, geometry, epsilon):
        omegas.append(np.abs(occupations @ np.exp(1j * np.arange(geometry.num_sites) * geometry.phase)))
        probabilities.append(weights)
    return merge_lines(np.concatenate(omegas), np.concatenate(probabilities), tolerance=1e-8)


class TestConfigurationFrequency:
    """Test suite for single-configuration eigenfrequencies."""

    def test_general_spacing_polygon(self, tenth_wave_pair):
        expected = math.sqrt(9 + 16 + 24 * math.cos(0.4 * math.pi))
        assert configuration_frequency((3, 4), tenth_wave_pair) == pytest.approx(expected, abs=1e-12)
        assert configuration_frequency((3, 4), tenth_wave_pair) == pytest.approx(5.6935, abs=1e-4)

    def test_half_wave_is_total(self):
        geometry = LatticeGeometry.from_spacing(4, "1/2")
        assert configuration_frequency((3, 1, 2, 5), geometry) == 11.0

    def test_quarter_wave_is_even_odd_difference(self):
        geometry = LatticeGeometry.from_spacing(4, "1/4")
        assert configuration_frequency((3, 1, 2, 5), geometry) == 1.0

    def test_empty_lattice_is_dark(self, tenth_wave_pair):
        assert configuration_frequency((0, 0), tenth_wave_pair) == 0.0

    def test_vectorized_rows(self, quarter_wave_pair):
        omegas = configuration_frequencies(np.array([[3, 1], [0, 4], [2, 2]]), quarter_wave_pair)
        np.testing.assert_array_equal(omegas, [2.0, 4.0, 0.0])

    def test_wrong_row_length(self, quarter_wave_pair):
        with pytest.raises(DomainError):
            configuration_frequencies(np.array([[1, 2, 3]]), quarter_wave_pair)

    def test_cyclic_relabeling_on_full_period_ring(self, tenth_wave_lattice):
        # M is a multiple of p, so a shift by one site only rotates the sum
        rows = np.random.default_rng(8).integers(0, 6, size=(50, 10))
        np.testing.assert_allclose(configuration_frequencies(np.roll(rows, 1, axis=1), tenth_wave_lattice),
                                   configuration_frequencies(rows, tenth_wave_lattice), atol=1e-12)

    def test_reversal_for_any_spacing(self):
        geometry = LatticeGeometry.from_spacing(6, "0.1414")
        rows = np.random.default_rng(9).integers(0, 6, size=(50, 6))
        np.testing.assert_allclose(configuration_frequencies(rows[:, ::-1], geometry),
                                   configuration_frequencies(rows, geometry), atol=1e-10)


class TestLineHandling:
    """Test suite for merging and binning lines."""

    def test_merge_sorts_and_combines(self):
        omegas, probabilities = merge_lines(np.array([2.0, 1.0, 2.0 + 1e-12, 3.0]),
                                            np.array([0.1, 0.2, 0.3, 0.0]))
        np.testing.assert_allclose(omegas, [1.0, 2.0])
        np.testing.assert_allclose(probabilities, [0.2, 0.4])

    def test_left_closed_bins(self):
        edges, masses = bin_lines(np.array([0.0, 2.0, 3.0, 4.0]), np.array([0.1, 0.2, 0.3, 0.4]),
                                  Binning(bin_width=3.0))
        np.testing.assert_allclose(edges, [0.0, 3.0])
        np.testing.assert_allclose(masses, [0.3, 0.7])

    def test_invalid_bin_width(self):
        with pytest.raises(DomainError):
            Binning(bin_width=0.0)


class TestExactSpectrum:
    """Test suite for exact spectra."""

    def test_mott_single_line(self, mott_pair, half_wave_pair):
        result = spectrum(mott_pair, half_wave_pair)
        np.testing.assert_array_equal(result.omegas, [18.0])
        np.testing.assert_array_equal(result.probabilities, [1.0])

    def test_mott_quarter_wave_is_dark(self, mott_pair, quarter_wave_pair):
        result = spectrum(mott_pair, quarter_wave_pair)
        np.testing.assert_array_equal(result.omegas, [0.0])

    def test_number_state_half_wave_single_line(self, number_pair, half_wave_pair):
        result = spectrum(number_pair, half_wave_pair)
        np.testing.assert_array_equal(result.omegas, [18.0])

    def test_number_state_quarter_wave_binomial(self, quarter_wave_pair):
        result = spectrum(NumberSuperfluidState(20, 2), quarter_wave_pair)
        np.testing.assert_array_equal(result.omegas, np.arange(0, 21, 2))
        assert result.probabilities[0] == pytest.approx(comb(20, 10) / 2 ** 20, rel=1e-12)
        assert result.probabilities[0] == pytest.approx(0.1762, abs=1e-4)

    def test_coherent_quarter_wave_zero_line(self, coherent_pair, quarter_wave_pair):
        result = spectrum(coherent_pair, quarter_wave_pair)
        # P(n_0 = n_1) for two independent Poisson(9) wells
        assert result.probabilities[0] == pytest.approx(ive(0, 18.0), rel=1e-8)

    def test_coherent_half_wave_poisson(self, coherent_pair, half_wave_pair):
        result = spectrum(coherent_pair, half_wave_pair)
        assert result.mean() == pytest.approx(18.0, rel=1e-8)
        assert result.std() == pytest.approx(math.sqrt(18.0), rel=1e-7)

    def test_spectrum_properties(self, coherent_pair, tenth_wave_pair):
        result = spectrum(coherent_pair, tenth_wave_pair)
        assert np.all(np.diff(result.omegas) > 0)
        assert np.all(result.omegas >= 0)
        assert 1.0 - 1e-10 <= result.total_mass <= 1.0 + 1e-12
        assert result.exact_mass == pytest.approx(result.total_mass)

    def test_budget_is_enforced(self):
        state = NumberSuperfluidState(20, 10)
        geometry = LatticeGeometry.from_spacing(10, "0.1414")
        with pytest.raises(BudgetExceeded):
            spectrum(state, geometry, max_configurations=1000)

    def test_binned_spectrum(self, quarter_wave_pair):
        result = spectrum(NumberSuperfluidState(4, 2), quarter_wave_pair, binning=Binning(3.0))
        np.testing.assert_allclose(result.omegas, [0.0, 3.0])
        np.testing.assert_allclose(result.probabilities, [14 / 16, 2 / 16])
        assert result.exact_mass == pytest.approx(1.0)

    def test_workers_do_not_change_result(self, coherent_pair, tenth_wave_pair):
        single = spectrum(coherent_pair, tenth_wave_pair, workers=1)
        threaded = spectrum(coherent_pair, tenth_wave_pair, workers=3)
        np.testing.assert_allclose(single.omegas, threaded.omegas)
        np.testing.assert_allclose(single.probabilities, threaded.probabilities, rtol=1e-12)

    def test_site_mismatch(self, number_pair):
        with pytest.raises(DomainError):
            spectrum(number_pair, LatticeGeometry.from_spacing(3, "1/2"))

    @pytest.mark.parametrize("state,spacing", [
        (CoherentSuperfluidState([3.0, 3.0]), "1/2"),
        (CoherentSuperfluidState([3.0, 3.0]), "1/4"),
        (CoherentSuperfluidState([3.0, 3.0]), "0.25"),
        (NumberSuperfluidState(12, 6), "1/4"),
        (NumberSuperfluidState(12, 6), "0.5"),
    ])
    def test_integer_lines(self, state, spacing):
        result = spectrum(state, LatticeGeometry.from_spacing(state.num_sites, spacing))
        assert np.max(np.abs(result.omegas - np.rint(result.omegas))) <= INTEGER_SPECTRUM_TOLERANCE
        assert result.has_integer_lines()

    def test_general_spacing_lines_are_not_integer(self, coherent_pair, tenth_wave_pair):
        assert not spectrum(coherent_pair, tenth_wave_pair).has_integer_lines()

    def test_binned_spectrum_has_no_lines(self, quarter_wave_pair):
        result = spectrum(NumberSuperfluidState(4, 2), quarter_wave_pair, binning=Binning(1.0))
        assert not result.has_integer_lines()


class TestClassReducedSpectrum:
    """Class-reduced spectra agree with brute-force enumeration."""

    def test_number_state(self):
        state = NumberSuperfluidState(6, 6)
        geometry = LatticeGeometry.from_spacing(6, "1/6")
        reduced = spectrum(state, geometry)
        omegas, probabilities = brute_force_lines(state, geometry)
        assert reduced.omegas.size == omegas.size
        np.testing.assert_allclose(reduced.omegas, omegas, atol=1e-9)
        np.testing.assert_allclose(reduced.probabilities, probabilities, rtol=1e-9)

    def test_coherent_state(self):
        state = CoherentSuperfluidState.uniform(3.0, 6)
        geometry = LatticeGeometry.from_spacing(6, "1/6")
        reduced = spectrum(state, geometry, epsilon=1e-6)
        omegas, probabilities = brute_force_lines(state, geometry, epsilon=1e-6)
        brute = Spectrum(omegas=omegas, probabilities=probabilities / probabilities.sum())
        assert total_variation_distance(reduced, brute, tolerance=1e-8) < 1e-5

    def test_quarter_wave_lattice_reduces_to_binomial(self):
        state = NumberSuperfluidState(20, 10)
        geometry = LatticeGeometry.from_spacing(10, "1/4")
        reduced = spectrum(state, geometry)
        two_wells = spectrum(NumberSuperfluidState(20, 2), LatticeGeometry.from_spacing(2, "1/4"))
        np.testing.assert_allclose(reduced.probabilities, two_wells.probabilities, rtol=1e-10)


class TestSampledSpectrum:
    """Test suite for Monte-Carlo spectra."""

    def test_deterministic_in_seed(self, coherent_pair, tenth_wave_pair):
        first = sampled_spectrum(coherent_pair, tenth_wave_pair, count=2000, seed=5, workers=2)
        second = sampled_spectrum(coherent_pair, tenth_wave_pair, count=2000, seed=5, workers=2)
        np.testing.assert_array_equal(first.omegas, second.omegas)
        np.testing.assert_array_equal(first.probabilities, second.probabilities)

    def test_agrees_with_exact_mean(self, coherent_pair, tenth_wave_pair):
        exact = spectrum(coherent_pair, tenth_wave_pair)
        sampled = sampled_spectrum(coherent_pair, tenth_wave_pair, count=20_000, seed=9)
        assert sampled.mean() == pytest.approx(exact.mean(), rel=0.02)
        assert sampled.total_mass == pytest.approx(1.0)

    def test_float_spacing_lattice(self):
        state = NumberSuperfluidState(18, 10)
        geometry = LatticeGeometry.from_spacing(10, "0.1414")
        result = sampled_spectrum(state, geometry, count=5000, seed=2)
        assert result.omegas.max() <= 18.0 + 1e-9


class TestSweepAndWidths:
    """Test suite for spacing sweeps and two-well widths."""

    def test_sweep_returns_one_spectrum_per_spacing(self, number_pair):
        results = spectrum_sweep(number_pair, ["1/2", "1/4", "1/10"])
        assert [geometry.spacing for geometry, _ in results] == [
            Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)]
        assert results[0][1].omegas.tolist() == [18.0]

    def test_sampled_sweep(self, coherent_pair):
        first = spectrum_sweep(coherent_pair, ["1/2", "1/10"], method="sampled", count=1000, seed=2)
        second = spectrum_sweep(coherent_pair, ["1/2", "1/10"], method="sampled", count=1000, seed=2)
        assert len(first) == 2
        for (_, a), (_, b) in zip(first, second):
            assert a.total_mass == pytest.approx(1.0)
            np.testing.assert_array_equal(a.omegas, b.omegas)

    def test_sweep_rejects_unknown_method(self, coherent_pair):
        with pytest.raises(DomainError):
            spectrum_sweep(coherent_pair, ["1/2"], method="analytic")

    def test_sf2_difference_std(self, quarter_wave_pair, half_wave_pair, tenth_wave_pair):
        assert sf2_number_difference_std(18, quarter_wave_pair) == pytest.approx(math.sqrt(18))
        assert sf2_number_difference_std(18, half_wave_pair) == pytest.approx(0.0, abs=1e-12)
        expected = math.sqrt(9 * (1 - math.cos(0.4 * math.pi)))
        assert sf2_number_difference_std(18, tenth_wave_pair) == pytest.approx(expected)

    def test_sf2_difference_std_requires_two_wells(self):
        with pytest.raises(DomainError):
            sf2_number_difference_std(18, LatticeGeometry.from_spacing(3, "1/4"))

    def test_coupling_fluctuation_matches_closed_form(self, tenth_wave_pair):
        fluctuation = coupling_fluctuation(NumberSuperfluidState(20, 2), tenth_wave_pair)
        assert fluctuation == pytest.approx(sf2_number_difference_std(20, tenth_wave_pair), rel=1e-10)

    def test_coupling_fluctuation_mott_is_zero(self, mott_pair, tenth_wave_pair):
        assert coupling_fluctuation(mott_pair, tenth_wave_pair) == pytest.approx(0.0, abs=1e-6)


class TestMeanSquareFrequency:
    """Test suite for the closed-form E[omega^2]."""

    @pytest.mark.parametrize("state", [
        MottState((2, 3, 1)),
        CoherentSuperfluidState([1.0, 2.0, 0.5]),
        NumberSuperfluidState(6, 3),
        NumberSuperfluidState(6, 3, weights=[0.5, 0.3, 0.2]),
    ])
    def test_matches_exact_spectrum(self, state):
        geometry = LatticeGeometry.from_spacing(3, "0.3")
        assert mean_square_frequency(state, geometry) == pytest.approx(
            spectrum(state, geometry).second_moment(), rel=1e-7)

    def test_number_state_phase_sum(self):
        geometry = LatticeGeometry.from_spacing(10, math.sqrt(2) / 10)
        phase_sum = abs(np.exp(1j * np.arange(10) * geometry.phase).sum())
        expected = 18 + 18 * 17 / 100 * phase_sum ** 2
        assert mean_square_frequency(NumberSuperfluidState(18, 10), geometry) == pytest.approx(expected)
        assert expected == pytest.approx(19.32, abs=0.01)

    def test_vanishing_phase_sum(self, tenth_wave_lattice):
        assert mean_square_frequency(NumberSuperfluidState(18, 10), tenth_wave_lattice) == pytest.approx(18.0)
        assert mean_square_frequency(CoherentSuperfluidState.uniform(10.0, 10),
                                     tenth_wave_lattice) == pytest.approx(10.0)

    def test_site_mismatch(self, number_pair):
        with pytest.raises(DomainError):
            mean_square_frequency(number_pair, LatticeGeometry.from_spacing(3, "1/4"))
