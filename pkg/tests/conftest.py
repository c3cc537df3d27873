"""
Pytest configuration and shared fixtures for cavity-bragg testing.

This file provides:
- Tolerances shared across test modules
- Standard double-well and lattice geometries
- The three atomic state families at the sizes used in regression scenarios
- Output-directory isolation for CLI and artifact tests
"""

import math
from fractions import Fraction

import pytest

from cavity_bragg.constants import OUTPUT_DIR_ENV_VAR
from cavity_bragg.scenario import Scenario
from cavity_bragg.states import (
    CoherentSuperfluidState, LatticeGeometry, MottState, NumberSuperfluidState,
)


# =============================================================================
# Test Data and Constants
# =============================================================================

@pytest.fixture(scope="session")
def test_constants():
    """Tolerances and reference values used across the suite."""
    return {
        "EXACT_TOLERANCE": 1e-9,
        "ORACLE_TOLERANCE": 1e-8,
        "SAMPLED_RELATIVE_TOLERANCE": 0.05,
        "COLLAPSE_RELATIVE_TOLERANCE": 0.25,
        "TWO_WELL_MEAN_ATOMS": 18,
        "PER_WELL_AMPLITUDE": 3.0,
        "SQRT_18": math.sqrt(18.0),
    }


# =============================================================================
# Geometries
# =============================================================================

@pytest.fixture(scope="session")
def half_wave_pair():
    """Two wells at d = lambda/2: every well scatters in phase."""
    return LatticeGeometry(num_sites=2, spacing=Fraction(1, 2))


@pytest.fixture(scope="session")
def quarter_wave_pair():
    """Two wells at d = lambda/4: neighbouring wells scatter in antiphase."""
    return LatticeGeometry(num_sites=2, spacing=Fraction(1, 4))


@pytest.fixture(scope="session")
def tenth_wave_pair():
    """Two wells at d = lambda/10 (phase 72 degrees)."""
    return LatticeGeometry(num_sites=2, spacing=Fraction(1, 10))


@pytest.fixture(scope="session")
def tenth_wave_lattice():
    """Ten wells at d = lambda/10: two full root-of-unity cycles of order 5."""
    return LatticeGeometry(num_sites=10, spacing=Fraction(1, 10))


# =============================================================================
# Atomic States
# =============================================================================

@pytest.fixture(scope="session")
def mott_pair():
    """Fock state |9, 9>."""
    return MottState((9, 9))


@pytest.fixture(scope="session")
def coherent_pair():
    """Coherent state with alpha_0 = alpha_1 = 3 (9 atoms per well on average)."""
    return CoherentSuperfluidState([3.0, 3.0])


@pytest.fixture(scope="session")
def number_pair():
    """Number-conserving superfluid of 18 atoms in two wells."""
    return NumberSuperfluidState(18, 2)


# =============================================================================
# Scenario and Output Helpers
# =============================================================================

@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Isolated output directory, also exported through the environment variable."""
    directory = tmp_path / "results"
    monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(directory))
    return directory


@pytest.fixture
def make_scenario():
    """Factory for validated scenarios with small defaults."""

    def factory(**overrides):
        fields = {"mode": "spectrum", "state": "mott", "steps": 201}
        fields.update(overrides)
        if fields["state"] == "mott":
            fields.setdefault("occupations", [9, 9])
        return Scenario(**fields)

    return factory
