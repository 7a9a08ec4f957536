"""Session fixtures: one species per physical regime, plus derived scales."""

import pytest
from hypothesis import HealthCheck, settings

from disperse import SpeciesParams, Statistics, derive_scales

from _refs import M_E, N0, Q_E, T_BOSE_02, T_CLASSICAL, T_FERMI_02

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def electron_degenerate():
    """Charged gas in the ground state (T = 0 forces the degenerate branch)."""
    return SpeciesParams(
        mass=M_E, charge=-Q_E, spin_degeneracy=2, density=N0,
        temperature=0.0, statistics=Statistics.FERMI,
    )


@pytest.fixture(scope="session")
def neutral_degenerate():
    return SpeciesParams(
        mass=M_E, charge=0.0, spin_degeneracy=2, density=N0,
        temperature=0.0, statistics=Statistics.FERMI,
    )


@pytest.fixture(scope="session")
def weak_fermion():
    """Thermal fermion gas at fugacity 0.2."""
    return SpeciesParams(
        mass=M_E, charge=-Q_E, spin_degeneracy=2, density=N0,
        temperature=T_FERMI_02, statistics=Statistics.FERMI,
    )


@pytest.fixture(scope="session")
def weak_boson():
    """Thermal boson gas at fugacity 0.2 (same mass and charge, for contrast)."""
    return SpeciesParams(
        mass=M_E, charge=-Q_E, spin_degeneracy=2, density=N0,
        temperature=T_BOSE_02, statistics=Statistics.BOSE,
    )


@pytest.fixture(scope="session")
def classical_electron():
    """Hot enough that the fugacity sits near 1e-6: the Maxwellian limit."""
    return SpeciesParams(
        mass=M_E, charge=-Q_E, spin_degeneracy=2, density=N0,
        temperature=T_CLASSICAL, statistics=Statistics.FERMI,
    )


@pytest.fixture(scope="session")
def electron_degenerate_scales(electron_degenerate):
    return derive_scales(electron_degenerate)


@pytest.fixture(scope="session")
def neutral_degenerate_scales(neutral_degenerate):
    return derive_scales(neutral_degenerate)


@pytest.fixture(scope="session")
def weak_fermion_scales(weak_fermion):
    return derive_scales(weak_fermion)


@pytest.fixture(scope="session")
def weak_boson_scales(weak_boson):
    return derive_scales(weak_boson)


@pytest.fixture(scope="session")
def classical_electron_scales(classical_electron):
    return derive_scales(classical_electron)
