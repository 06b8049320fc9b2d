"""Shared fixtures: detector models reused across test modules."""

import pytest

from povm_forge import (
    apd_povm,
    builtin_convolution_matrix,
    linspace_probes,
    loss_matrix,
    tmd_povm,
)


@pytest.fixture(scope="session")
def builtin_tmd_48():
    """The shipped 8-bin TMD with 48% loss, truncated at n = 29."""
    conv = builtin_convolution_matrix(max_photons=29)
    return tmd_povm(conv, loss_matrix(0.48, 29))


@pytest.fixture(scope="session")
def apd_60():
    """An APD with 60% efficiency, truncated at n = 7."""
    return apd_povm(0.6, truncation=7)


@pytest.fixture(scope="session")
def apd_probes():
    """A modest probe grid matched to the APD fixture's dimension."""
    return linspace_probes(0.05, 4.0, 60, dimension=8)
