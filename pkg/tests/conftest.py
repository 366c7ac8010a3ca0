import os

import pytest
from hypothesis import HealthCheck, settings

from liouville.farey import FareyLamination
from liouville.functions import bump, holder_bump, symmetrized
from liouville.quadrature import QuadratureSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def lam():
    return FareyLamination()


@pytest.fixture(scope="session")
def q():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def phi_bump():
    return bump()


@pytest.fixture(scope="session")
def phi_holder():
    return holder_bump(0.5)


@pytest.fixture(scope="session")
def phi_sym():
    return symmetrized(bump())
