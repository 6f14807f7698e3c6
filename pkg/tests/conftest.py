import math

import pytest
from hypothesis import settings

from mwm import GaussianOhmic, Ohmic

settings.register_profile("mwm", deadline=None, max_examples=40)
settings.load_profile("mwm")


@pytest.fixture
def ohmic():
    return Ohmic(alpha=0.1, omega_c=8.0)


@pytest.fixture
def band():
    return GaussianOhmic(alpha=0.1, omega_c=8.0, alpha_p=0.05, omega_p=13.0, gamma_p=4.0)


HALF_PI = math.pi / 2
