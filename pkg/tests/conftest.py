import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lambda_fwm.model import MediumParams, WeakProbeWarning

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_weak_probe():
    # the resonant reference medium has |Omega12| = 5, below 10x the unit probe
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakProbeWarning)
        yield


def _rabi():
    return st.builds(
        lambda mag, phase: mag * complex(math.cos(phase), math.sin(phase)),
        st.floats(1.0, 200.0),
        st.floats(0.0, 2 * math.pi),
    )


@st.composite
def media(draw, lossless=False, max_kappa=200.0):
    """Media inside the validity guards (gamma2, gamma3 > 0 unless lossless)."""
    gamma = st.just(0.0) if lossless else st.floats(0.01, 2.0)
    return MediumParams(
        omega12=draw(_rabi()),
        omega13=draw(_rabi()),
        delta1=draw(st.floats(-5.0, 5.0)),
        delta2=draw(st.floats(-60.0, 60.0)),
        delta3=draw(st.floats(-60.0, 60.0)),
        gamma1=draw(gamma),
        gamma2=draw(gamma),
        gamma3=draw(gamma),
        kappa02=draw(st.floats(1.0, max_kappa)),
        kappa03=draw(st.floats(1.0, max_kappa)),
    )


ETA = np.linspace(-8.0, 8.0, 257)
