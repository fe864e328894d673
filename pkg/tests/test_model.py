import cmath
import math

import mpmath
import numpy as np
import pytest
from conftest import ETA, media
from hypothesis import given
from hypothesis import strategies as st

from lambda_fwm import InvalidParameter, SingularResponse
from lambda_fwm.model import (
    MediumParams,
    ProbePulse,
    WeakProbeWarning,
    amplitude_residuals,
    atomic_amplitudes,
    detuning_factors,
    response_determinant,
    spectral_response,
)
from lambda_fwm.presets import FIG2A, RESONANT

mpmath.mp.dps = 50


def _mp_response(p: MediumParams, eta: float):
    """Coupling coefficients in 50-digit arithmetic, written out independently."""
    c = mpmath.mpc
    o12, o13 = c(p.omega12.real, p.omega12.imag), c(p.omega13.real, p.omega13.imag)
    o21, o31 = mpmath.conj(o12), mpmath.conj(o13)
    d1 = c(p.delta1 + eta, p.gamma1 / 2)
    d2 = c(p.delta2 + eta, p.gamma2 / 2)
    d3 = c(p.delta3 + eta, p.gamma3 / 2)
    a, b = abs(o12) ** 2, abs(o13) ** 2
    det = d1 * d2 * d3 - d3 * a - d2 * b
    return {
        "det": det,
        "k2": eta + p.kappa02 * (b - d1 * d3) / det,
        "k3": eta + p.kappa03 * (a - d1 * d2) / det,
        "s2": -p.kappa02 * o21 * o13 / det,
        "s3": -p.kappa03 * o31 * o12 / det,
        "d": (d1, d2, d3),
    }


def _close(x, ref, rel=1e-12):
    ref = complex(ref)
    return abs(complex(x) - ref) <= rel * max(abs(ref), 1e-300)


class TestMediumParams:
    def test_conjugate_couplings(self):
        p = MediumParams(omega12=3 + 4j, omega13=-1j)
        assert p.omega21 == 3 - 4j
        assert p.omega31 == 1j
        assert p.rabi12_sq == pytest.approx(25.0)

    @pytest.mark.parametrize("name", ["gamma1", "gamma2", "gamma3", "kappa02", "kappa03"])
    def test_negative_rates_rejected(self, name):
        with pytest.raises(InvalidParameter):
            FIG2A.replace(**{name: -0.1})

    def test_complex_detuning_rejected(self):
        with pytest.raises(InvalidParameter):
            FIG2A.replace(delta2=1 + 1j)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidParameter):
            FIG2A.replace(omega12=float("nan"))

    def test_weak_probe_warning(self):
        with pytest.warns(WeakProbeWarning):
            assert not RESONANT.check_probe(ProbePulse(1.0))
        assert FIG2A.check_probe(ProbePulse(1.0))


class TestProbePulse:
    def test_gaussian_envelope(self):
        pulse = ProbePulse(2.0)
        assert pulse.envelope(0.0) == 2.0
        assert pulse.envelope(1.0) == pytest.approx(2.0 * math.exp(-1.0))

    def test_tabulated_interpolates_and_vanishes_outside(self):
        pulse = ProbePulse(1.0, [0.0, 1.0, 2.0], [0.0, 1.0j, 0.0])
        assert pulse.envelope(0.5) == pytest.approx(0.5j)
        assert pulse.envelope(3.0) == 0
        assert pulse.peak_amplitude() == 1.0

    def test_tabulated_needs_increasing_times(self):
        with pytest.raises(InvalidParameter):
            ProbePulse(1.0, [0.0, 0.0, 1.0], [1, 1, 1])


class TestSpectralResponse:
    def test_detuning_factors_example(self):
        p = MediumParams(delta1=1.0, delta2=2.0, delta3=3.0, gamma1=0.2, gamma2=0.4, gamma3=0.6)
        d1, d2, d3 = detuning_factors(p, 0.5)
        assert (d1, d2, d3) == (1.5 + 0.1j, 2.5 + 0.2j, 3.5 + 0.3j)

    def test_fig2a_at_line_centre_matches_high_precision(self):
        resp = spectral_response(FIG2A, 0.0)
        ref = _mp_response(FIG2A, 0.0)
        for key in ("k2", "k3", "s2", "s3"):
            assert _close(getattr(resp, key), ref[key]), key
        assert _close(resp.delta_det, ref["det"])

    def test_no_cross_coupling_without_omega13(self):
        resp = spectral_response(FIG2A.replace(omega13=0.0), ETA)
        assert np.all(resp.s2 == 0) and np.all(resp.s3 == 0)

    def test_singular_determinant_raises(self):
        p = MediumParams(omega12=1.0, omega13=1.0)
        with pytest.raises(SingularResponse) as info:
            spectral_response(p, np.array([-1.0, 0.0, 1.0]))
        assert info.value.eta == 0.0

    def test_eigenvalues_are_mean_plus_minus_lambda(self):
        resp = spectral_response(FIG2A, ETA)
        lo, hi = resp.eigenvalues
        assert np.allclose(lo + hi, resp.k2 + resp.k3, rtol=1e-13)
        assert np.allclose(lo * hi, resp.k2 * resp.k3 - resp.s2 * resp.s3, rtol=1e-10)


class TestAtomicAmplitudes:
    def test_resonant_alpha2_matches_high_precision(self):
        alpha1, alpha2, alpha3 = atomic_amplitudes(RESONANT, 0.0, 1.0, 0.0)
        ref = _mp_response(RESONANT, 0.0)
        d1, _, d3 = ref["d"]
        expected = (abs(RESONANT.omega13) ** 2 - d1 * d3) / ref["det"]
        assert _close(alpha2, expected)

    def test_three_photon_pathways_cancel(self):
        # W20/W30 = Omega12/Omega13 leaves alpha3 = -D1 D2 W30/Delta, tiny next to either pathway
        w30 = 1.0
        w20 = FIG2A.omega12 / FIG2A.omega13 * w30
        _, _, alpha3 = atomic_amplitudes(FIG2A, 0.0, w20, w30)
        det = response_determinant(FIG2A, 0.0)
        pathway = abs(FIG2A.omega31 * FIG2A.omega12 * w20 / det)
        d1, d2, _ = detuning_factors(FIG2A, 0.0)
        assert abs(alpha3) / pathway == pytest.approx(abs(d1 * d2) / FIG2A.rabi12_sq, rel=1e-9)
        assert abs(alpha3) / pathway < 1e-4

    def test_no_drive_no_response(self):
        assert atomic_amplitudes(FIG2A, 0.3, 0.0, 0.0) == (0, 0, 0)


@given(media(), st.floats(-8, 8))
def test_lambda_squared_identity(p, eta):
    resp = spectral_response(p, eta)
    lhs = complex(resp.lambda_big) ** 2
    rhs = ((resp.k2 - resp.k3) / 2) ** 2 + resp.s2 * resp.s3
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs), abs(resp.k2 - resp.k3) ** 2)
    assert abs(resp.d_bar - (resp.k2 + resp.k3) / 2) <= 1e-13 * max(1.0, abs(resp.d_bar))


@given(media(), st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_back_substitution_residual(p, w20, w30):
    alphas = atomic_amplitudes(p, ETA, w20, w30)
    residuals = amplitude_residuals(p, ETA, w20, w30, alphas)
    scale = max(abs(w20), abs(w30), 1e-300)
    for r in residuals:
        assert np.max(np.abs(r)) < 1e-10 * scale * max(1.0, abs(p.omega12), abs(p.omega13))


@given(media(), st.floats(-8, 8))
def test_detuning_factors_have_unit_slope(p, eta):
    before = detuning_factors(p, eta)
    after = detuning_factors(p, eta + 0.25)
    for a, b in zip(before, after):
        assert cmath.isclose(b - a, 0.25, abs_tol=1e-12)


@given(media())
def test_response_is_pure(p):
    first = spectral_response(p, ETA)
    second = spectral_response(p, ETA)
    assert np.array_equal(first.k2, second.k2) and np.array_equal(first.lambda_big, second.lambda_big)
