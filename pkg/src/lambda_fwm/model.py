"""Dimensionless medium description and the per-frequency atomic response.

Units: time in the probe duration tau, length in c*tau, frequencies in 1/tau,
propagation constants kappa in 1/(c*tau**2).  In these units the free-space
wavenumber omega/c equals the dimensionless frequency ``eta = omega*tau``.

All functions accept scalar or array ``eta`` and broadcast.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, SingularResponse

#: Threshold on |Delta| (in units of 1/tau**3) below which the response is singular.
EPS_SING = 1e-12

#: "much less than" is taken to mean a ratio of at least this much.
STRONG_RATIO = 10.0


class WeakProbeWarning(UserWarning):
    """The probe is not weak compared with the |2>-|1> coupling."""


@dataclass(frozen=True)
class MediumParams:
    """Coupling-laser and medium constants, all dimensionless.

    ``omega12`` and ``omega13`` are half-Rabi frequencies times tau; the
    reverse couplings are their complex conjugates.  ``kappa02``/``kappa03``
    are the propagation constants times c*tau**2.
    """

    omega12: complex = 200.0
    omega13: complex = 100.0
    delta1: float = 0.0
    delta2: float = 0.0
    delta3: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma3: float = 0.0
    kappa02: float = 0.0
    kappa03: float = 0.0

    def __post_init__(self):
        for name in ("omega12", "omega13"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise InvalidParameter(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in ("delta1", "delta2", "delta3", "gamma1", "gamma2", "gamma3", "kappa02", "kappa03"):
            value = getattr(self, name)
            if isinstance(value, complex) or np.iscomplexobj(value):
                raise InvalidParameter(f"{name} must be real, got {value}")
            value = float(value)
            if not math.isfinite(value):
                raise InvalidParameter(f"{name} must be finite, got {value}")
            if name[0] in "gk" and value < 0:
                raise InvalidParameter(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)

    @property
    def omega21(self) -> complex:
        return self.omega12.conjugate()

    @property
    def omega31(self) -> complex:
        return self.omega13.conjugate()

    @property
    def rabi12_sq(self) -> float:
        return abs(self.omega12) ** 2

    @property
    def rabi13_sq(self) -> float:
        return abs(self.omega13) ** 2

    def replace(self, **changes) -> "MediumParams":
        """Copy with some fields changed (re-validated)."""
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return MediumParams(**values)

    def check_probe(self, pulse: "ProbePulse") -> bool:
        """Warn unless the probe is weak compared with ``omega12``.

        Returns True when the weak-probe condition holds.
        """
        peak = pulse.peak_amplitude()
        ok = abs(self.omega12) > 0 and STRONG_RATIO * peak <= abs(self.omega12)
        if not ok:
            warnings.warn(
                f"probe peak {peak:.3g} is not << |omega12| = {abs(self.omega12):.3g}; "
                "the non-depleted ground-state approximation may fail",
                WeakProbeWarning,
                stacklevel=2,
            )
        return ok

    def to_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if isinstance(value, complex):
                out[name] = [value.real, value.imag]
            else:
                out[name] = value
        return out


@dataclass(frozen=True)
class ProbePulse:
    """Probe envelope at the medium entrance.

    The default shape is ``amplitude * exp(-(t/tau)**2)``.  Passing ``times``
    and ``samples`` selects a tabulated envelope (complex samples over t/tau,
    linearly interpolated, zero outside the table); ``amplitude`` then
    multiplies the samples.
    """

    amplitude: complex = 1.0
    times: np.ndarray | None = field(default=None, compare=False)
    samples: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not np.isfinite(self.amplitude.real) or not np.isfinite(self.amplitude.imag):
            raise InvalidParameter("probe amplitude must be finite")
        if (self.times is None) != (self.samples is None):
            raise InvalidParameter("tabulated probe needs both times and samples")
        if self.times is not None:
            times = np.asarray(self.times, dtype=float)
            samples = np.asarray(self.samples, dtype=complex)
            if times.ndim != 1 or times.shape != samples.shape or times.size < 2:
                raise InvalidParameter("times and samples must be 1-D arrays of equal length >= 2")
            if np.any(np.diff(times) <= 0):
                raise InvalidParameter("tabulated times must be strictly increasing")
            if not (np.all(np.isfinite(times)) and np.all(np.isfinite(samples))):
                raise InvalidParameter("tabulated probe must be finite")
            energy = np.trapezoid(np.abs(samples) ** 2, times)
            if not np.isfinite(energy):
                raise InvalidParameter("tabulated probe must have finite energy")
            object.__setattr__(self, "times", times)
            object.__setattr__(self, "samples", samples)

    @property
    def is_gaussian(self) -> bool:
        return self.times is None

    def envelope(self, t) -> np.ndarray:
        """Omega20(0, t) * tau at the entrance, for t in units of tau."""
        t = np.asarray(t, dtype=float)
        if self.is_gaussian:
            return self.amplitude * np.exp(-(t**2))
        re = np.interp(t, self.times, self.samples.real, left=0.0, right=0.0)
        im = np.interp(t, self.times, self.samples.imag, left=0.0, right=0.0)
        return self.amplitude * (re + 1j * im)

    def peak_amplitude(self) -> float:
        if self.is_gaussian:
            return abs(self.amplitude)
        return float(abs(self.amplitude) * np.max(np.abs(self.samples)))

    def scaled(self, factor: complex) -> "ProbePulse":
        return ProbePulse(self.amplitude * factor, self.times, self.samples)


@dataclass(frozen=True)
class SpectralResponse:
    """Frequency-dependent response coefficients (arrays broadcast like ``eta``).

    ``lambda_big`` is the principal square root; every observable built from
    it is even in its sign.  ``d_bar`` is the mean propagation constant.
    """

    eta: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    delta_det: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    lambda_big: np.ndarray
    d_bar: np.ndarray

    @property
    def eigenvalues(self):
        """Propagation constants of the two normal modes, ``d_bar -/+ lambda``."""
        return self.d_bar - self.lambda_big, self.d_bar + self.lambda_big


def detuning_factors(params: MediumParams, eta):
    """Return (D1, D2, D3) = delta_i + eta + i*gamma_i/2."""
    eta = np.asarray(eta, dtype=float)
    d1 = params.delta1 + eta + 0.5j * params.gamma1
    d2 = params.delta2 + eta + 0.5j * params.gamma2
    d3 = params.delta3 + eta + 0.5j * params.gamma3
    if d1.ndim == 0:
        return complex(d1), complex(d2), complex(d3)
    return d1, d2, d3


def response_determinant(params: MediumParams, eta):
    d1, d2, d3 = detuning_factors(params, eta)
    return d1 * d2 * d3 - d3 * params.rabi12_sq - d2 * params.rabi13_sq


def _guard_singular(delta_det, eta):
    mag = np.abs(delta_det)
    if np.any(mag <= EPS_SING):
        idx = int(np.argmin(mag))
        bad_eta = float(np.ravel(eta)[idx]) if np.ndim(eta) else float(eta)
        raise SingularResponse(
            f"|Delta| = {np.ravel(mag)[idx]:.3g} <= {EPS_SING:g} at eta = {bad_eta:.6g}; "
            "use gamma2, gamma3 > 0 or detune the lasers",
            eta=bad_eta,
        )


def spectral_response(params: MediumParams, eta) -> SpectralResponse:
    """Evaluate the coupled-propagation coefficients at frequency ``eta``.

    Raises
    ------
    SingularResponse
        If |Delta| <= EPS_SING anywhere in ``eta``.
    """
    eta_arr = np.asarray(eta, dtype=float)
    d1, d2, d3 = detuning_factors(params, eta_arr)
    a, b = params.rabi12_sq, params.rabi13_sq
    delta_det = d1 * d2 * d3 - d3 * a - d2 * b
    _guard_singular(delta_det, eta_arr)

    k2 = eta_arr + params.kappa02 * (b - d1 * d3) / delta_det
    k3 = eta_arr + params.kappa03 * (a - d1 * d2) / delta_det
    s2 = -params.kappa02 * params.omega21 * params.omega13 / delta_det
    s3 = -params.kappa03 * params.omega31 * params.omega12 / delta_det
    half_diff = 0.5 * (k2 - k3)
    lam = np.sqrt(np.asarray(half_diff * half_diff + s2 * s3, dtype=complex))
    d_bar = 0.5 * (k2 + k3)
    return SpectralResponse(
        eta=eta_arr,
        d1=np.asarray(d1),
        d2=np.asarray(d2),
        d3=np.asarray(d3),
        delta_det=np.asarray(delta_det),
        k2=np.asarray(k2),
        k3=np.asarray(k3),
        s2=np.asarray(s2),
        s3=np.asarray(s3),
        lambda_big=lam,
        d_bar=np.asarray(d_bar),
    )


def atomic_amplitudes(params: MediumParams, eta, w20, w30):
    """Fourier amplitudes (alpha1, alpha2, alpha3) driven by the two weak fields."""
    d1, d2, d3 = detuning_factors(params, eta)
    a, b = params.rabi12_sq, params.rabi13_sq
    delta_det = d1 * d2 * d3 - d3 * a - d2 * b
    _guard_singular(delta_det, np.asarray(eta, dtype=float))
    w20 = np.asarray(w20, dtype=complex)
    w30 = np.asarray(w30, dtype=complex)
    # sign fixed by the linear system itself; alpha2, alpha3 only follow from it with '+'
    alpha1 = (d3 * params.omega12 * w20 + d2 * params.omega13 * w30) / delta_det
    alpha2 = (-params.omega21 * params.omega13 * w30 + (b - d1 * d3) * w20) / delta_det
    alpha3 = (-params.omega31 * params.omega12 * w20 + (a - d1 * d2) * w30) / delta_det
    if np.ndim(alpha1) == 0:
        return complex(alpha1), complex(alpha2), complex(alpha3)
    return alpha1, alpha2, alpha3


def amplitude_residuals(params: MediumParams, eta, w20, w30, alphas):
    """Residuals of the three linear atomic equations for given amplitudes."""
    alpha1, alpha2, alpha3 = alphas
    d1, d2, d3 = detuning_factors(params, eta)
    r1 = params.omega21 * alpha1 + d2 * alpha2 + w20
    r2 = d1 * alpha1 + params.omega12 * alpha2 + params.omega13 * alpha3
    r3 = params.omega31 * alpha1 + d3 * alpha3 + w30
    return r1, r2, r3
