"""Closed-form limits of the propagation problem.

Two regimes have analytic envelopes: all lasers on resonance, where the
generated field locks to the probe and a single slow mode survives, and the
strongly detuned case, where a second mode with phase rate ``P`` and damping
``Q`` interferes with the first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDetuning, RegimeViolation, ZeroCoupling
from .model import STRONG_RATIO, MediumParams, ProbePulse, detuning_factors, spectral_response
from .spectral import EfficiencyTrace, EnvelopeTrace

#: Residual weight of the absorbed mode below which it is considered gone.
ATTENUATION_LIMIT = 1e-3


class RegimeKind(enum.Enum):
    ON_RESONANCE = "on_resonance"
    DETUNED_STRONG = "detuned_strong"


@dataclass(frozen=True)
class LimitRegime:
    """Validity report.  Each entry is ``(condition, satisfied, margin)``; margin >= 1 means satisfied."""

    kind: RegimeKind
    validity: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return all(ok for _, ok, _ in self.validity)

    @property
    def failures(self) -> list:
        return [entry for entry in self.validity if not entry[1]]

    def require(self):
        if not self.satisfied:
            detail = ", ".join(f"{name} (margin {margin:.3g})" for name, _, margin in self.failures)
            raise RegimeViolation(f"{self.kind.value} regime violated: {detail}", self.failures)
        return self


@dataclass(frozen=True)
class PropagationConstants:
    inv_vg1: float
    inv_vg: float
    p_factor: float
    q_factor: float


def _mode_weights(params: MediumParams):
    """(kappa03 |Omega12|^2, kappa02 |Omega13|^2)."""
    return params.kappa03 * params.rabi12_sq, params.kappa02 * params.rabi13_sq


def vg1_inverse(params: MediumParams) -> float:
    """Inverse group velocity of the locked mode, in units of 1/c."""
    if params.rabi12_sq + params.rabi13_sq == 0:
        raise ZeroCoupling("both coupling Rabi frequencies are zero")
    w3, w2 = _mode_weights(params)
    if w2 + w3 == 0:
        # kappa products vanish together with the denominator only if a kappa is zero
        return 1.0
    return 1.0 + params.kappa02 * params.kappa03 / (w2 + w3)


def propagation_constants(params: MediumParams) -> PropagationConstants:
    """Group velocities, phase-mismatch rate P and damping rate Q of the detuned regime."""
    a, b = params.rabi12_sq, params.rabi13_sq
    denom = a * params.delta3 + b * params.delta2
    if denom == 0 or a == 0:
        raise DegenerateDetuning(
            "|Omega12|^2 delta3 + |Omega13|^2 delta2 vanishes; P and V_g are undefined"
        )
    w3, w2 = _mode_weights(params)
    p = (w2 + w3) / denom
    r = b / a
    inv_vg = 1.0 + (1.0 + r) * (params.kappa02 * r + params.kappa03) / (params.delta3 + r * params.delta2) ** 2
    q = p * (a * params.gamma3 / 2 + b * params.gamma2 / 2) / denom
    return PropagationConstants(vg1_inverse(params), inv_vg, p, q)


def optimal_distance(params: MediumParams) -> float:
    """Shortest distance (c*tau) with |P z| = pi, where the two modes add constructively."""
    p = propagation_constants(params).p_factor
    if p == 0:
        raise DegenerateDetuning("P = 0: no finite constructive-interference distance")
    return math.pi / abs(p)


def conversion_prefactor(params: MediumParams) -> float:
    """kappa03|O12|^2 kappa02|O13|^2 / (kappa03|O12|^2 + kappa02|O13|^2)^2; at most 1/4."""
    w3, w2 = _mode_weights(params)
    if w2 + w3 == 0:
        return 0.0
    return w3 * w2 / (w3 + w2) ** 2


def group_delays(params: MediumParams, z: float) -> list:
    """Arrival times z/c, z/V_g1 and (detuned case) z/V_g of the envelope components."""
    delays = [z]
    if params.rabi12_sq + params.rabi13_sq > 0:
        delays.append(z * vg1_inverse(params))
        try:
            delays.append(z * propagation_constants(params).inv_vg)
        except DegenerateDetuning:
            pass
    return delays


def _absorbed_mode_attenuation(params: MediumParams, z: float) -> float:
    """|exp(i (kappa02|O13|^2 + kappa03|O12|^2) z / Delta(0))|, the leftover of the absorbed mode."""
    d1, d2, d3 = detuning_factors(params, 0.0)
    delta0 = d1 * d2 * d3 - d3 * params.rabi12_sq - d2 * params.rabi13_sq
    w3, w2 = _mode_weights(params)
    if delta0 == 0:
        return 1.0
    exponent = (1j * (w2 + w3) * z / delta0).real
    return math.exp(min(exponent, 700.0))


def on_resonance_regime(params: MediumParams, z: float | None = None) -> LimitRegime:
    checks = []
    for name in ("delta1", "delta2", "delta3"):
        value = getattr(params, name)
        checks.append((f"{name} == 0", value == 0, math.inf if value == 0 else 0.0))
    if z is not None:
        att = _absorbed_mode_attenuation(params, z)
        margin = ATTENUATION_LIMIT / att if att > 0 else math.inf
        checks.append(("absorbed mode attenuation < 1e-3", att < ATTENUATION_LIMIT, margin))
    return LimitRegime(RegimeKind.ON_RESONANCE, checks)


def detuned_regime(params: MediumParams) -> LimitRegime:
    checks = [("|delta3| tau >> 1", abs(params.delta3) >= STRONG_RATIO, abs(params.delta3) / STRONG_RATIO)]
    for d_name in ("delta2", "delta3"):
        for o_name in ("omega12", "omega13"):
            rabi = abs(getattr(params, o_name))
            ratio = math.inf if rabi == 0 else (getattr(params, d_name) / rabi) ** 2
            margin = math.inf if ratio == 0 else 1.0 / ratio
            checks.append((f"|{d_name}/{o_name}|^2 <= 1", ratio <= 1.0, margin))
    return LimitRegime(RegimeKind.DETUNED_STRONG, checks)


def _coefficients(params: MediumParams):
    w3, w2 = _mode_weights(params)
    total = w2 + w3
    if total == 0:
        raise ZeroCoupling("kappa03|Omega12|^2 + kappa02|Omega13|^2 vanishes")
    c30 = params.kappa03 * params.omega31 * params.omega12 / total
    c20 = w3 / total
    return c20, c30


def on_resonance_fields(params: MediumParams, pulse: ProbePulse, z: float, times, strict: bool = True) -> EnvelopeTrace:
    """Locked envelopes after the absorbed mode has died out.

    Both fields are scaled copies of the input delayed by z/V_g1, with
    Omega20/Omega30 = Omega21/Omega31.
    """
    if strict:
        on_resonance_regime(params, z).require()
    times = np.asarray(times, dtype=float)
    c20, c30 = _coefficients(params)
    delayed = pulse.envelope(times - z * vg1_inverse(params))
    return EnvelopeTrace(times, c20 * delayed, c30 * delayed, z)


def detuned_fields(params: MediumParams, pulse: ProbePulse, z: float, times, strict: bool = True) -> EnvelopeTrace:
    """Two-mode envelopes of the strongly detuned regime.

    The second mode travels at V_g and carries the factor exp(i P z - Q z).
    """
    if strict:
        detuned_regime(params).require()
    times = np.asarray(times, dtype=float)
    consts = propagation_constants(params)
    c20, c30 = _coefficients(params)
    w3, w2 = _mode_weights(params)
    first = pulse.envelope(times - z * consts.inv_vg1)
    second = pulse.envelope(times - z * consts.inv_vg) * np.exp((1j * consts.p_factor - consts.q_factor) * z)
    omega30 = c30 * (first - second)
    # c20 * (w2/w3) written as w2/(w2+w3) so w3 = 0 stays finite
    omega20 = c20 * first + w2 / (w2 + w3) * second
    return EnvelopeTrace(times, omega20, omega30, z)


def efficiency_analytic(
    params: MediumParams, z: float, times, use_vg1: bool = False, strict: bool = True
) -> EfficiencyTrace:
    """Closed-form photon-flux conversion efficiency for a Gaussian probe.

    On resonance only the locked mode survives and the trace is
    ``prefactor * exp(-2 (t - z/V_g1)**2)``.  Otherwise the two-mode
    interference formula is used, with the first Gaussian centred on z/c
    (or z/V_g1 when ``use_vg1`` is set).
    """
    times = np.asarray(times, dtype=float)
    pref = conversion_prefactor(params)
    if params.delta2 == 0 and params.delta3 == 0:
        if strict:
            on_resonance_regime(params).require()
        centre = z * vg1_inverse(params)
        eff = pref * np.exp(-2.0 * (times - centre) ** 2)
        return EfficiencyTrace.from_samples(times, eff)
    if strict:
        detuned_regime(params).require()
    consts = propagation_constants(params)
    first_delay = z * consts.inv_vg1 if use_vg1 else z
    first = np.exp(-((times - first_delay) ** 2))
    second = np.exp(1j * consts.p_factor * z - consts.q_factor * z - (times - z * consts.inv_vg) ** 2)
    eff = pref * np.abs(first - second) ** 2
    return EfficiencyTrace.from_samples(times, eff)


def slow_mode_wavenumber(params: MediumParams, eta):
    """Medium part (free-space eta removed) of the weakly absorbed eigenvalue.

    Of the two eigenvalues of the coupling matrix the one of smaller modulus is
    returned, computed as det/(larger root) to avoid cancellation.
    """
    resp = spectral_response(params, eta)
    eta_arr = resp.eta
    k2m = resp.k2 - eta_arr
    k3m = resp.k3 - eta_arr
    mean = 0.5 * (k2m + k3m)
    det = k2m * k3m - resp.s2 * resp.s3
    lam = resp.lambda_big
    big = np.where(np.abs(mean + lam) >= np.abs(mean - lam), mean + lam, mean - lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / np.where(big != 0, big, 1.0), 0.0)
    return small if np.ndim(small) else complex(small)


def dispersion_approx_rhs(params: MediumParams, eta):
    """Strong-coupling slow-mode wavenumber D1 kappa02 kappa03 / (kappa02|O13|^2 + kappa03|O12|^2).

    The sign is the one that reproduces the z/V_g1 delay of the locked mode
    and absorption for gamma1 > 0 in this Fourier convention.
    """
    d1, _, _ = detuning_factors(params, eta)
    w3, w2 = _mode_weights(params)
    return d1 * params.kappa02 * params.kappa03 / (w2 + w3)


def dispersion_approx_error(params: MediumParams, eta: float) -> float:
    """Relative error of the strong-coupling approximation to the slow-mode wavenumber.

    Returns |exact - approx| / |exact|; 0 when both vanish.
    """
    exact = complex(slow_mode_wavenumber(params, eta))
    approx = complex(dispersion_approx_rhs(params, eta))
    if exact == 0:
        return 0.0 if approx == 0 else math.inf
    return abs(exact - approx) / abs(exact)
