"""Exact frequency-domain propagation of the probe and the generated field.

For every frequency the two field spectra obey ``dW/dz = i M W`` with a
z-independent 2x2 matrix ``M = [[K2, S2], [S3, K3]]``.  The propagator
``exp(i z M)`` is evaluated through the two normal-mode exponentials
``exp(i (d_bar +/- lambda) z)`` and the result is brought back to the time
domain by direct quadrature (or an FFT when the time samples allow it).

Fourier convention: ``W(eta) = (2 pi)**-1/2 * int Omega(t) exp(+i eta t) dt``
and ``Omega(t) = (2 pi)**-1/2 * int W(eta) exp(-i eta t) d eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GainOverflow, GridTooCoarse, InvalidParameter, PhaseAliasing, SingularResponse, ZeroProbe
from .model import MediumParams, ProbePulse, atomic_amplitudes, spectral_response

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Largest allowed growth exponent before GainOverflow is raised.
MAX_GAIN_EXPONENT = 700.0

#: Maximum phase step of the propagated spectrum between neighbouring samples.
MAX_PHASE_STEP = math.pi / 4

#: Half-width of the frequency band checked for phase aliasing.
ALIAS_BAND = 8.0


@dataclass(frozen=True)
class SpectralGrid:
    eta_min: float = -16.0
    eta_max: float = 16.0
    n_points: int = 4096

    def __post_init__(self):
        if not (self.eta_min < self.eta_max):
            raise InvalidParameter("eta_min must be < eta_max")
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise InvalidParameter("n_points must be an integer >= 16")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.eta_max - self.eta_min) / (self.n_points - 1)

    @property
    def eta(self) -> np.ndarray:
        return np.linspace(self.eta_min, self.eta_max, self.n_points)

    def refined(self, factor: int = 2) -> "SpectralGrid":
        return SpectralGrid(self.eta_min, self.eta_max, (self.n_points - 1) * factor + 1)


@dataclass(frozen=True)
class SpectralField:
    """Spectra of the probe (``w20``) and generated field (``w30``) at distance ``z``.

    ``params`` is attached by :func:`propagate` so the inverse transform can
    check the grid against the propagation phase.
    """

    grid: SpectralGrid
    w20: np.ndarray
    w30: np.ndarray
    z: float = 0.0
    params: MediumParams | None = field(default=None, compare=False)

    def __post_init__(self):
        w20 = np.asarray(self.w20, dtype=complex)
        w30 = np.asarray(self.w30, dtype=complex)
        n = self.grid.n_points
        if w20.shape != (n,) or w30.shape != (n,):
            raise InvalidParameter(f"spectra must have shape ({n},)")
        if not (np.all(np.isfinite(w20)) and np.all(np.isfinite(w30))):
            raise InvalidParameter("spectra must be finite")
        object.__setattr__(self, "w20", w20)
        object.__setattr__(self, "w30", w30)


@dataclass(frozen=True)
class TransferMatrix:
    """Propagator entries at given (eta, z); each entry broadcasts like ``eta``."""

    t11: np.ndarray
    t12: np.ndarray
    t21: np.ndarray
    t22: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack(
            [np.stack([self.t11, self.t12], axis=-1), np.stack([self.t21, self.t22], axis=-1)],
            axis=-2,
        )

    def apply(self, w20, w30):
        return self.t11 * w20 + self.t12 * w30, self.t21 * w20 + self.t22 * w30


@dataclass(frozen=True)
class EnvelopeTrace:
    """Complex envelopes Omega20*tau and Omega30*tau at distance ``z`` (c*tau)."""

    times: np.ndarray
    omega20: np.ndarray
    omega30: np.ndarray
    z: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        o20 = np.asarray(self.omega20, dtype=complex)
        o30 = np.asarray(self.omega30, dtype=complex)
        if not (times.shape == o20.shape == o30.shape) or times.ndim != 1:
            raise InvalidParameter("times, omega20 and omega30 must be 1-D of equal length")
        if not (np.all(np.isfinite(o20)) and np.all(np.isfinite(o30))):
            raise InvalidParameter("envelopes must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "omega20", o20)
        object.__setattr__(self, "omega30", o30)

    @property
    def retarded_times(self) -> np.ndarray:
        """(t - z/c)/tau."""
        return self.times - self.z


@dataclass(frozen=True)
class EfficiencyTrace:
    times: np.ndarray
    efficiency: np.ndarray
    peak: float
    peak_time: float

    @classmethod
    def from_samples(cls, times, efficiency) -> "EfficiencyTrace":
        times = np.asarray(times, dtype=float)
        efficiency = np.asarray(efficiency, dtype=float)
        if np.any(efficiency < 0) or not np.all(np.isfinite(efficiency)):
            raise InvalidParameter("efficiency must be finite and non-negative")
        i = int(np.argmax(efficiency))
        return cls(times, efficiency, float(efficiency[i]), float(times[i]))


def probe_spectrum(pulse: ProbePulse, grid: SpectralGrid | None = None) -> SpectralField:
    """Entrance spectra: the probe transform and a vanishing generated field.

    Raises
    ------
    GridTooCoarse
        If the grid spacing exceeds 0.5, which under-resolves the Gaussian.
    """
    grid = grid or SpectralGrid()
    if grid.spacing > 0.5:
        raise GridTooCoarse(f"eta spacing {grid.spacing:.3g} > 0.5 under-resolves the probe spectrum")
    eta = grid.eta
    if pulse.is_gaussian:
        w20 = pulse.amplitude / math.sqrt(2.0) * np.exp(-0.25 * eta**2)
    else:
        t = pulse.times
        weights = np.empty_like(t)
        dt = np.diff(t)
        weights[0], weights[-1] = 0.5 * dt[0], 0.5 * dt[-1]
        weights[1:-1] = 0.5 * (dt[:-1] + dt[1:])
        kernel = np.exp(1j * np.outer(eta, t))
        w20 = pulse.amplitude * (kernel @ (pulse.samples * weights)) / SQRT_2PI
    return SpectralField(grid, w20, np.zeros_like(w20), z=0.0)


def _mode_exponentials(d_bar, lam, z):
    growth = -np.minimum((d_bar + lam).imag, (d_bar - lam).imag) * z
    if np.any(growth > MAX_GAIN_EXPONENT):
        raise GainOverflow(
            f"normal-mode growth exponent {np.max(growth):.4g} exceeds {MAX_GAIN_EXPONENT:g}; "
            "the parameters describe gain, not absorption"
        )
    return np.exp(1j * (d_bar + lam) * z), np.exp(1j * (d_bar - lam) * z)


def _cos_and_sinc(d_bar, lam, z):
    """exp(i d_bar z) * cos(lam z) and exp(i d_bar z) * sin(lam z)/lam."""
    e_plus, e_minus = _mode_exponentials(d_bar, lam, z)
    cos_part = 0.5 * (e_plus + e_minus)
    x = lam * z
    small = np.abs(x) < 1e-2
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc_part = np.where(small, 0.0, (e_plus - e_minus) / (2j * np.where(small, 1.0, lam)))
    if np.any(small):
        x2 = (x * x)[small] if np.ndim(x) else x * x
        series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
        phase = np.exp(1j * d_bar * z)
        if np.ndim(sinc_part):
            sinc_part[small] = (phase[small] if np.ndim(phase) else phase) * z * series
        else:
            sinc_part = phase * z * series
    return cos_part, sinc_part


def transfer_matrix(params: MediumParams, eta, z: float, branch: int = 1) -> TransferMatrix:
    """Propagator ``exp(i z M)`` from the entrance to distance ``z``.

    ``branch=-1`` flips the sign of the square root used for lambda; results
    agree with the default branch up to rounding.
    """
    if z < 0:
        raise InvalidParameter("z must be >= 0")
    resp = spectral_response(params, eta)
    lam = branch * resp.lambda_big
    cos_part, sinc_part = _cos_and_sinc(resp.d_bar, lam, z)
    half_diff = 0.5 * (resp.k2 - resp.k3)
    return TransferMatrix(
        t11=cos_part + 1j * half_diff * sinc_part,
        t12=1j * resp.s2 * sinc_part,
        t21=1j * resp.s3 * sinc_part,
        t22=cos_part - 1j * half_diff * sinc_part,
    )


def propagate(params: MediumParams, field0: SpectralField, z: float) -> SpectralField:
    """Carry both spectra a further distance ``z`` through the medium."""
    if z == 0:
        return SpectralField(field0.grid, field0.w20.copy(), field0.w30.copy(), field0.z, params)
    eta = field0.grid.eta
    try:
        tm = transfer_matrix(params, eta, z)
    except SingularResponse as exc:
        raise SingularResponse(f"propagation failed: {exc}", eta=exc.eta) from exc
    w20, w30 = tm.apply(field0.w20, field0.w30)
    return SpectralField(field0.grid, w20, w30, field0.z + z, params)


def max_phase_step(field: SpectralField, band: float = ALIAS_BAND) -> float:
    """Largest phase change of either spectrum between adjacent samples in |eta| <= band.

    Samples weaker than 1e-10 of the channel maximum are ignored.
    """
    eta = field.grid.eta
    inside = np.abs(eta) <= band
    worst = 0.0
    for w in (field.w20, field.w30):
        scale = np.max(np.abs(w))
        if scale == 0:
            continue
        w = np.where(np.abs(w) > 1e-10 * scale, w, 0.0)
        pair = inside[1:] & inside[:-1] & (w[1:] != 0) & (w[:-1] != 0)
        if not np.any(pair):
            continue
        steps = np.abs(np.angle(w[1:] * np.conj(w[:-1])))[pair]
        worst = max(worst, float(np.max(steps)))
    return worst


def inverse_transform(field: SpectralField, times, check_aliasing: bool = True) -> EnvelopeTrace:
    """Time-domain envelopes at arbitrary ``times`` (units of tau) by direct quadrature.

    Raises
    ------
    GridTooCoarse
        If the grid spacing exceeds 0.25.
    PhaseAliasing
        If the propagated spectra rotate by more than pi/4 between neighbouring
        samples inside |eta| <= 8.
    """
    grid = field.grid
    if grid.spacing > 0.25:
        raise GridTooCoarse(f"eta spacing {grid.spacing:.3g} > 0.25 under-resolves the envelope")
    if check_aliasing:
        step = max_phase_step(field)
        if step > MAX_PHASE_STEP:
            raise PhaseAliasing(
                f"spectral phase step {step:.3g} rad exceeds pi/4; refine the eta grid",
                max_increment=step,
            )
    times = np.atleast_1d(np.asarray(times, dtype=float))
    weight = grid.spacing / SQRT_2PI
    kernel = np.exp(-1j * np.outer(times, grid.eta))
    out = kernel @ np.stack([field.w20, field.w30], axis=1) * weight
    return EnvelopeTrace(times, out[:, 0], out[:, 1], field.z)


def fft_times(grid: SpectralGrid, n_fft: int | None = None) -> np.ndarray:
    """Time samples on which :func:`inverse_transform_fft` evaluates, ascending."""
    n_fft = n_fft or grid.n_points
    dt = 2.0 * math.pi / (n_fft * grid.spacing)
    k = np.arange(n_fft) - n_fft // 2
    return k * dt


def inverse_transform_fft(field: SpectralField, n_fft: int | None = None) -> EnvelopeTrace:
    """Same Riemann sum as :func:`inverse_transform`, evaluated with an FFT.

    The output times are ``fft_times(grid, n_fft)``; ``n_fft`` >= n_points
    zero-pads the spectrum to sample time more finely.
    """
    grid = field.grid
    n_fft = n_fft or grid.n_points
    if n_fft < grid.n_points:
        raise InvalidParameter("n_fft must be >= n_points")
    times = fft_times(grid, n_fft)
    k = np.arange(n_fft) - n_fft // 2
    # sum_j W_j exp(-i (eta0 + j d) t_k) with t_k = 2 pi k / (n d)
    phase0 = np.exp(-1j * grid.eta_min * times)
    weight = grid.spacing / SQRT_2PI
    result = []
    for w in (field.w20, field.w30):
        padded = np.zeros(n_fft, dtype=complex)
        padded[: grid.n_points] = w
        spectrum = np.fft.fft(padded)  # index m -> exp(-2 pi i j m / n)
        result.append(phase0 * spectrum[k % n_fft] * weight)
    return EnvelopeTrace(times, result[0], result[1], field.z)


def efficiency_trace(trace: EnvelopeTrace, params: MediumParams, pulse: ProbePulse) -> EfficiencyTrace:
    """Photon-flux conversion efficiency (kappa02/kappa03) |Omega30|^2 / |Omega20(0,0)|^2."""
    peak_in = pulse.peak_amplitude()
    if peak_in == 0:
        raise ZeroProbe("probe amplitude is zero; efficiency undefined")
    if params.kappa03 == 0:
        raise InvalidParameter("kappa03 must be > 0 to define a photon-flux efficiency")
    eff = (params.kappa02 / params.kappa03) * np.abs(trace.omega30) ** 2 / peak_in**2
    return EfficiencyTrace.from_samples(trace.times, eff)


def alpha3_quench(params: MediumParams, field: SpectralField) -> float:
    """Suppression of the |3> excitation by the generated field.

    Ratio of max_eta |alpha3| to the largest single-pathway drive
    max_eta |Omega31 Omega12 W20 / Delta|, the value alpha3 would take with
    no generated field.  It is 1 at the entrance and falls towards 0 as the
    two excitation pathways cancel.  An empty field returns 0.
    """
    eta = field.grid.eta
    _, _, alpha3 = atomic_amplitudes(params, eta, field.w20, field.w30)
    resp = spectral_response(params, eta)
    pathway = np.abs(params.omega31 * params.omega12 * field.w20 / resp.delta_det)
    denom = float(np.max(pathway))
    num = float(np.max(np.abs(alpha3)))
    if denom == 0:
        return 0.0 if num == 0 else math.inf
    return num / denom


def default_times(params: MediumParams, z: float, n: int = 2001, half_width: float = 5.0) -> np.ndarray:
    """Time grid covering the vacuum delay and the slowest group delay."""
    from .analytic import group_delays

    delays = group_delays(params, z)
    return np.linspace(min(delays) - half_width, max(delays) + half_width, n)


def solve_spectral(
    params: MediumParams,
    pulse: ProbePulse,
    z: float,
    times=None,
    grid: SpectralGrid | None = None,
    max_refinements: int = 4,
):
    """Propagate the probe to ``z`` and transform back, refining the grid on aliasing.

    Returns ``(trace, field)``.
    """
    grid = grid or SpectralGrid()
    if times is None:
        times = default_times(params, z)
    for attempt in range(max_refinements + 1):
        field0 = probe_spectrum(pulse, grid)
        field_z = propagate(params, field0, z)
        try:
            return inverse_transform(field_z, times), field_z
        except PhaseAliasing:
            if attempt == max_refinements:
                raise
            grid = grid.refined(2)
    raise AssertionError("unreachable")
