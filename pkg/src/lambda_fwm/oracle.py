"""Brute-force time-domain solver used to cross-check the spectral propagator.

The amplitude equations and the field equations are integrated directly in
the retarded frame (xi = z, s = t - z/c), where the field equations reduce to
``d Omega / d xi = i kappa A`` at fixed s and the atomic equations become
linear ODEs in s at fixed xi.

* In s: classical RK4 with the fields at half steps from cubic interpolation.
  Because the atomic matrix is constant, one RK4 step is an affine map
  ``A_{n+1} = R A_n + b_n`` with R and the source weights expanded once; the
  recurrence itself runs in a compiled loop.
* In z: fourth-order Adams-Bashforth-Moulton predictor-corrector (two
  rate evaluations per step, RK4 start-up); ``scheme="heun"`` selects the
  second-order Heun predictor-corrector instead.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidParameter, NotConverged, StepTooLarge
from .model import MediumParams, ProbePulse, WeakProbeWarning
from .spectral import EnvelopeTrace

log = logging.getLogger(__name__)

RICHARDSON_TOL = 1e-3
#: z step times the stiffest field rate; 1 keeps every absorbing mode inside the stability region.
Z_STEP_SAFETY = 1.0


@dataclass(frozen=True)
class SpaceTimeGrid:
    z_steps: int
    s_min: float
    s_max: float
    s_steps: int

    def __post_init__(self):
        if self.z_steps < 8:
            raise InvalidParameter("z_steps must be >= 8")
        if self.s_steps < 64:
            raise InvalidParameter("s_steps must be >= 64")
        if not self.s_min < self.s_max:
            raise InvalidParameter("s_min must be < s_max")

    @property
    def s(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.s_steps + 1)

    @property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / self.s_steps

    def halved(self) -> "SpaceTimeGrid":
        return SpaceTimeGrid(2 * self.z_steps, self.s_min, self.s_max, 2 * self.s_steps)

    @classmethod
    def auto(cls, params: MediumParams, z: float, margin: float = 6.0) -> "SpaceTimeGrid":
        """Grid that resolves the fastest Rabi oscillation and keeps the z march stable."""
        rabi = max(abs(params.omega12), abs(params.omega13), 1.0)
        ds_max = 0.1 / rabi
        delay = _max_medium_delay(params) * z
        s_min, s_max = -margin, margin + delay
        s_steps = max(64, int(math.ceil((s_max - s_min) / ds_max)))
        rate = field_rate_bound(params)
        z_steps = max(8, int(math.ceil(z * rate / Z_STEP_SAFETY))) if z > 0 else 8
        return cls(z_steps, s_min, s_max, s_steps)


@dataclass
class OracleState:
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    omega20: np.ndarray
    omega30: np.ndarray


def _atomic_matrix(params: MediumParams) -> np.ndarray:
    """H with dA/ds = H A + i (0, Omega20, Omega30)."""
    return 1j * np.array(
        [
            [params.delta1 + 0.5j * params.gamma1, params.omega12, params.omega13],
            [params.omega21, params.delta2 + 0.5j * params.gamma2, 0.0],
            [params.omega31, 0.0, params.delta3 + 0.5j * params.gamma3],
        ],
        dtype=complex,
    )


def _max_medium_delay(params: MediumParams) -> float:
    """Largest group-delay excess per unit length over c, used only to size the s window."""
    from .analytic import group_delays

    if params.kappa02 == 0 and params.kappa03 == 0:
        return 0.0
    return max(0.0, max(group_delays(params, 1.0)) - 1.0)


def _field_rates(params: MediumParams, eta) -> np.ndarray:
    """Eigenvalues of the frequency-domain field coupling, built from the atomic matrix.

    For a harmonic drive exp(-i eta s) the atomic response is
    A = -(H + i eta)^-1 i g, so the field rates are eigenvalues of
    kappa * (H + i eta)^-1 restricted to the probe/FWM components.
    """
    h = _atomic_matrix(params)
    kappa = np.diag([params.kappa02, params.kappa03])
    out = []
    for e in np.atleast_1d(eta):
        resolvent = np.linalg.inv(h + 1j * e * np.eye(3))
        coupling = kappa @ resolvent[1:, 1:]
        out.append(np.linalg.eigvals(coupling))
    return np.array(out)


def field_rate_bound(params: MediumParams) -> float:
    """max over frequency of the field growth/absorption rate magnitude."""
    if params.kappa02 == 0 and params.kappa03 == 0:
        return 0.0
    h = _atomic_matrix(params)
    # resonances of the atomic matrix sit at eta = i * eigenvalues(H)
    poles = (1j * np.linalg.eigvals(h)).real
    span = max(10.0, float(np.max(np.abs(poles))) + 10.0)
    coarse = np.linspace(-span, span, 2001)
    fine = [coarse]
    for pole in poles:
        fine.append(pole + np.linspace(-2.0, 2.0, 401))
    eta = np.concatenate(fine)
    return float(np.max(np.abs(_field_rates(params, eta))))


@njit(cache=True)
def _half_step(f, i):
    """Cubic interpolation of f at node i + 1/2 (one-sided at the ends)."""
    n = f.size
    if n < 4:
        return 0.5 * (f[i] + f[i + 1])
    if i == 0:
        return (5 * f[0] + 15 * f[1] - 5 * f[2] + f[3]) / 16
    if i == n - 2:
        return (f[n - 4] - 5 * f[n - 3] + 15 * f[n - 2] + 5 * f[n - 1]) / 16
    return (-f[i - 1] + 9 * f[i] + 9 * f[i + 1] - f[i + 2]) / 16


@njit(cache=True)
def _rk4_recurrence(r, g0, gh, g1, f20, f30):
    """A_{n+1} = R A_n + G0 f_n + Gh f_{n+1/2} + G1 f_{n+1}, with A_0 = 0."""
    n = f20.size
    out = np.zeros((n, 3), dtype=np.complex128)
    a = np.zeros(3, dtype=np.complex128)
    new = np.zeros(3, dtype=np.complex128)
    for i in range(n - 1):
        m20 = _half_step(f20, i)
        m30 = _half_step(f30, i)
        for row in range(3):
            new[row] = (
                r[row, 0] * a[0] + r[row, 1] * a[1] + r[row, 2] * a[2]
                + g0[row, 0] * f20[i] + g0[row, 1] * f30[i]
                + gh[row, 0] * m20 + gh[row, 1] * m30
                + g1[row, 0] * f20[i + 1] + g1[row, 1] * f30[i + 1]
            )
        for row in range(3):
            a[row] = new[row]
            out[i + 1, row] = new[row]
    return out


class _AtomicSweep:
    """RK4 in s for the atomic amplitudes, precomputed for one (params, ds)."""

    def __init__(self, params: MediumParams, ds: float):
        h = _atomic_matrix(params)
        x = ds * h
        eye = np.eye(3)
        x2 = x @ x
        x3 = x2 @ x
        self.r = np.ascontiguousarray(eye + x + x2 / 2 + x3 / 6 + x3 @ x / 24)
        # the source is i*(0, Omega20, Omega30): keep only columns 1 and 2, times i
        self.g0 = np.ascontiguousarray(1j * (ds / 6 * (eye + x + x2 / 2 + x3 / 4))[:, 1:])
        self.gh = np.ascontiguousarray(1j * (ds / 6 * (4 * eye + 2 * x + x2 / 2))[:, 1:])
        self.g1 = np.ascontiguousarray(1j * (ds / 6 * eye)[:, 1:].astype(complex))

    def __call__(self, omega20: np.ndarray, omega30: np.ndarray) -> np.ndarray:
        """Amplitudes (N, 3) on the s nodes, starting from A = 0 at s_min."""
        f20 = np.ascontiguousarray(omega20, dtype=np.complex128)
        f30 = np.ascontiguousarray(omega30, dtype=np.complex128)
        return _rk4_recurrence(self.r, self.g0, self.gh, self.g1, f20, f30)


def _march(params: MediumParams, pulse: ProbePulse, z: float, grid: SpaceTimeGrid, scheme: str = "abm4"):
    s = grid.s
    sweep = _AtomicSweep(params, grid.ds)
    y = np.zeros((2, s.size), dtype=complex)
    y[0] = pulse.envelope(s)
    kappa = np.array([params.kappa02, params.kappa03])
    weights = np.where(kappa > 0, 1.0 / np.where(kappa > 0, kappa, 1.0), 0.0)

    def rate(fields):
        amps = sweep(fields[0], fields[1])
        return 1j * kappa[:, None] * amps[:, 1:].T

    def energy(fields):
        return float(weights @ np.sum(np.abs(fields) ** 2, axis=1))

    e0 = energy(y)
    n_steps = grid.z_steps if z > 0 else 0
    h = z / grid.z_steps
    history = []  # rates at previous nodes, newest last
    f = rate(y) if n_steps else None
    for step in range(n_steps):
        if scheme == "heun":
            pred = y + h * f
            y = y + 0.5 * h * (f + rate(pred))
            f = rate(y)
        elif scheme == "abm4":
            if step < 3:
                # classical RK4 start-up for the multistep history
                k2 = rate(y + 0.5 * h * f)
                k3 = rate(y + 0.5 * h * k2)
                k4 = rate(y + h * k3)
                history.append(f)
                y = y + h / 6 * (f + 2 * k2 + 2 * k3 + k4)
            else:
                f1, f2, f3 = history[-1], history[-2], history[-3]
                pred = y + h / 24 * (55 * f - 59 * f1 + 37 * f2 - 9 * f3)
                y = y + h / 24 * (9 * rate(pred) + 19 * f - 5 * f1 + f2)
                history.append(f)
                del history[:-3]
            f = rate(y)
        else:
            raise InvalidParameter(f"unknown z scheme {scheme!r}")
        e = energy(y)
        if not np.isfinite(e) or e > e0 * (1 + 1e-2) + 1e-300:
            raise StepTooLarge(
                f"weighted field energy grew from {e0:.4g} to {e:.4g} at step {step}; "
                f"reduce the z step (dz = {h:.3g})"
            )
    omega20, omega30 = y
    amps = sweep(omega20, omega30)
    norm = np.sum(np.abs(amps) ** 2, axis=1)
    if np.max(norm) > 1.0 + 1e-6:
        warnings.warn(
            f"max |A1|^2+|A2|^2+|A3|^2 = {np.max(norm):.3g} > 1: probe too strong for the "
            "non-depleted ground-state approximation",
            WeakProbeWarning,
            stacklevel=3,
        )
    state = OracleState(amps[:, 0], amps[:, 1], amps[:, 2], omega20, omega30)
    return s, state


def richardson_error(coarse: OracleState, fine: OracleState) -> float:
    """max |coarse - fine| / max |fine| over both fields, on the coarse nodes."""
    worst = 0.0
    for a, b in ((coarse.omega20, fine.omega20), (coarse.omega30, fine.omega30)):
        b = b[::2]
        scale = np.max(np.abs(b))
        if scale > 0:
            worst = max(worst, float(np.max(np.abs(a - b)) / scale))
    return worst


@dataclass
class OracleResult:
    trace: EnvelopeTrace
    state: OracleState
    grid: SpaceTimeGrid
    error_estimate: float


def oracle_run(
    params: MediumParams,
    pulse: ProbePulse,
    z: float,
    grid: SpaceTimeGrid | None = None,
    richardson: bool = True,
    tol: float = RICHARDSON_TOL,
    scheme: str = "abm4",
) -> OracleResult:
    """Integrate to ``z`` and return the fine-grid solution with its error estimate.

    With ``richardson`` the problem is solved on ``grid`` and on a grid with
    both steps halved; the relative difference is the error estimate.
    """
    if z < 0:
        raise InvalidParameter("z must be >= 0")
    params.check_probe(pulse)
    grid = grid or SpaceTimeGrid.auto(params, z)
    if grid.ds > 0.1 / max(abs(params.omega12), abs(params.omega13), 1.0) * (1 + 1e-12):
        raise InvalidParameter(f"ds = {grid.ds:.3g} does not resolve the Rabi oscillation")
    s, state = _march(params, pulse, z, grid, scheme)
    error = math.nan
    used = grid
    if richardson:
        fine_grid = grid.halved()
        s_fine, fine = _march(params, pulse, z, fine_grid, scheme)
        error = richardson_error(state, fine)
        log.debug("oracle richardson error %.3g (z_steps=%d, s_steps=%d)", error, grid.z_steps, grid.s_steps)
        if error > tol:
            raise NotConverged(f"Richardson error {error:.3g} exceeds {tol:g}", error_estimate=error)
        s, state, used = s_fine, fine, fine_grid
    trace = EnvelopeTrace(s + z, state.omega20, state.omega30, z)
    return OracleResult(trace, state, used, error)


def oracle_solve(params: MediumParams, pulse: ProbePulse, z: float, grid: SpaceTimeGrid | None = None) -> EnvelopeTrace:
    """Envelopes at distance ``z`` from direct integration, Richardson-checked."""
    return oracle_run(params, pulse, z, grid).trace


@dataclass(frozen=True)
class SolverComparison:
    max_abs_error: tuple
    relative_l2_error: tuple

    def as_dict(self) -> dict:
        return {
            "max_abs_error": {"omega20": self.max_abs_error[0], "omega30": self.max_abs_error[1]},
            "relative_l2_error": {"omega20": self.relative_l2_error[0], "omega30": self.relative_l2_error[1]},
        }


def compare_traces(trace: EnvelopeTrace, reference: EnvelopeTrace) -> SolverComparison:
    if not np.array_equal(trace.times, reference.times):
        raise InvalidParameter("traces must share a time grid")
    max_abs, rel = [], []
    for a, b in ((trace.omega20, reference.omega20), (trace.omega30, reference.omega30)):
        diff = a - b
        max_abs.append(float(np.max(np.abs(diff))))
        ref_norm = float(np.linalg.norm(b))
        rel.append(float(np.linalg.norm(diff) / ref_norm) if ref_norm > 0 else float(np.linalg.norm(diff)))
    return SolverComparison(tuple(max_abs), tuple(rel))


def compare_solvers(params: MediumParams, pulse: ProbePulse, z: float, n_times: int = 1201, oracle_grid=None):
    """Oracle vs spectral solution on a shared time grid.

    Returns ``(comparison, oracle_trace, spectral_trace)``; errors are relative
    to the spectral solution.
    """
    from .spectral import solve_spectral

    result = oracle_run(params, pulse, z, oracle_grid)
    full = result.trace
    stride = max(1, (full.times.size - 1) // (n_times - 1))
    oracle_trace = EnvelopeTrace(full.times[::stride], full.omega20[::stride], full.omega30[::stride], z)
    spectral_trace, _ = solve_spectral(params, pulse, z, oracle_trace.times)
    return compare_traces(oracle_trace, spectral_trace), oracle_trace, spectral_trace
