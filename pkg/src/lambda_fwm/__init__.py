"""Weak-probe propagation and four-wave mixing in a double-Lambda atomic medium."""

from .errors import *  # noqa: F401,F403
from .model import MediumParams, ProbePulse, SpectralResponse, atomic_amplitudes, detuning_factors, spectral_response
from .spectral import (
    EfficiencyTrace,
    EnvelopeTrace,
    SpectralField,
    SpectralGrid,
    TransferMatrix,
    alpha3_quench,
    efficiency_trace,
    inverse_transform,
    probe_spectrum,
    propagate,
    solve_spectral,
    transfer_matrix,
)

__version__ = "0.1.0"
