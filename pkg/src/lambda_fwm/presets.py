"""Parameter sets of the published figures and the resonant reference cases."""

from __future__ import annotations

import math

from .model import MediumParams

FIG2A = MediumParams(
    omega12=200.0,
    omega13=100.0,
    delta1=0.0,
    delta2=20.0,
    delta3=20.0,
    gamma1=0.1,
    gamma2=0.1,
    gamma3=0.1,
    kappa02=40.0,
    kappa03=10.0,
)
FIG2B = FIG2A.replace(delta2=10.0, delta3=10.0)

#: Resonant case with unequal Rabi frequencies, kappa*c*tau**2 = 200 on both transitions.
RESONANT = MediumParams(
    omega12=5.0,
    omega13=20.0,
    delta1=0.0,
    delta2=0.0,
    delta3=0.0,
    gamma1=0.02,
    gamma2=2.0,
    gamma3=2.0,
    kappa02=200.0,
    kappa03=200.0,
)

#: Resonant and phase matched (kappa02|O13|^2 = kappa03|O12|^2) with strong coupling.
RESONANT_MATCHED = RESONANT.replace(omega12=50.0, omega13=50.0)

SWEEP_DETUNINGS = (10.0, 20.0, 40.0, 60.0)
SWEEP_RABI_RATIOS = (1.0, 0.5, 0.25, 0.1)

FIGURES = {
    "fig2a": {"base": FIG2A, "parameter": None, "values": ()},
    "fig2b": {"base": FIG2B, "parameter": None, "values": ()},
    "fig3a": {"base": FIG2A, "parameter": "delta2", "values": SWEEP_DETUNINGS},
    "fig3b": {"base": FIG2A, "parameter": "delta3", "values": SWEEP_DETUNINGS},
    "fig4": {"base": FIG2A, "parameter": "rabi_ratio_sq", "values": SWEEP_RABI_RATIOS},
}

#: Distance of the published Fig. 2a curves, used for the fixed-distance sweep variant.
FIG2A_Z = 3.927


def apply_sweep_value(base: MediumParams, parameter: str, value: float) -> MediumParams:
    """Medium with one swept quantity changed.

    ``rabi_ratio_sq`` sets |Omega13/Omega12|^2 by scaling ``omega13`` and
    keeping ``omega12`` and the phase of ``omega13``.
    """
    if parameter in ("delta2", "delta3"):
        return base.replace(**{parameter: float(value)})
    if parameter == "rabi_ratio_sq":
        if value < 0:
            raise ValueError("rabi_ratio_sq must be >= 0")
        phase = base.omega13 / abs(base.omega13) if base.omega13 != 0 else 1.0
        return base.replace(omega13=phase * abs(base.omega12) * math.sqrt(value))
    raise ValueError(f"unknown sweep parameter {parameter!r}")
