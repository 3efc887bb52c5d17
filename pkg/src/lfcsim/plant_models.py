"""Physical blocks of a control area as transfer functions.

All quantities are per-unit deviations on a common system base; time
constants are in seconds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import MissingCompensationParams
from .tf_core import TransferFunction, series


@dataclass(frozen=True)
class GeneratorParams:
    H: float = 5.0  # inertia constant [s]
    D: float = 0.8  # load damping [pu/pu]

    def __post_init__(self):
        if not self.H > 0:
            raise ValueError(f"inertia H must be > 0, got {self.H}")
        if not self.D >= 0:
            raise ValueError(f"load damping D must be >= 0, got {self.D}")


@dataclass(frozen=True)
class GovernorParams:
    tau_g: float = 0.2  # [s]
    R: float = 0.05  # droop [pu freq / pu power]

    def __post_init__(self):
        if not self.tau_g > 0:
            raise ValueError(f"governor time constant tau_g must be > 0, got {self.tau_g}")
        if not self.R > 0:
            raise ValueError(f"droop R must be > 0, got {self.R}")


@dataclass(frozen=True)
class ThermalTurbineParams:
    tau_t: float = 0.5  # [s]

    def __post_init__(self):
        if not self.tau_t > 0:
            raise ValueError(f"turbine time constant tau_t must be > 0, got {self.tau_t}")


@dataclass(frozen=True)
class HydroTurbineParams:
    """Ideal lossless penstock plus optional transient-droop settings.

    ``R_t`` (temporary droop) and ``T_r`` (reset time) are only used when
    the governor compensation is switched on.
    """

    T_w: float = 1.0  # water starting time [s]
    R_t: Optional[float] = 0.38
    T_r: Optional[float] = 5.0

    def __post_init__(self):
        if not self.T_w > 0:
            raise ValueError(f"water starting time T_w must be > 0, got {self.T_w}")
        if self.T_r is not None and not self.T_r > 0:
            raise ValueError(f"reset time T_r must be > 0, got {self.T_r}")
        if self.R_t is not None and not self.R_t > 0:
            raise ValueError(f"temporary droop R_t must be > 0, got {self.R_t}")


def generator_tf(p: GeneratorParams) -> TransferFunction:
    """Rotor-plus-load block ``1 / (2H s + D)``.

    Input is the net accelerating power ``dPm - dPL`` (minus tie export),
    output is the per-unit speed deviation. Damping enters with the sign
    that opposes a speed rise.
    """
    return TransferFunction([1.0], [p.D, 2.0 * p.H])


def governor_tf(p: GovernorParams) -> TransferFunction:
    # droop 1/R is a feedback edge wired up in network, not part of this block
    return TransferFunction([1.0], [1.0, p.tau_g])


def thermal_turbine_tf(p: ThermalTurbineParams) -> TransferFunction:
    """Non-reheat steam turbine ``1 / (tau_t s + 1)``."""
    return TransferFunction([1.0], [1.0, p.tau_t])


def hydro_turbine_tf(p: HydroTurbineParams) -> TransferFunction:
    """Ideal hydro turbine ``(1 - T_w s) / (1 + T_w s / 2)``.

    Non-minimum phase: the zero sits at ``s = +1/T_w`` and the step
    response starts at -2 before settling to +1.
    """
    return TransferFunction([1.0, -p.T_w], [1.0, 0.5 * p.T_w])


def transient_droop_tf(gov: GovernorParams, hydro: HydroTurbineParams) -> TransferFunction:
    """Compensator ``(1 + T_r s) / (1 + (R_t/R) T_r s)``."""
    if hydro.R_t is None or hydro.T_r is None:
        raise MissingCompensationParams("transient droop needs both R_t and T_r")
    if not hydro.R_t > gov.R:
        raise ValueError(f"temporary droop R_t={hydro.R_t} must exceed permanent droop R={gov.R}")
    return TransferFunction([1.0, hydro.T_r], [1.0, hydro.R_t / gov.R * hydro.T_r])


def hydro_governor_tf(p: GovernorParams, h: HydroTurbineParams, compensation: bool = True) -> TransferFunction:
    gov = governor_tf(p)
    if not compensation:
        return gov
    return series(gov, transient_droop_tf(p, h))
