"""Dimensionless parameters of a physical device.

Reference scales: thermal momentum p0 = sqrt(m kB T0), energy time tE = m x0 / p0.
Then eps = hbar / (x0 p0), alpha = m x0 alpha_R / hbar^2 (alpha_R in J m),
tau = tau_c / tE and tau0 = tE / t0.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy import constants

from spinqdd.core.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class DeviceParameters:
    length: float  # m
    temperature: float  # K
    mass_ratio: float = 0.067  # effective mass over electron mass
    rashba: float = 0.0  # eV m
    relaxation_time: float = 1e-13  # s
    observation_time: float = 0.0  # s; 0 means tE

    def validate(self):
        for name in ("length", "temperature", "mass_ratio", "relaxation_time"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"Device parameter '{name}' must be positive", **{name: getattr(self, name)})
        if self.rashba < 0 or self.observation_time < 0:
            raise ConfigurationError("Rashba constant and observation time must be non-negative")


@dataclass
class DimensionlessScales:
    eps: float
    alpha: float
    tau: float
    tau0: float
    thermal_momentum: float
    energy_time: float
    reference_potential: float

    def to_dict(self) -> dict:
        return asdict(self)


def dimensionless_scales(device: DeviceParameters) -> DimensionlessScales:
    device.validate()
    mass = device.mass_ratio * constants.m_e
    p0 = np.sqrt(mass * constants.k * device.temperature)
    t_e = mass * device.length / p0
    rashba_si = device.rashba * constants.e
    t0 = device.observation_time or t_e
    scales = DimensionlessScales(
        eps=constants.hbar / (device.length * p0),
        alpha=mass * device.length * rashba_si / constants.hbar**2,
        tau=device.relaxation_time / t_e,
        tau0=t_e / t0,
        thermal_momentum=p0,
        energy_time=t_e,
        reference_potential=p0**2 / (mass * constants.e),
    )
    if scales.tau >= 1:
        logger.warning(f"tau={scales.tau:.3g} is not small; the hydrodynamic scaling does not apply")
    if abs(scales.tau0 - 1) > 0.5:
        logger.warning(f"tau0={scales.tau0:.3g}; the fluid models assume tau0 = 1")
    return scales
