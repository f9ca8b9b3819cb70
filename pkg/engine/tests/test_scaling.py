"""Tests for the device-to-dimensionless conversion."""

import logging

import numpy as np
import pytest
from scipy import constants

from spinqdd.core.errors import ConfigurationError
from spinqdd.physics.scaling import DeviceParameters, dimensionless_scales


class TestDimensionlessScales:
    def test_reference_formulas(self):
        device = DeviceParameters(length=1e-7, temperature=300.0, rashba=1e-11, relaxation_time=1e-13)
        scales = dimensionless_scales(device)
        mass = 0.067 * constants.m_e
        p0 = np.sqrt(mass * constants.k * 300.0)
        t_e = mass * 1e-7 / p0
        assert scales.eps == pytest.approx(constants.hbar / (1e-7 * p0))
        assert scales.alpha == pytest.approx(mass * 1e-7 * 1e-11 * constants.e / constants.hbar**2)
        assert scales.tau == pytest.approx(1e-13 / t_e)
        assert scales.tau0 == pytest.approx(1.0)

    def test_observation_time_sets_tau0(self):
        base = dimensionless_scales(DeviceParameters(length=1e-7, temperature=300.0))
        scaled = dimensionless_scales(DeviceParameters(length=1e-7, temperature=300.0, observation_time=2 * base.energy_time))
        assert scaled.tau0 == pytest.approx(0.5)

    @pytest.mark.parametrize("field", ["length", "temperature", "mass_ratio", "relaxation_time"])
    def test_rejects_non_positive(self, field):
        kwargs = {"length": 1e-7, "temperature": 300.0, field: 0.0}
        with pytest.raises(ConfigurationError):
            dimensionless_scales(DeviceParameters(**kwargs))

    def test_warns_when_tau_is_large(self, caplog):
        with caplog.at_level(logging.WARNING, logger="spinqdd.physics.scaling"):
            dimensionless_scales(DeviceParameters(length=1e-9, temperature=4.0, relaxation_time=1e-9))
        assert any("tau=" in record.message for record in caplog.records)

    def test_to_dict(self):
        data = dimensionless_scales(DeviceParameters(length=1e-7, temperature=77.0)).to_dict()
        assert set(data) >= {"eps", "alpha", "tau", "tau0"}
