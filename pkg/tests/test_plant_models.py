import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lfcsim.errors import MissingCompensationParams
from lfcsim.plant_models import (
    GeneratorParams,
    GovernorParams,
    HydroTurbineParams,
    ThermalTurbineParams,
    generator_tf,
    governor_tf,
    hydro_governor_tf,
    hydro_turbine_tf,
    thermal_turbine_tf,
)
from lfcsim.sim_engine import SimConfig, step_response
from lfcsim.tf_core import TransferFunction as TF, dc_gain, series

pos = st.floats(0.01, 100)


def test_generator():
    assert generator_tf(GeneratorParams(5, 0.8)) == TF([1], [0.8, 10])
    g = generator_tf(GeneratorParams(5, 0))
    assert g == TF([1], [0, 10])
    assert g.poles() == pytest.approx([0.0])
    assert dc_gain(generator_tf(GeneratorParams(5, 0.8))) == pytest.approx(1.25, rel=1e-12)


def test_governor():
    g = governor_tf(GovernorParams(0.2, 0.05))
    assert g == TF([1], [1, 0.2])
    assert dc_gain(g) == 1.0
    # analytic 1 - exp(-t/tau) at t = tau
    res = step_response(g, SimConfig(0.001, 1))
    k = int(round(0.2 / 0.001))
    assert res.series["y"][k] == pytest.approx(1 - math.exp(-1), abs=1e-9)


def test_thermal_turbine():
    t = thermal_turbine_tf(ThermalTurbineParams(0.5))
    assert t == TF([1], [1, 0.5])
    assert dc_gain(t) == 1.0
    cascade = series(governor_tf(GovernorParams(0.2, 0.05)), t)
    assert cascade.isclose(TF([1], [1, 0.7, 0.1]), rtol=1e-14)


def test_hydro_turbine():
    h = hydro_turbine_tf(HydroTurbineParams(1.0))
    assert h == TF([1, -1], [1, 0.5])
    assert dc_gain(h) == 1.0
    # initial value theorem: lim s->inf G(s) = -T_w / (T_w/2) = -2
    assert h(1e12) == pytest.approx(-2.0, rel=1e-9)
    res = step_response(h, SimConfig(0.01, 5))
    assert res.series["y"][1] < 0


def test_hydro_governor():
    gov = GovernorParams(0.2, 0.05)
    hyd = HydroTurbineParams(1.0, R_t=0.38, T_r=5.0)
    assert hydro_governor_tf(gov, hyd, compensation=False) == TF([1], [1, 0.2])
    comp = hydro_governor_tf(gov, hyd, compensation=True)
    want = TF([1, 5], np.convolve([1, 0.2], [1, 38]))
    assert comp.isclose(want, rtol=1e-14)
    assert dc_gain(comp) == pytest.approx(1.0, abs=1e-12)


def test_hydro_governor_missing_params():
    with pytest.raises(MissingCompensationParams):
        hydro_governor_tf(GovernorParams(), HydroTurbineParams(1.0, R_t=None), compensation=True)
    # compensation off does not need them
    hydro_governor_tf(GovernorParams(), HydroTurbineParams(1.0, R_t=None, T_r=None), compensation=False)


@pytest.mark.parametrize("make", [
    lambda: GeneratorParams(H=0),
    lambda: GeneratorParams(D=-0.1),
    lambda: GovernorParams(R=-0.05),
    lambda: GovernorParams(tau_g=0),
    lambda: ThermalTurbineParams(0),
    lambda: HydroTurbineParams(T_w=-1),
    lambda: HydroTurbineParams(T_r=0),
])
def test_param_invariants(make):
    with pytest.raises(ValueError):
        make()


def test_transient_droop_must_exceed_droop():
    with pytest.raises(ValueError):
        hydro_governor_tf(GovernorParams(0.2, 0.5), HydroTurbineParams(1.0, R_t=0.38, T_r=5))


@given(pos, pos, pos, pos, st.floats(0.01, 1.0))
def test_blocks_proper_stable_unit_gain(H, D, tau_g, tau_t, R):
    for g in (generator_tf(GeneratorParams(H, D)), governor_tf(GovernorParams(tau_g, R)),
              thermal_turbine_tf(ThermalTurbineParams(tau_t))):
        assert g.num.degree <= g.den.degree
        # Routh for degree <= 2: all denominator coefficients positive
        assert all(c > 0 for c in g.den.coeffs)
    assert dc_gain(governor_tf(GovernorParams(tau_g, R))) == pytest.approx(1.0, abs=1e-12)
    assert dc_gain(thermal_turbine_tf(ThermalTurbineParams(tau_t))) == pytest.approx(1.0, abs=1e-12)
    assert dc_gain(generator_tf(GeneratorParams(H, D))) == pytest.approx(1 / D, rel=1e-12)


@given(pos, st.floats(0.01, 0.2), pos, pos)
def test_hydro_rhp_zero_and_unit_gain(T_w, R, tau_g, T_r):
    h = HydroTurbineParams(T_w, R_t=R * 3, T_r=T_r)
    tf = hydro_turbine_tf(h)
    zeros = tf.zeros()
    assert len(zeros) == 1
    assert zeros[0].real == pytest.approx(1 / T_w, rel=1e-12)
    assert dc_gain(tf) == pytest.approx(1.0, abs=1e-12)
    comp = hydro_governor_tf(GovernorParams(tau_g, R), h, True)
    assert dc_gain(comp) == pytest.approx(1.0, abs=1e-12)
