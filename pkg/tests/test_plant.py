import math

import numpy as np
import pytest

from pretime import benchmark_plant, dynamics, get_plant, register_plant
from pretime.errors import ConstructionError, NonFiniteStateError
from pretime.plant import PlantModel


class TestBenchmark:
    def test_disturbance_bound(self):
        assert benchmark_plant().kappa == 0.1

    def test_input_gain_at_origin(self):
        assert benchmark_plant().input_gain(0.0, 0.0) == 1.0

    def test_drift_hand_value(self):
        assert benchmark_plant().drift(2.0, 0.0) == 4.0

    def test_disturbance_within_bound(self, rng):
        plant = benchmark_plant()
        for t in rng.uniform(0.0, 100.0, size=200):
            assert abs(plant.disturbance(t)) <= plant.kappa

    def test_input_gain_never_below_one(self, rng):
        plant = benchmark_plant()
        x = rng.uniform(-2000.0, 2000.0, size=(500, 2))
        g = plant.input_gain(x[:, 0], x[:, 1])
        assert (g >= 1.0).all()


class TestDynamics:
    def test_rest_at_origin(self):
        assert dynamics(benchmark_plant(), 0.0, (0.0, 0.0), 0.0) == (0.0, 0.0)

    def test_disturbance_only(self):
        d1, d2 = dynamics(benchmark_plant(), math.pi / 2.0, (0.0, 0.0), 0.0)
        assert d1 == 0.0
        assert d2 == pytest.approx(0.1, rel=1e-12)

    def test_hand_evaluated_state(self):
        # f(1,0) = 1, g(1,0) = 2, w(0) = 0 -> (0, 1 + 2*1) = (0, 3)
        d1, d2 = dynamics(benchmark_plant(), 0.0, (1.0, 0.0), 1.0)
        assert (d1, d2) == (0.0, 3.0)

    def test_deterministic(self):
        plant = benchmark_plant()
        a = dynamics(plant, 0.37, (3.1, -2.2), 0.9)
        b = dynamics(plant, 0.37, (3.1, -2.2), 0.9)
        assert a == b

    def test_nonfinite_is_loud(self):
        plant = benchmark_plant()
        with pytest.raises(NonFiniteStateError):
            dynamics(plant, 0.0, (1e200, 0.0), 0.0)


class TestRegistry:
    def test_benchmark_is_registered(self):
        assert get_plant("benchmark").kappa == 0.1

    def test_unknown_plant(self):
        with pytest.raises(ConstructionError):
            get_plant("nope")

    def test_register_and_fetch(self):
        register_plant("test_double_integrator", _double_integrator)
        assert get_plant("test_double_integrator").kappa == 0.0

    def test_rejects_negative_kappa(self):
        with pytest.raises(ConstructionError):
            PlantModel(drift=lambda a, b: 0.0, input_gain=lambda a, b: 1.0, disturbance=lambda t: 0.0, kappa=-1.0)


def _zero(x1, x2):
    return 0.0 * x1


def _one(x1, x2):
    return 1.0 + 0.0 * x1


def _no_disturbance(t):
    return 0.0 * t


def _double_integrator():
    return PlantModel(drift=_zero, input_gain=_one, disturbance=_no_disturbance, kappa=0.0)
