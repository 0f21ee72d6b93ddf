"""Second-order plant models with pluggable drift, input gain, and disturbance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConstructionError, NonFiniteStateError

__all__ = ["State2", "PlantModel", "dynamics", "benchmark_plant", "get_plant", "register_plant", "PLANTS"]


@dataclass(frozen=True)
class State2:
    """Position-like and velocity-like state pair."""

    x1: float
    x2: float

    def __iter__(self):
        yield self.x1
        yield self.x2


@dataclass(frozen=True)
class PlantModel:
    """dx1/dt = x2, dx2/dt = drift(x1, x2) + input_gain(x1, x2) * u + disturbance(t).

    ``kappa`` bounds the disturbance magnitude; controllers use it as the
    robust switching gain.  All three callables must be pure and accept
    numpy arrays elementwise (the batch integrator relies on it).
    """

    drift: Callable
    input_gain: Callable
    disturbance: Callable
    kappa: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ConstructionError(f"disturbance bound kappa must be finite and >= 0, got {self.kappa!r}")


def dynamics(plant: PlantModel, t: float, x, u: float) -> tuple[float, float]:
    """State derivative for one control input; raises on non-finite output."""
    x1, x2 = x
    try:
        d2 = float(plant.drift(x1, x2) + plant.input_gain(x1, x2) * u + plant.disturbance(t))
        d1 = float(x2)
    except OverflowError:
        raise NonFiniteStateError(f"dynamics overflowed at t={t!r}, x=({x1!r}, {x2!r})") from None
    if not (math.isfinite(d1) and math.isfinite(d2)):
        raise NonFiniteStateError(f"dynamics produced a non-finite derivative at t={t!r}, x=({x1!r}, {x2!r})")
    return d1, d2


def _benchmark_drift(x1, x2):
    return x1 * x1 + x1 * np.sin(x2)


def _benchmark_gain(x1, x2):
    return (x1 + x2) ** 2 + 1.0


def _benchmark_disturbance(t):
    return 0.1 * np.sin(t)


def benchmark_plant() -> PlantModel:
    """The benchmark instance: f = x1^2 + x1 sin(x2), g = (x1+x2)^2 + 1, w = 0.1 sin(t).

    The input gain is a square plus one, so it is >= 1 everywhere and the
    control inversion can never be singular on this plant.
    """
    return PlantModel(
        drift=_benchmark_drift,
        input_gain=_benchmark_gain,
        disturbance=_benchmark_disturbance,
        kappa=0.1,
    )


PLANTS: dict[str, Callable[[], PlantModel]] = {"benchmark": benchmark_plant}


def register_plant(name: str, factory: Callable[[], PlantModel]) -> None:
    """Register a plant factory under a stable string name.

    Factories registered for parallel campaigns must be module-level
    callables so scenario chunks can be shipped to worker processes.
    """
    PLANTS[name] = factory


def get_plant(name: str) -> PlantModel:
    try:
        return PLANTS[name]()
    except KeyError:
        known = ", ".join(sorted(PLANTS))
        raise ConstructionError(f"unknown plant {name!r}; known plants: {known}") from None
