"""Monotone regulator functions of a Lyapunov value.

A regulator is a strictly monotone map ``psi`` of ``u = V**p`` (with
``0 < p < 1``), where ``V`` is a nonnegative Lyapunov value.  Bounded
regulators travel a finite span between ``psi(0)`` and a far limit they
never reach; traversing that span at a bounded rate is what converts a
Lyapunov decay condition into a convergence budget with a single,
state-independent time constant.  Unbounded regulators yield plain
finite-time budgets instead.  The reciprocal slope magnitude
``1/|d psi/du|`` doubles as a controller gain.

The closed forms below are arranged so that ``psi`` and its first two
u-derivatives evaluate finitely for every representable ``u >= 0``
(decaying exponentials only).  The gain is the one structurally
unbounded quantity; it rejects arguments whose positive exponential
would overflow rather than returning ``inf``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import (
    ConstructionError,
    DomainError,
    OverflowGuardError,
    SingularGainError,
)

__all__ = [
    "EXP_ARG_MAX",
    "Direction",
    "Regulator",
    "RegulatorKind",
    "ExpComplement",
    "ArcsinTanh",
    "ArctanScaled",
    "RationalSaturating",
    "TanhScaled",
    "ExpOffset",
    "LogisticReciprocal",
    "InversePower",
    "SigmoidRatio",
    "UnboundedPower",
    "KINDS",
    "make_regulator",
]

Floats = Union[float, np.ndarray]

# Largest exponent passed to exp() before the gain rejects the input.
EXP_ARG_MAX = 700.0


class Direction(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.INCREASING else -1.0


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0.0):
            raise ConstructionError(f"parameter {name!r} must be finite and > 0, got {value!r}")


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ConstructionError(f"parameter {name!r} must be finite, got {value!r}")


@dataclass(frozen=True)
class ExpComplement:
    """psi = b - exp(-alpha * u), increasing on [b - 1, b)."""

    b: float = 2.0
    alpha: float = 1.0

    name: ClassVar[str] = "exp_complement"

    def __post_init__(self) -> None:
        _require_finite(b=self.b)
        _require_positive(alpha=self.alpha)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (self.b - 1.0, self.b, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return self.b - np.exp(-self.alpha * u)

    def dpsi_du(self, u: Floats) -> Floats:
        return self.alpha * np.exp(-self.alpha * u)

    def d2psi_du2(self, u: Floats) -> Floats:
        return -(self.alpha**2) * np.exp(-self.alpha * u)

    def gain_guard_arg(self, u: float) -> float:
        return self.alpha * u


@dataclass(frozen=True)
class ArcsinTanh:
    """psi = arcsin(tanh(u)), increasing on [0, pi/2)."""

    name: ClassVar[str] = "arcsin_tanh"

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, math.pi / 2.0, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return np.arcsin(np.tanh(u))

    def dpsi_du(self, u: Floats) -> Floats:
        # d/du arcsin(tanh u) = sech u
        return 1.0 / np.cosh(u)

    def d2psi_du2(self, u: Floats) -> Floats:
        return -np.tanh(u) / np.cosh(u)

    def gain_guard_arg(self, u: float) -> float:
        return u


@dataclass(frozen=True)
class ArctanScaled:
    """psi = arctan(sqrt(beta/alpha) * u), increasing on [0, pi/2)."""

    alpha: float = 1.0
    beta: float = 1.0

    name: ClassVar[str] = "arctan_scaled"

    def __post_init__(self) -> None:
        _require_positive(alpha=self.alpha, beta=self.beta)

    @property
    def _c(self) -> float:
        return math.sqrt(self.beta / self.alpha)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, math.pi / 2.0, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return np.arctan(self._c * u)

    def dpsi_du(self, u: Floats) -> Floats:
        c = self._c
        return c / (1.0 + (c * u) ** 2)

    def d2psi_du2(self, u: Floats) -> Floats:
        c = self._c
        return -2.0 * c**3 * u / (1.0 + (c * u) ** 2) ** 2

    def gain_guard_arg(self, u: float) -> float:
        return 0.0


@dataclass(frozen=True)
class RationalSaturating:
    """psi = scale * u / (u + k), increasing on [0, scale)."""

    scale: float = 1.0
    k: float = 1.0

    name: ClassVar[str] = "rational_saturating"

    def __post_init__(self) -> None:
        _require_positive(scale=self.scale, k=self.k)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, self.scale, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return self.scale * u / (u + self.k)

    def dpsi_du(self, u: Floats) -> Floats:
        return self.scale * self.k / (u + self.k) ** 2

    def d2psi_du2(self, u: Floats) -> Floats:
        return -2.0 * self.scale * self.k / (u + self.k) ** 3

    def gain_guard_arg(self, u: float) -> float:
        return 0.0


@dataclass(frozen=True)
class TanhScaled:
    """psi = m * tanh(n * u), increasing on [0, m)."""

    m: float = 1.0
    n: float = 1.0

    name: ClassVar[str] = "tanh_scaled"

    def __post_init__(self) -> None:
        _require_positive(m=self.m, n=self.n)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, self.m, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return self.m * np.tanh(self.n * u)

    def dpsi_du(self, u: Floats) -> Floats:
        sech = 1.0 / np.cosh(self.n * u)
        return self.m * self.n * sech**2

    def d2psi_du2(self, u: Floats) -> Floats:
        nu = self.n * u
        sech = 1.0 / np.cosh(nu)
        return -2.0 * self.m * self.n**2 * sech**2 * np.tanh(nu)

    def gain_guard_arg(self, u: float) -> float:
        # the gain carries cosh^2, hence the factor 2
        return 2.0 * self.n * u


@dataclass(frozen=True)
class ExpOffset:
    """psi = shift + exp(-alpha * u), decreasing on (shift, shift + 1]."""

    shift: float = 1.0
    alpha: float = 1.0

    name: ClassVar[str] = "exp_offset"

    def __post_init__(self) -> None:
        _require_positive(shift=self.shift, alpha=self.alpha)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (self.shift, self.shift + 1.0, Direction.DECREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return self.shift + np.exp(-self.alpha * u)

    def dpsi_du(self, u: Floats) -> Floats:
        return -self.alpha * np.exp(-self.alpha * u)

    def d2psi_du2(self, u: Floats) -> Floats:
        return self.alpha**2 * np.exp(-self.alpha * u)

    def gain_guard_arg(self, u: float) -> float:
        return self.alpha * u


@dataclass(frozen=True)
class LogisticReciprocal:
    """psi = n / (m + exp(alpha * u)), decreasing on (0, n / (m + 1)].

    Evaluated through the decaying exponential E = exp(-alpha * u):
    psi = n E / (m E + 1), which never overflows.
    """

    n: float = 1.0
    m: float = 1.0
    alpha: float = 1.0

    name: ClassVar[str] = "logistic_reciprocal"

    def __post_init__(self) -> None:
        _require_positive(n=self.n, m=self.m, alpha=self.alpha)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, self.n / (self.m + 1.0), Direction.DECREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        e = np.exp(-self.alpha * u)
        return self.n * e / (self.m * e + 1.0)

    def dpsi_du(self, u: Floats) -> Floats:
        e = np.exp(-self.alpha * u)
        return -self.n * self.alpha * e / (self.m * e + 1.0) ** 2

    def d2psi_du2(self, u: Floats) -> Floats:
        e = np.exp(-self.alpha * u)
        return self.n * self.alpha**2 * e * (1.0 - self.m * e) / (self.m * e + 1.0) ** 3

    def gain_guard_arg(self, u: float) -> float:
        return self.alpha * u


@dataclass(frozen=True)
class InversePower:
    """psi = 1 / (u + k), decreasing on (0, 1/k]."""

    k: float = 1.0

    name: ClassVar[str] = "inverse_power"

    def __post_init__(self) -> None:
        _require_positive(k=self.k)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, 1.0 / self.k, Direction.DECREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return 1.0 / (u + self.k)

    def dpsi_du(self, u: Floats) -> Floats:
        return -1.0 / (u + self.k) ** 2

    def d2psi_du2(self, u: Floats) -> Floats:
        return 2.0 / (u + self.k) ** 3

    def gain_guard_arg(self, u: float) -> float:
        return 0.0


@dataclass(frozen=True)
class SigmoidRatio:
    """psi = b / (a + exp(-alpha * u)), increasing on [b/(a+1), b/a)."""

    a: float = 1.0
    b: float = 3.0
    alpha: float = 1.0

    name: ClassVar[str] = "sigmoid_ratio"

    def __post_init__(self) -> None:
        _require_positive(a=self.a, b=self.b, alpha=self.alpha)

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (self.b / (self.a + 1.0), self.b / self.a, Direction.INCREASING, True)

    def psi_u(self, u: Floats) -> Floats:
        return self.b / (self.a + np.exp(-self.alpha * u))

    def dpsi_du(self, u: Floats) -> Floats:
        e = np.exp(-self.alpha * u)
        return self.b * self.alpha * e / (self.a + e) ** 2

    def d2psi_du2(self, u: Floats) -> Floats:
        e = np.exp(-self.alpha * u)
        return self.b * self.alpha**2 * e * (e - self.a) / (self.a + e) ** 3

    def gain_guard_arg(self, u: float) -> float:
        return self.alpha * u


@dataclass(frozen=True)
class UnboundedPower:
    """psi = u, the unbounded identity in u; degenerates to finite-time budgets."""

    name: ClassVar[str] = "power"

    def bounds(self) -> tuple[float, float, Direction, bool]:
        return (0.0, math.inf, Direction.INCREASING, False)

    def psi_u(self, u: Floats) -> Floats:
        return np.asarray(u, dtype=float) if isinstance(u, np.ndarray) else float(u)

    def dpsi_du(self, u: Floats) -> Floats:
        if isinstance(u, np.ndarray):
            return np.ones_like(u, dtype=float)
        return 1.0

    def d2psi_du2(self, u: Floats) -> Floats:
        if isinstance(u, np.ndarray):
            return np.zeros_like(u, dtype=float)
        return 0.0

    def gain_guard_arg(self, u: float) -> float:
        return 0.0


RegulatorKind = Union[
    ExpComplement,
    ArcsinTanh,
    ArctanScaled,
    RationalSaturating,
    TanhScaled,
    ExpOffset,
    LogisticReciprocal,
    InversePower,
    SigmoidRatio,
    UnboundedPower,
]

KINDS: dict[str, type] = {
    cls.name: cls
    for cls in (
        ExpComplement,
        ArcsinTanh,
        ArctanScaled,
        RationalSaturating,
        TanhScaled,
        ExpOffset,
        LogisticReciprocal,
        InversePower,
        SigmoidRatio,
        UnboundedPower,
    )
}


@dataclass(frozen=True)
class Regulator:
    """A regulator kind together with its exponent and derived metadata.

    ``direction``, ``lower``, ``upper`` and ``bounded`` are derived from the
    kind at construction; build instances through :meth:`create` or
    :func:`make_regulator` rather than the raw constructor.
    """

    kind: RegulatorKind
    p: float
    direction: Direction
    lower: float
    upper: float
    bounded: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and 0.0 < self.p < 1.0):
            raise ConstructionError(f"exponent p must lie in (0, 1), got {self.p!r}")

    @classmethod
    def create(cls, kind: RegulatorKind, p: float) -> "Regulator":
        lower, upper, direction, bounded = kind.bounds()
        return cls(kind=kind, p=p, direction=direction, lower=lower, upper=upper, bounded=bounded)

    # -- derived metadata ---------------------------------------------------

    @property
    def span(self) -> float:
        """Width of the travel interval; 1 by convention when unbounded."""
        return (self.upper - self.lower) if self.bounded else 1.0

    @property
    def terminal(self) -> float:
        """The value psi settles at as V -> 0."""
        return self.lower if self.direction is Direction.INCREASING else self.upper

    # -- pointwise evaluation -----------------------------------------------

    def _u(self, v: float) -> float:
        v = float(v)
        if not math.isfinite(v) or v < 0.0:
            raise DomainError(f"Lyapunov value must be finite and >= 0, got {v!r}")
        return v**self.p

    def eval(self, v: float) -> float:
        """psi evaluated at the Lyapunov value ``v``."""
        return float(self.kind.psi_u(self._u(v)))

    def grad_vp(self, v: float) -> float:
        """d psi / d(V**p) at ``v``; its sign matches the direction."""
        return float(self.kind.dpsi_du(self._u(v)))

    def grad2_vp(self, v: float) -> float:
        """Second u-derivative of psi at ``v``."""
        return float(self.kind.d2psi_du2(self._u(v)))

    def gain(self, v: float) -> float:
        """Reciprocal slope magnitude 1 / |d psi / d(V**p)| at ``v``.

        The magnitude convention keeps the gain positive for both
        monotonicity directions, so one controller expression serves
        increasing and decreasing regulators alike.
        """
        u = self._u(v)
        if self.kind.gain_guard_arg(u) > EXP_ARG_MAX:
            raise OverflowGuardError(
                f"gain of {self.kind.name} overflows at V**p = {u:.6g} (guard at {EXP_ARG_MAX:g})"
            )
        slope = float(self.kind.dpsi_du(u))
        if slope == 0.0 or not math.isfinite(slope):
            raise SingularGainError(f"regulator slope vanished at v = {v!r}")
        g = 1.0 / abs(slope)
        if not math.isfinite(g):
            raise OverflowGuardError(f"gain of {self.kind.name} is not representable at v = {v!r}")
        return g


def make_regulator(kind_name: str, p: float, **params: float) -> Regulator:
    """Build a regulator from its stable string name and shape parameters."""
    try:
        cls = KINDS[kind_name]
    except KeyError:
        known = ", ".join(sorted(KINDS))
        raise ConstructionError(f"unknown regulator kind {kind_name!r}; known kinds: {known}") from None
    try:
        kind = cls(**params)
    except TypeError as exc:
        raise ConstructionError(f"bad parameters for {kind_name!r}: {exc}") from None
    return Regulator.create(kind, p)
