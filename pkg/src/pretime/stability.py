"""Convergence-case classification, decay requirements, and settling bounds.

Given a regulator, this module decides which convergence regime it
certifies (predefined-time with a fixed constant, or finite-time with a
state-dependent budget), verifies the interval/monotonicity conditions
numerically on sample grids, computes the required Lyapunov decay rate,
and evaluates the closed-form settling-time bound.  Trajectories can be
audited a posteriori: the recorded Lyapunov series is differentiated by
central differences and compared against the required decay at every
sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, TooFewSamplesError
from .regulator import Direction, Regulator

__all__ = [
    "ConvergenceCase",
    "ConditionSample",
    "ConditionReport",
    "BoundReport",
    "Violation",
    "classify",
    "check_conditions",
    "required_decay",
    "settling_bound",
    "verify_trajectory",
]

# Slack floor that absorbs discretization noise near switching surfaces.
ABS_SLACK_FLOOR = 1e-6
REL_SLACK = 1e-3


class ConvergenceCase(enum.Enum):
    PREDEFINED_INCREASING = "predefined_increasing"
    PREDEFINED_DECREASING = "predefined_decreasing"
    FINITE_INCREASING = "finite_increasing"
    FINITE_DECREASING = "finite_decreasing"

    @property
    def predefined(self) -> bool:
        return self in (ConvergenceCase.PREDEFINED_INCREASING, ConvergenceCase.PREDEFINED_DECREASING)


def classify(reg: Regulator) -> ConvergenceCase:
    """Map (direction, boundedness) to the convergence case it certifies."""
    if reg.direction is Direction.INCREASING:
        return ConvergenceCase.PREDEFINED_INCREASING if reg.bounded else ConvergenceCase.FINITE_INCREASING
    return ConvergenceCase.PREDEFINED_DECREASING if reg.bounded else ConvergenceCase.FINITE_DECREASING


@dataclass(frozen=True)
class ConditionSample:
    v: float
    psi: float
    grad: float

    def to_dict(self) -> dict:
        return {"v": self.v, "psi": self.psi, "grad": self.grad}


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of sampling the interval and slope-sign conditions."""

    case: ConvergenceCase
    cond_i_ok: bool
    cond_ii_ok: bool
    samples: list[ConditionSample]
    worst_violation: float

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "cond_i_ok": self.cond_i_ok,
            "cond_ii_ok": self.cond_ii_ok,
            "worst_violation": self.worst_violation,
            "samples": [s.to_dict() for s in self.samples],
        }


def check_conditions(reg: Regulator, v_grid: Sequence[float], atol: float = 1e-12) -> ConditionReport:
    """Sample interval membership and slope sign over ``v_grid``.

    Both conditions are checked at every grid point, and psi(0) is checked
    against the declared terminal value.  ``worst_violation`` is the
    largest signed excess over all checks; it is <= 0 exactly when both
    conditions hold on the grid.
    """
    grid = [float(v) for v in v_grid]
    if not grid:
        raise DomainError("condition check requires a non-empty grid")
    for v in grid:
        if not math.isfinite(v) or v <= 0.0:
            raise DomainError(f"grid values must be finite and > 0, got {v!r}")

    sign = reg.direction.sign
    samples: list[ConditionSample] = []
    viol_i: list[float] = []
    viol_ii: list[float] = []
    for v in grid:
        psi = reg.eval(v)
        grad = reg.grad_vp(v)
        samples.append(ConditionSample(v=v, psi=psi, grad=grad))
        viol_i.append(max(reg.lower - psi, psi - reg.upper))
        viol_ii.append(-sign * grad)

    # declared terminal value must match the closed form at V = 0
    viol_i.append(abs(reg.eval(0.0) - reg.terminal) - atol)

    worst_i = max(viol_i)
    worst_ii = max(viol_ii)
    return ConditionReport(
        case=classify(reg),
        cond_i_ok=worst_i <= 0.0,
        cond_ii_ok=worst_ii <= 0.0,
        samples=samples,
        worst_violation=max(worst_i, worst_ii),
    )


def required_decay(reg: Regulator, v: float, tc: float) -> float:
    """Right-hand side of the decay condition at Lyapunov value ``v``.

    Returns ``-span * gain(v) * v**(1-p) / (p * tc)`` where ``span`` is the
    travel width for bounded regulators and 1 otherwise.  Always strictly
    negative for ``v > 0``.
    """
    v = float(v)
    if not math.isfinite(v) or v <= 0.0:
        raise DomainError(f"required decay is defined for v > 0, got {v!r}")
    if not (math.isfinite(tc) and tc > 0.0):
        raise DomainError(f"time constant must be > 0, got {tc!r}")
    return -reg.span * reg.gain(v) * v ** (1.0 - reg.p) / (reg.p * tc)


def _required_decay_array(reg: Regulator, v: np.ndarray, tc: float) -> np.ndarray:
    """Vector form of :func:`required_decay` without the scalar guards."""
    u = v**reg.p
    gain = 1.0 / np.abs(reg.kind.dpsi_du(u))
    return -reg.span * gain * v ** (1.0 - reg.p) / (reg.p * tc)


@dataclass(frozen=True)
class BoundReport:
    """Settling-time bound for a start value, with the psi travel data."""

    case: ConvergenceCase
    psi0: float
    psiT: float
    tc: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "psi0": self.psi0,
            "psiT": self.psiT,
            "tc": self.tc,
            "bound": self.bound,
        }


def settling_bound(reg: Regulator, v0: float, tc: float) -> BoundReport:
    """Closed-form convergence-time bound from the initial Lyapunov value.

    Predefined cases scale the psi travel by ``tc / span`` (hence the bound
    is strictly below ``tc``); finite-time cases scale the travel by ``tc``
    alone.
    """
    v0 = float(v0)
    if not math.isfinite(v0) or v0 < 0.0:
        raise DomainError(f"initial Lyapunov value must be finite and >= 0, got {v0!r}")
    if not (math.isfinite(tc) and tc > 0.0):
        raise DomainError(f"time constant must be > 0, got {tc!r}")
    case = classify(reg)
    psi0 = reg.eval(v0)
    psi_t = reg.terminal
    travel = abs(psi0 - psi_t)
    if case.predefined:
        # the exact travel/span ratio is < 1; min() strips the one-ulp
        # excess that appears once psi saturates to its far limit
        bound = min(travel * tc / reg.span, tc)
    else:
        bound = travel * tc
    return BoundReport(case=case, psi0=psi0, psiT=psi_t, tc=tc, bound=bound)


@dataclass(frozen=True)
class Violation:
    """One sample where the measured Lyapunov rate exceeded the requirement."""

    index: int
    t: float
    v: float
    dvdt: float
    required: float
    excess: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "t": self.t,
            "v": self.v,
            "dvdt": self.dvdt,
            "required": self.required,
            "excess": self.excess,
        }


def verify_trajectory(
    traj,
    reg: Regulator,
    tc: float,
    which_v: str = "s",
    slack: Optional[float] = None,
    signal_floor: float = 0.0,
    branch_v1: Optional[float] = None,
) -> list[Violation]:
    """Audit the decay condition along a uniformly sampled trajectory.

    ``which_v`` selects the Lyapunov value: ``"x1"`` uses V = x1**2 / 2,
    ``"s"`` uses V = s**2 / 2.  dV/dt is estimated by central differences
    on the recorded grid and compared against :func:`required_decay` plus
    a slack.  When ``slack`` is None it defaults per sample to
    ``max(1e-3 * |required|, 1e-6)``.  Samples with V = 0 or with the
    selected signal at or below ``signal_floor`` in magnitude are skipped
    (the condition only constrains motion away from the origin).

    ``branch_v1``, when given, excludes samples whose difference stencil
    straddles the sliding surface's branch switch (recorded v1 crossing
    that threshold).  The surface derivative has a kink there; a
    fixed-step integrator crossing it without event localization incurs a
    one-step impulse in s that is an artifact of the step, not of the
    reaching law under audit.
    """
    if which_v == "x1":
        signal = np.asarray(traj.x1, dtype=float)
    elif which_v == "s":
        signal = np.asarray(traj.s, dtype=float)
    else:
        raise DomainError(f"which_v must be 'x1' or 's', got {which_v!r}")
    if signal.size < 3:
        raise TooFewSamplesError("trajectory verification needs at least 3 samples")

    dt = float(traj.dt)
    t = np.asarray(traj.t, dtype=float)
    v = 0.5 * signal**2
    dvdt = (v[2:] - v[:-2]) / (2.0 * dt)
    v_mid = v[1:-1]
    sig_mid = np.abs(signal[1:-1])

    active = (v_mid > 0.0) & (sig_mid > signal_floor)
    active &= np.isfinite(v_mid) & np.isfinite(dvdt)
    if branch_v1 is not None:
        v1 = 0.5 * np.asarray(traj.x1, dtype=float) ** 2
        stencil_lo = np.minimum(np.minimum(v1[:-2], v1[1:-1]), v1[2:])
        stencil_hi = np.maximum(np.maximum(v1[:-2], v1[1:-1]), v1[2:])
        active &= ~((stencil_lo < branch_v1) & (stencil_hi >= branch_v1))
    if not active.any():
        return []

    required = np.full_like(v_mid, np.nan)
    required[active] = _required_decay_array(reg, v_mid[active], tc)
    if slack is None:
        allowed_slack = np.maximum(REL_SLACK * np.abs(required), ABS_SLACK_FLOOR)
    else:
        allowed_slack = np.full_like(v_mid, float(slack))

    excess = dvdt - (required + allowed_slack)
    bad = active & (excess > 0.0)
    violations = []
    for j in np.flatnonzero(bad):
        i = int(j) + 1
        violations.append(
            Violation(
                index=i,
                t=float(t[i]),
                v=float(v_mid[j]),
                dvdt=float(dvdt[j]),
                required=float(required[j]),
                excess=float(excess[j]),
            )
        )
    return violations
