"""Deterministic fixed-step integration and settling-time measurement.

The closed loop is integrated with the classic fourth-order scheme at a
fixed step; the control is recomputed at every stage evaluation.  The
discontinuous switching term rules out adaptive error control, and the
small fixed step bounds the chattering amplitude to the order of the
step.  Scenarios are advanced in lockstep as numpy arrays: every
operation is elementwise per scenario, so a lane's trajectory does not
depend on which other lanes share the batch, and campaigns are
bit-reproducible regardless of how scenarios are grouped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConstructionError, DomainError, StepSizeError
from .plant import PlantModel
from .regulator import Regulator
from .smc import SurfaceParams, make_controller

__all__ = [
    "SimConfig",
    "Trajectory",
    "BatchResult",
    "integrate_batch",
    "integrate_closed_loop",
    "settling_time",
    "MotivatingTrajectory",
    "integrate_motivating",
    "motivating_exact_time",
]

TRAJECTORY_COLUMNS = ("t", "x1", "x2", "s", "u", "v1", "v2")


@dataclass(frozen=True)
class SimConfig:
    """Integration grid and settling thresholds.

    ``settle_threshold_x1`` defaults (when None) to sqrt(2 * eta0) of the
    surface in use, the radius of the terminal region.  Recording is
    downsampled by ``record_stride`` integration steps.
    """

    dt: float = 1e-5
    horizon: float = 1.5
    settle_threshold_x1: Optional[float] = None
    settle_threshold_s: float = 1e-3
    record_stride: int = 100

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConstructionError(f"dt must be > 0, got {self.dt!r}")
        if not (math.isfinite(self.horizon) and self.horizon >= self.dt):
            raise ConstructionError(f"horizon must be >= dt, got {self.horizon!r}")
        if int(self.record_stride) < 1:
            raise ConstructionError(f"record_stride must be >= 1, got {self.record_stride!r}")
        if self.settle_threshold_x1 is not None and not self.settle_threshold_x1 > 0.0:
            raise ConstructionError("settle_threshold_x1 must be > 0 when given")
        if not self.settle_threshold_s > 0.0:
            raise ConstructionError("settle_threshold_s must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class Trajectory:
    """Uniformly sampled closed-loop record.

    ``dt`` is the recording interval (integration step times stride).
    Early termination truncates the rows at the last finite sample and
    records the reason.
    """

    dt: float
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    s: np.ndarray
    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    terminated_early: bool = False
    termination_reason: Optional[str] = None

    def __len__(self) -> int:
        return int(self.t.size)

    def to_csv(self, path) -> None:
        """Write rows as CSV with 17-significant-digit round-trip floats."""
        columns = [getattr(self, name) for name in TRAJECTORY_COLUMNS]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
            for row in zip(*columns):
                fh.write(",".join(f"{value:.17g}" for value in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        cols = {name: np.asarray(data[name], dtype=float) for name in TRAJECTORY_COLUMNS}
        t = cols["t"]
        dt = float(t[1] - t[0]) if t.size > 1 else 0.0
        return cls(dt=dt, **cols)


@dataclass
class BatchResult:
    """Lockstep integration record for a batch of scenarios.

    Row arrays are shaped (n_scenarios, n_records).  ``death_step`` is -1
    for scenarios that stayed finite, else the integration step at which
    the state first went non-finite.
    """

    dt_record: float
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    s: np.ndarray
    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    death_step: np.ndarray
    dt_step: float

    @property
    def n_scenarios(self) -> int:
        return int(self.x1.shape[0])

    def termination_reason(self, i: int) -> Optional[str]:
        step = int(self.death_step[i])
        if step < 0:
            return None
        return f"non-finite state at t = {step * self.dt_step:.6g} s"

    def scenario(self, i: int) -> Trajectory:
        """Extract one scenario as a Trajectory, truncated at the first non-finite row."""
        rows = {name: np.array(getattr(self, name)[i]) for name in TRAJECTORY_COLUMNS if name != "t"}
        finite = np.ones(self.t.size, dtype=bool)
        for values in rows.values():
            finite &= np.isfinite(values)
        keep = int(np.argmax(~finite)) if not finite.all() else self.t.size
        reason = self.termination_reason(i)
        return Trajectory(
            dt=self.dt_record,
            t=self.t[:keep].copy(),
            terminated_early=reason is not None,
            termination_reason=reason,
            **{name: values[:keep] for name, values in rows.items()},
        )


def integrate_batch(
    plant: PlantModel,
    params: SurfaceParams,
    reg_slide: Regulator,
    reg_reach: Regulator,
    x0: np.ndarray,
    cfg: SimConfig,
) -> BatchResult:
    """Integrate every start state in lockstep and record at the stride.

    ``x0`` is shaped (n, 2).  A scenario whose state goes non-finite is
    left to propagate NaN for the rest of the horizon and its first bad
    step is recorded; the batch itself never aborts.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 2 or x0.shape[1] != 2:
        raise DomainError(f"x0 must be shaped (n, 2), got {x0.shape}")
    n = x0.shape[0]
    dt = cfg.dt
    stride = int(cfg.record_stride)
    n_steps = cfg.n_steps

    record_steps = list(range(0, n_steps, stride))
    if record_steps[-1] != n_steps:
        record_steps.append(n_steps)
    n_rec = len(record_steps)
    rec_at = {step: k for k, step in enumerate(record_steps)}

    t_rec = np.array([step * dt for step in record_steps])
    out = {name: np.empty((n, n_rec)) for name in TRAJECTORY_COLUMNS if name != "t"}

    ctrl = make_controller(plant, params, reg_slide, reg_reach)
    disturbance = plant.disturbance

    x1 = x0[:, 0].copy()
    x2 = x0[:, 1].copy()
    death_step = np.full(n, -1, dtype=np.int64)
    half = 0.5 * dt
    sixth = dt / 6.0

    def record(k: int, u, s, v1, v2) -> None:
        out["x1"][:, k] = x1
        out["x2"][:, k] = x2
        out["s"][:, k] = s
        out["u"][:, k] = u
        out["v1"][:, k] = v1
        out["v2"][:, k] = v2

    with np.errstate(all="ignore"):
        for i in range(n_steps):
            t = i * dt
            u1, s1, v1a, v2a, f1, g1 = ctrl(t, x1, x2)
            k = rec_at.get(i)
            if k is not None:
                record(k, u1, s1, v1a, v2a)

            d1x1 = x2
            d1x2 = f1 + g1 * u1 + disturbance(t)

            a1 = x1 + half * d1x1
            a2 = x2 + half * d1x2
            u2, _, _, _, f2, g2 = ctrl(t + half, a1, a2)
            d2x1 = a2
            d2x2 = f2 + g2 * u2 + disturbance(t + half)

            b1 = x1 + half * d2x1
            b2 = x2 + half * d2x2
            u3, _, _, _, f3, g3 = ctrl(t + half, b1, b2)
            d3x1 = b2
            d3x2 = f3 + g3 * u3 + disturbance(t + half)

            c1 = x1 + dt * d3x1
            c2 = x2 + dt * d3x2
            u4, _, _, _, f4, g4 = ctrl(t + dt, c1, c2)
            d4x1 = c2
            d4x2 = f4 + g4 * u4 + disturbance(t + dt)

            x1 = x1 + sixth * (d1x1 + 2.0 * d2x1 + 2.0 * d3x1 + d4x1)
            x2 = x2 + sixth * (d1x2 + 2.0 * d2x2 + 2.0 * d3x2 + d4x2)

            ok = np.isfinite(x1) & np.isfinite(x2)
            if not ok.all():
                newly = (death_step < 0) & ~ok
                death_step[newly] = i

        u_end, s_end, v1_end, v2_end, _, _ = ctrl(n_steps * dt, x1, x2)
        record(n_rec - 1, u_end, s_end, v1_end, v2_end)

    return BatchResult(
        dt_record=dt * stride,
        t=t_rec,
        death_step=death_step,
        dt_step=dt,
        **out,
    )


def integrate_closed_loop(
    plant: PlantModel,
    params: SurfaceParams,
    reg_slide: Regulator,
    reg_reach: Regulator,
    x0,
    cfg: SimConfig,
) -> Trajectory:
    """Integrate a single start state; see :func:`integrate_batch`."""
    x1, x2 = (float(x0[0]), float(x0[1])) if not hasattr(x0, "x1") else (float(x0.x1), float(x0.x2))
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise DomainError(f"initial state must be finite, got ({x1!r}, {x2!r})")
    batch = integrate_batch(plant, params, reg_slide, reg_reach, np.array([[x1, x2]]), cfg)
    return batch.scenario(0)


def _settle_scan(t: np.ndarray, series: np.ndarray, threshold: float) -> Optional[float]:
    """Earliest sample time after which |series| stays within threshold.

    Non-finite samples count as exceedances, so a truncated or diverging
    record never reports as settled.
    """
    inside = np.abs(series) <= threshold
    if inside.all():
        return float(t[0])
    last_out = int(series.size - 1 - np.argmax(inside[::-1] == False))  # noqa: E712
    if last_out == series.size - 1:
        return None
    return float(t[last_out + 1])


def settling_time(traj: Trajectory, threshold: float, signal: str = "x1") -> Optional[float]:
    """Enter-and-stay settling time of |signal| against the threshold.

    Returns None when the signal still exceeds the threshold at the end of
    the record.  First crossings that are later undone (chattering) do not
    count.
    """
    if len(traj) == 0:
        raise DomainError("settling time of an empty trajectory")
    if signal not in ("x1", "s"):
        raise DomainError(f"signal must be 'x1' or 's', got {signal!r}")
    if not threshold > 0.0:
        raise DomainError(f"threshold must be > 0, got {threshold!r}")
    return _settle_scan(traj.t, getattr(traj, signal), threshold)


@dataclass
class MotivatingTrajectory:
    """Scalar record (t, x, v) of the motivating first-order system."""

    dt: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray


def integrate_motivating(
    p: float,
    tc: float,
    x0: float,
    eps_v: float,
    dt: float = 1e-5,
) -> tuple[MotivatingTrajectory, float]:
    """Integrate dx/dt = -exp(V**p) * V**(-p) * x / (2 p tc) down to V <= eps_v.

    V = x**2 / 2.  The right side stiffens as V shrinks, so integration
    stops at the ``eps_v`` threshold; the returned hit time is the first
    sample at or below it.  A coarse step shows up as V increasing between
    samples, which is impossible for the exact flow and raises a
    step-size error, as does failing to reach the threshold well past the
    time constant.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if not tc > 0.0:
        raise DomainError(f"tc must be > 0, got {tc!r}")
    if not eps_v > 0.0:
        raise DomainError(f"eps_v must be > 0, got {eps_v!r}")
    if x0 == 0.0 or not math.isfinite(x0):
        raise DomainError(f"x0 must be finite and nonzero, got {x0!r}")

    coef = 1.0 / (2.0 * p * tc)

    def rhs(x: float) -> float:
        v = 0.5 * x * x
        return -coef * math.exp(v**p) * v ** (-p) * x

    ts = [0.0]
    xs = [float(x0)]
    vs = [0.5 * x0 * x0]
    if vs[0] <= eps_v:
        return MotivatingTrajectory(dt=dt, t=np.array(ts), x=np.array(xs), v=np.array(vs)), 0.0

    max_steps = int(math.ceil(1.5 * tc / dt)) + 1
    x = float(x0)
    v_prev = vs[0]
    hit: Optional[float] = None
    for i in range(1, max_steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * dt * k1)
        k3 = rhs(x + 0.5 * dt * k2)
        k4 = rhs(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = i * dt
        v = 0.5 * x * x
        ts.append(t)
        xs.append(x)
        vs.append(v)
        if not math.isfinite(v) or v > v_prev:
            raise StepSizeError(
                f"step dt = {dt!r} too coarse: V rose from {v_prev!r} to {v!r} at t = {t!r}"
            )
        v_prev = v
        if v <= eps_v:
            hit = t
            break
    if hit is None:
        raise StepSizeError(f"threshold {eps_v!r} not reached within 1.5 * tc; step dt = {dt!r} too coarse")

    traj = MotivatingTrajectory(dt=dt, t=np.array(ts), x=np.array(xs), v=np.array(vs))
    return traj, hit


def motivating_exact_time(v0: float, eps_v: float, p: float, tc: float) -> float:
    """Exact traversal time tc * (exp(-eps_v**p) - exp(-v0**p)).

    Along the motivating flow the bounded increasing map 2 - exp(-V**p)
    loses value at the constant rate 1/tc, so the time from V = v0 down to
    V = eps_v is the travel between the two mapped values times tc.
    """
    if not eps_v >= 0.0:
        raise DomainError(f"eps_v must be >= 0, got {eps_v!r}")
    if not v0 >= eps_v:
        raise DomainError(f"v0 must be >= eps_v, got v0 = {v0!r}, eps_v = {eps_v!r}")
    if not (0.0 < p < 1.0) or not tc > 0.0:
        raise DomainError(f"need 0 < p < 1 and tc > 0, got p = {p!r}, tc = {tc!r}")
    return tc * (math.exp(-(eps_v**p)) - math.exp(-(v0**p)))
