"""Nonsingular predefined-time sliding surface and control law.

The surface is ``s = x2 + span * V1**q * Phi / (2 p1 t1)`` with
``V1 = x1**2 / 2`` and a shaping term ``Phi`` that switches branch at
``V1 = eta0``: outside, ``Phi = H1 x1 V1**(-p1-q)``; inside, the negative
power is replaced by the polynomial ``k1 V1 + k2 V1**2`` whose
coefficients are fixed by continuity at the switch.  ``H1`` is the
regulator's reciprocal-slope gain evaluated at ``V1``.

Everything the control law needs is evaluated through the composite
product ``W = V1**q * Phi`` and its x1-derivative, in simplified form:

    outer:  W = H1 x1 V1**(-p1)
    inner:  W = H1 x1 (k1 V1**(q+1) + k2 V1**(q+2))

The simplification is exact and keeps intermediates bounded where the
naive product ``V1**q * V1**(-p1-q)`` would overflow at large ``V1``.
The reaching term is likewise rewritten as
``sign(s) * 2**p1 * |s|**(1-2p1)``, which removes the removable
singularity of ``s * V2**(-p1)`` at ``s = 0`` (note ``1 - 2 p1 > 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConstructionError, GainInversionError, OverflowGuardError
from .plant import PlantModel
from .regulator import Regulator

__all__ = [
    "SurfaceParams",
    "SlidingDiagnostics",
    "continuity_constants",
    "phi",
    "phi_dot",
    "reaching_term",
    "surface",
    "control",
    "make_controller",
]

MIN_INPUT_GAIN = 1e-12


def continuity_constants(eta0: float, p1: float, q: float) -> tuple[float, float]:
    """Inner-branch coefficients that make the two Phi branches agree at eta0.

    k1 = 2 * eta0**(-1-p1-q) and k2 = -eta0**(-2-p1-q), so that
    k1*eta0 + k2*eta0**2 = eta0**(-p1-q).
    """
    if not (math.isfinite(eta0) and eta0 > 0.0):
        raise ConstructionError(f"eta0 must be finite and > 0, got {eta0!r}")
    try:
        k1 = 2.0 * eta0 ** (-1.0 - p1 - q)
        k2 = -(eta0 ** (-2.0 - p1 - q))
    except OverflowError:
        raise OverflowGuardError(
            f"continuity constants overflow at eta0 = {eta0!r} (p1={p1!r}, q={q!r})"
        ) from None
    if not (math.isfinite(k1) and math.isfinite(k2)):
        raise OverflowGuardError(f"continuity constants overflow at eta0 = {eta0!r} (p1={p1!r}, q={q!r})")
    return k1, k2


@dataclass(frozen=True)
class SurfaceParams:
    """Sliding-surface and reaching-law constants.

    ``t1`` budgets the sliding phase and ``t2`` the reaching phase;
    ``kappa`` is the robust switching gain and must dominate the plant
    disturbance bound.  ``sign_epsilon > 0`` replaces the sign function
    with the boundary layer ``s / (|s| + sign_epsilon)``.
    """

    p1: float
    q: float = 2.0
    eta0: float = 1e-4
    t1: float = 0.5
    t2: float = 0.5
    kappa: float = 0.1
    sign_epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p1) and 0.0 < self.p1 < 0.5):
            raise ConstructionError(f"p1 must lie in (0, 1/2), got {self.p1!r}")
        if not (math.isfinite(self.q) and self.q > 1.0):
            raise ConstructionError(f"q must be > 1, got {self.q!r}")
        if not (math.isfinite(self.eta0) and self.eta0 > 0.0):
            raise ConstructionError(f"eta0 must be > 0, got {self.eta0!r}")
        for name in ("t1", "t2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ConstructionError(f"{name} must be > 0, got {value!r}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ConstructionError(f"kappa must be >= 0, got {self.kappa!r}")
        if not (math.isfinite(self.sign_epsilon) and self.sign_epsilon >= 0.0):
            raise ConstructionError(f"sign_epsilon must be >= 0, got {self.sign_epsilon!r}")
        # fail fast if the branch-switch threshold is unrepresentable
        continuity_constants(self.eta0, self.p1, self.q)

    @property
    def k1(self) -> float:
        return continuity_constants(self.eta0, self.p1, self.q)[0]

    @property
    def k2(self) -> float:
        return continuity_constants(self.eta0, self.p1, self.q)[1]


@dataclass(frozen=True)
class SlidingDiagnostics:
    s: float
    phi: float
    v1: float
    v2: float
    h1: float
    hs: float
    branch: str


def _check_p_match(params: SurfaceParams, reg: Regulator, role: str) -> None:
    if reg.p != params.p1:
        raise ConstructionError(
            f"{role} regulator exponent p = {reg.p!r} must equal surface p1 = {params.p1!r}"
        )


def _gain_and_slope_ratio(reg: Regulator, u):
    """H = 1/|psi'| and ratio = direction * psi'' / psi'^2, both at u."""
    slope = reg.kind.dpsi_du(u)
    h = 1.0 / np.abs(slope)
    ratio = reg.direction.sign * reg.kind.d2psi_du2(u) / (slope * slope)
    return h, ratio


def phi(params: SurfaceParams, reg: Regulator, x1: float) -> float:
    """Surface shaping term at ``x1``; continuous across the branch switch."""
    _check_p_match(params, reg, "surface")
    x1 = float(x1)
    if not math.isfinite(x1):
        raise ConstructionError(f"x1 must be finite, got {x1!r}")
    v1 = 0.5 * x1 * x1
    h1 = reg.gain(v1)
    try:
        if v1 >= params.eta0:
            value = h1 * x1 * v1 ** (-params.p1 - params.q)
        else:
            k1, k2 = continuity_constants(params.eta0, params.p1, params.q)
            value = h1 * x1 * (k1 * v1 + k2 * v1 * v1)
    except OverflowError:
        raise OverflowGuardError(f"surface shaping term overflowed at x1 = {x1!r}") from None
    if not math.isfinite(value):
        raise OverflowGuardError(f"surface shaping term overflowed at x1 = {x1!r}")
    return float(value)


def phi_dot(params: SurfaceParams, reg: Regulator, x1: float, x2: float) -> float:
    """Time derivative of the shaping term along the flow, d(Phi)/dx1 * x2.

    The gain derivative enters through
    ratio = direction * psi'' / psi'^2 (= -dH/du for either direction),
    grouped with the V1 powers so every factor stays finite down to x1 = 0.
    """
    _check_p_match(params, reg, "surface")
    x1 = float(x1)
    x2 = float(x2)
    v1 = 0.5 * x1 * x1
    p1, q = params.p1, params.q
    u1 = v1**p1
    h1, ratio = _gain_and_slope_ratio(reg, u1)
    try:
        if v1 >= params.eta0:
            dphi_dx1 = -2.0 * p1 * ratio * v1**(-q) + (1.0 - 2.0 * p1 - 2.0 * q) * h1 * v1 ** (-p1 - q)
        else:
            k1, k2 = continuity_constants(params.eta0, p1, q)
            poly = k1 * v1 + k2 * v1 * v1
            dphi_dx1 = -2.0 * p1 * ratio * u1 * poly + h1 * (3.0 * k1 * v1 + 5.0 * k2 * v1 * v1)
        value = float(dphi_dx1 * x2)
    except OverflowError:
        raise OverflowGuardError(f"shaping-term derivative overflowed at x1 = {x1!r}") from None
    if not math.isfinite(value):
        raise OverflowGuardError(f"shaping-term derivative overflowed at x1 = {x1!r}")
    return value


def reaching_term(params: SurfaceParams, reg_reach: Regulator, s: float) -> float:
    """Reaching feedback span * Hs * s * V2**(-p1) / (2 t2 p1), nonsingular form.

    Evaluated as span * Hs * sign(s) * 2**p1 * |s|**(1-2p1) / (2 t2 p1);
    zero at s = 0 by the limit (1 - 2 p1 > 0).
    """
    _check_p_match(params, reg_reach, "reaching")
    s = float(s)
    if s == 0.0:
        return 0.0
    v2 = 0.5 * s * s
    hs = reg_reach.gain(v2)
    coef = reg_reach.span * 2.0**params.p1 / (2.0 * params.t2 * params.p1)
    return coef * hs * math.copysign(abs(s) ** (1.0 - 2.0 * params.p1), s)


def surface(params: SurfaceParams, reg: Regulator, x) -> SlidingDiagnostics:
    """Surface value and diagnostics at a state.

    The reaching gain ``hs`` is evaluated with the same regulator; the
    control law may use a distinct one.
    """
    _check_p_match(params, reg, "surface")
    x1, x2 = (float(x[0]), float(x[1])) if not hasattr(x, "x1") else (float(x.x1), float(x.x2))
    v1 = 0.5 * x1 * x1
    p1, q = params.p1, params.q
    h1 = reg.gain(v1)
    try:
        if v1 >= params.eta0:
            w = h1 * x1 * v1 ** (-p1)
            branch = "outer"
        else:
            k1, k2 = continuity_constants(params.eta0, p1, q)
            w = h1 * x1 * (k1 * v1 ** (q + 1.0) + k2 * v1 ** (q + 2.0))
            branch = "inner"
        s = x2 + reg.span * w / (2.0 * p1 * params.t1)
    except OverflowError:
        raise OverflowGuardError(f"surface value overflowed at x = ({x1!r}, {x2!r})") from None
    if not math.isfinite(s):
        raise OverflowGuardError(f"surface value overflowed at x = ({x1!r}, {x2!r})")
    v2 = 0.5 * s * s
    return SlidingDiagnostics(
        s=float(s),
        phi=phi(params, reg, x1),
        v1=v1,
        v2=v2,
        h1=h1,
        hs=reg.gain(v2),
        branch=branch,
    )


def make_controller(
    plant: PlantModel,
    params: SurfaceParams,
    reg_slide: Regulator,
    reg_reach: Regulator,
) -> Callable:
    """Compile the control law into an array-capable evaluator.

    Returns ``ctrl(t, x1, x2) -> (u, s, v1, v2, f, g)`` operating
    elementwise on scalars or same-shape arrays.  All state-independent
    coefficients are folded in up front; the integrator calls this at
    every stage.  Non-finite states propagate as NaN rather than raising,
    so batch integration can record per-scenario terminations.
    """
    _check_p_match(params, reg_slide, "surface")
    _check_p_match(params, reg_reach, "reaching")

    p1, q, eta0 = params.p1, params.q, params.eta0
    k1, k2 = continuity_constants(eta0, p1, q)
    c_s = reg_slide.span / (2.0 * p1 * params.t1)
    c_r = reg_reach.span * 2.0**p1 / (2.0 * params.t2 * p1)
    pw = 1.0 - 2.0 * p1
    kappa = params.kappa
    eps = params.sign_epsilon

    slide_dpsi = reg_slide.kind.dpsi_du
    slide_d2psi = reg_slide.kind.d2psi_du2
    slide_sign = reg_slide.direction.sign
    reach_dpsi = reg_reach.kind.dpsi_du
    drift = plant.drift
    input_gain = plant.input_gain
    disturbance = plant.disturbance

    qp3 = 2.0 * q + 3.0
    qp5 = 2.0 * q + 5.0

    def ctrl(t, x1, x2):
        v1 = 0.5 * x1 * x1
        outer = v1 >= eta0
        u1 = v1**p1
        slope = slide_dpsi(u1)
        h1 = 1.0 / np.abs(slope)
        ratio = slide_sign * slide_d2psi(u1) / (slope * slope)

        v1_outer = np.where(outer, v1, eta0)
        v1_inner = np.where(outer, 0.0, v1)
        neg_p = v1_outer ** (-p1)
        w_outer = h1 * x1 * neg_p
        dw_outer = -2.0 * p1 * ratio + (1.0 - 2.0 * p1) * h1 * neg_p

        vq1 = v1_inner ** (q + 1.0)
        vq2 = vq1 * v1_inner
        w_inner = h1 * x1 * (k1 * vq1 + k2 * vq2)
        dw_inner = -2.0 * p1 * ratio * u1 * (k1 * vq1 + k2 * vq2) + h1 * (k1 * qp3 * vq1 + k2 * qp5 * vq2)

        w = np.where(outer, w_outer, w_inner)
        dw = np.where(outer, dw_outer, dw_inner)

        s = x2 + c_s * w
        v2 = 0.5 * s * s
        hs = 1.0 / np.abs(reach_dpsi(v2**p1))
        reach = c_r * hs * np.sign(s) * np.abs(s) ** pw
        if eps > 0.0:
            sgn = s / (np.abs(s) + eps)
        else:
            sgn = np.sign(s)

        f = drift(x1, x2)
        g = input_gain(x1, x2)
        u = (-c_s * dw * x2 - reach - kappa * sgn - f) / g
        return u, s, v1, v2, f, g

    return ctrl


def control(
    params: SurfaceParams,
    reg_slide: Regulator,
    reg_reach: Regulator,
    plant: PlantModel,
    t: float,
    x,
) -> tuple[float, SlidingDiagnostics]:
    """Control input and sliding diagnostics at one state."""
    x1, x2 = (float(x[0]), float(x[1])) if not hasattr(x, "x1") else (float(x.x1), float(x.x2))
    g = float(plant.input_gain(x1, x2))
    if abs(g) < MIN_INPUT_GAIN:
        raise GainInversionError(f"input gain {g!r} at x = ({x1!r}, {x2!r}) is too small to invert")
    ctrl = make_controller(plant, params, reg_slide, reg_reach)
    with np.errstate(all="ignore"):
        u, s, v1, v2, _, _ = ctrl(t, np.float64(x1), np.float64(x2))
    u = float(u)
    if not math.isfinite(u):
        raise OverflowGuardError(f"control overflowed at t = {t!r}, x = ({x1!r}, {x2!r})")
    v1 = float(v1)
    v2 = float(v2)
    diag = SlidingDiagnostics(
        s=float(s),
        phi=phi(params, reg_slide, x1),
        v1=v1,
        v2=v2,
        h1=reg_slide.gain(v1),
        hs=reg_reach.gain(v2),
        branch="outer" if v1 >= params.eta0 else "inner",
    )
    return u, diag
