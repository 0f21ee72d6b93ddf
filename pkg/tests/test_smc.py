import dataclasses
import math

import numpy as np
import pytest

from pretime import (
    SurfaceParams,
    benchmark_plant,
    continuity_constants,
    control,
    make_regulator,
    phi,
    phi_dot,
    reaching_term,
    required_decay,
    surface,
)
from pretime.errors import ConstructionError, GainInversionError, OverflowGuardError
from pretime.smc import make_controller

from conftest import KIND_EXAMPLES


def _params(p1=0.25, q=2.0, eta0=1.0, t1=0.5, t2=0.5, kappa=0.1):
    return SurfaceParams(p1=p1, q=q, eta0=eta0, t1=t1, t2=t2, kappa=kappa)


class TestContinuityConstants:
    def test_unit_threshold(self):
        assert continuity_constants(1.0, 0.05, 2.0) == (2.0, -1.0)

    def test_quarter_threshold_exact_powers(self):
        k1, k2 = continuity_constants(0.25, 0.5, 2.0)
        assert (k1, k2) == (256.0, -512.0)
        # branch agreement: k1*eta + k2*eta^2 == eta^(-p1-q)
        assert k1 * 0.25 + k2 * 0.0625 == 0.25 ** (-2.5)

    @pytest.mark.parametrize("eta0,p1,q", [(1e-4, 0.051, 2.0), (0.37, 0.49, 3.3), (5.0, 0.01, 1.5)])
    def test_branch_agreement(self, eta0, p1, q):
        k1, k2 = continuity_constants(eta0, p1, q)
        lhs = k1 * eta0 + k2 * eta0 * eta0
        rhs = eta0 ** (-p1 - q)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError):
            continuity_constants(1e-80, 0.49, 3.0)

    def test_rejects_nonpositive_eta0(self):
        with pytest.raises(ConstructionError):
            continuity_constants(0.0, 0.1, 2.0)


class TestSurfaceParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"p1": 0.5},
            {"p1": 0.0},
            {"p1": 0.1, "q": 1.0},
            {"p1": 0.1, "eta0": 0.0},
            {"p1": 0.1, "t1": 0.0},
            {"p1": 0.1, "t2": -1.0},
            {"p1": 0.1, "kappa": -0.1},
            {"p1": 0.1, "sign_epsilon": -1e-3},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConstructionError):
            SurfaceParams(**kwargs)

    def test_constants_are_derived(self):
        sp = SurfaceParams(p1=0.051, q=2.0, eta0=1e-4)
        k1, k2 = continuity_constants(1e-4, 0.051, 2.0)
        assert (sp.k1, sp.k2) == (k1, k2)


class TestPhi:
    def test_zero_at_origin(self):
        reg = make_regulator("power", 0.25)
        assert phi(_params(), reg, 0.0) == 0.0

    def test_outer_branch_hand_value(self):
        reg = make_regulator("power", 0.25)
        assert phi(_params(), reg, 2.0) == pytest.approx(0.42044820762685725, rel=1e-14)

    def test_branch_agreement_at_threshold(self):
        reg = make_regulator("power", 0.25)
        sp = _params(eta0=1.0)
        # V1 = 1 at x1 = sqrt(2): both branches give H1 * sqrt(2)
        assert phi(sp, reg, math.sqrt(2.0)) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_continuity_for_all_kinds_and_random_draws(self, name, params, rng):
        # both branch formulas evaluated at V1 = eta0 must agree to 1e-12
        for _ in range(10):
            p1 = float(rng.uniform(0.01, 0.49))
            q = float(rng.uniform(1.1, 4.0))
            eta0 = float(10.0 ** rng.uniform(-5, 1))
            reg = make_regulator(name, p1, **params)
            k1, k2 = continuity_constants(eta0, p1, q)
            x1 = math.sqrt(2.0 * eta0)
            h1 = reg.gain(eta0)
            outer = h1 * x1 * eta0 ** (-p1 - q)
            inner = h1 * x1 * (k1 * eta0 + k2 * eta0 * eta0)
            assert abs(outer - inner) <= 1e-12 * max(abs(outer), abs(inner))

    def test_enforces_matching_exponent(self):
        reg = make_regulator("power", 0.3)
        with pytest.raises(ConstructionError):
            phi(_params(p1=0.25), reg, 1.0)


class TestPhiDot:
    def test_zero_at_x1_zero(self):
        reg = make_regulator("power", 0.25)
        assert phi_dot(_params(eta0=0.5), reg, 0.0, 3.7) == 0.0

    def test_zero_at_x2_zero(self):
        reg = make_regulator("power", 0.25)
        assert phi_dot(_params(eta0=0.5), reg, 1.3, 0.0) == 0.0

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    @pytest.mark.parametrize("x1", [0.05, 0.3, 1.0, 2.5, -1.7])
    def test_matches_finite_difference(self, name, params, x1):
        # rel < 1e-5 away from the branch boundary (V1 kink documented)
        sp = _params(p1=0.25, q=2.0, eta0=0.1)
        reg = make_regulator(name, 0.25, **params)
        v1 = 0.5 * x1 * x1
        if abs(v1 - sp.eta0) < 1e-3 * sp.eta0:
            pytest.skip("on the branch boundary")
        x2 = 1.3
        h = 1e-6 * max(1.0, abs(x1))
        fd = (phi(sp, reg, x1 + h) - phi(sp, reg, x1 - h)) / (2.0 * h) * x2
        exact = phi_dot(sp, reg, x1, x2)
        assert exact == pytest.approx(fd, rel=1e-5)


class TestReachingTerm:
    def test_zero_at_zero(self):
        reg = make_regulator("power", 0.25)
        assert reaching_term(_params(), reg, 0.0) == 0.0

    def test_tiny_s_stays_finite(self):
        # rewritten form sign(s) * 2^p1 * |s|^(1-2p1): no blow-up at 1e-300
        sp = SurfaceParams(p1=0.4, q=2.0, eta0=1.0, t2=0.5)
        reg = make_regulator("power", 0.4)
        value = reaching_term(sp, reg, 1e-300)
        assert math.isfinite(value)
        expected = 1.0 * 2.0**0.4 * (1e-300) ** 0.2 / (2.0 * 0.5 * 0.4)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_odd_in_s(self):
        sp = _params()
        reg = make_regulator("sigmoid_ratio", sp.p1, a=1.0, b=3.0, alpha=1.0)
        assert reaching_term(sp, reg, 0.7) == -reaching_term(sp, reg, -0.7)


class TestSurface:
    def test_zero_state(self):
        reg = make_regulator("power", 0.25)
        assert surface(_params(), reg, (0.0, 0.0)).s == 0.0

    def test_x2_passthrough_at_x1_zero(self):
        reg = make_regulator("power", 0.25)
        for c in (-3.0, 0.5, 11.0):
            assert surface(_params(), reg, (0.0, c)).s == c

    def test_outer_branch_hand_value(self):
        reg = make_regulator("power", 0.25)
        sp = _params(eta0=0.1, t1=0.5)
        diag = surface(sp, reg, (math.sqrt(2.0), 0.0))
        assert diag.s == pytest.approx(5.656854249492381, rel=1e-14)
        assert diag.branch == "outer"
        assert diag.v1 == pytest.approx(1.0, rel=1e-15)

    def test_diagnostics_invariants(self):
        sp = _params(eta0=2.0)
        reg = make_regulator("sigmoid_ratio", sp.p1, a=1.0, b=3.0, alpha=1.0)
        diag = surface(sp, reg, (1.2, -0.7))
        assert diag.v1 == 0.5 * 1.2**2
        assert diag.v2 == pytest.approx(0.5 * diag.s**2, rel=1e-15)
        assert diag.branch == "inner"
        assert diag.h1 > 0.0 and diag.hs > 0.0


class TestControl:
    def test_zero_at_origin(self):
        plant = benchmark_plant()
        sp = SurfaceParams(p1=0.051)
        reg = make_regulator("sigmoid_ratio", 0.051, a=1.0, b=3.0, alpha=1.0)
        u, diag = control(sp, reg, reg, plant, 0.0, (0.0, 0.0))
        assert u == 0.0
        assert diag.s == 0.0

    @pytest.mark.parametrize("reg_spec", [("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}), ("exp_offset", {"shift": 1.0, "alpha": 1.0}), ("power", {})])
    def test_one_step_closed_loop_cancellation(self, reg_spec, rng):
        # with w = 0, substituting u back into the dynamics must leave
        # s-dot = -reaching - kappa*sgn(s) exactly (algebraic cancellation)
        name, params = reg_spec
        plant = dataclasses.replace(benchmark_plant(), disturbance=_no_disturbance)
        sp = SurfaceParams(p1=0.12, q=2.0, eta0=1e-2, t1=0.5, t2=0.5, kappa=0.1)
        reg = make_regulator(name, sp.p1, **params)
        for _ in range(100):
            x1 = float(rng.uniform(-30.0, 30.0))
            x2 = float(rng.uniform(-30.0, 30.0))
            diag = surface(sp, reg, (x1, x2))
            if abs(diag.s) < 1e-9:
                continue
            u, diag = control(sp, reg, reg, plant, 0.0, (x1, x2))
            x2dot = plant.drift(x1, x2) + plant.input_gain(x1, x2) * u
            v1 = 0.5 * x1 * x1
            surf_rate = reg.span * (
                phi_dot(sp, reg, x1, x2) * v1**sp.q
                + sp.q * phi(sp, reg, x1) * v1 ** (sp.q - 1.0) * x1 * x2
            ) / (2.0 * sp.p1 * sp.t1)
            sdot = x2dot + surf_rate
            expected = -reaching_term(sp, reg, diag.s) - sp.kappa * math.copysign(1.0, diag.s)
            scale = max(1.0, abs(x2dot), abs(surf_rate), abs(expected))
            assert abs(sdot - expected) <= 1e-9 * scale

    def test_reaching_decay_matches_requirement(self, rng):
        # V2-dot = s * s-dot <= required_decay(V2) pointwise, w = 0
        plant = dataclasses.replace(benchmark_plant(), disturbance=_no_disturbance)
        sp = SurfaceParams(p1=0.051, q=2.0, eta0=1e-4, t1=0.5, t2=0.5, kappa=0.1)
        reg = make_regulator("sigmoid_ratio", sp.p1, a=1.0, b=3.0, alpha=1.0)
        for _ in range(50):
            x1 = float(rng.uniform(-100.0, 100.0))
            x2 = float(rng.uniform(-100.0, 100.0))
            u, diag = control(sp, reg, reg, plant, 0.0, (x1, x2))
            if abs(diag.s) < 1e-9:
                continue
            x2dot = plant.drift(x1, x2) + plant.input_gain(x1, x2) * u
            v1 = 0.5 * x1 * x1
            surf_rate = reg.span * (
                phi_dot(sp, reg, x1, x2) * v1**sp.q
                + sp.q * phi(sp, reg, x1) * v1 ** (sp.q - 1.0) * x1 * x2
            ) / (2.0 * sp.p1 * sp.t1)
            v2dot = diag.s * (x2dot + surf_rate)
            rd = required_decay(reg, diag.v2, sp.t2)
            assert v2dot <= rd + 1e-9 * abs(rd)

    @pytest.mark.parametrize("reg_spec", [("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}), ("exp_offset", {"shift": 1.0, "alpha": 1.0})])
    def test_manifold_velocity_realizes_required_decay(self, reg_spec, rng):
        # on s = 0 with V1 >= eta0: x2 = -span H1 x1 V1^{-p1} / (2 p1 t1),
        # so V1-dot = x1 x2 equals the decay requirement with tc = t1
        name, params = reg_spec
        sp = SurfaceParams(p1=0.11, q=2.0, eta0=1e-3, t1=0.7, t2=0.5)
        reg = make_regulator(name, sp.p1, **params)
        for _ in range(25):
            x1 = float(rng.uniform(0.1, 50.0)) * float(rng.choice([-1.0, 1.0]))
            v1 = 0.5 * x1 * x1
            x2 = -reg.span * reg.gain(v1) * x1 * v1 ** (-sp.p1) / (2.0 * sp.p1 * sp.t1)
            assert surface(sp, reg, (x1, x2)).s == pytest.approx(0.0, abs=1e-12 * abs(x2))
            v1dot = x1 * x2
            assert v1dot == pytest.approx(required_decay(reg, v1, sp.t1), rel=1e-12)

    def test_nonsingular_over_random_states(self, rng):
        # vectorized sweep incl. x1 = 0 exactly and tiny x1
        plant = benchmark_plant()
        sp = SurfaceParams(p1=0.051, q=2.0, eta0=1e-4, t1=0.5, t2=0.5, kappa=0.1)
        reg = make_regulator("sigmoid_ratio", sp.p1, a=1.0, b=3.0, alpha=1.0)
        ctrl = make_controller(plant, sp, reg, reg)
        x1 = rng.uniform(-1e3, 1e3, size=10_000)
        x2 = rng.uniform(-1e3, 1e3, size=10_000)
        x1[:5] = [0.0, 1e-12, -1e-12, 0.01, -0.01]
        x2[:5] = [0.0, 5.0, -5.0, 0.0, 1e-9]
        u, s, v1, v2, f, g = ctrl(0.3, x1, x2)
        assert np.isfinite(u).all()

    def test_boundary_layer_softens_sign(self):
        plant = benchmark_plant()
        sp_hard = SurfaceParams(p1=0.051, kappa=0.1, sign_epsilon=0.0)
        sp_soft = SurfaceParams(p1=0.051, kappa=0.1, sign_epsilon=0.5)
        reg = make_regulator("sigmoid_ratio", 0.051, a=1.0, b=3.0, alpha=1.0)
        x = (0.0, 1e-6)  # s = 1e-6, deep inside the layer
        u_hard, _ = control(sp_hard, reg, reg, plant, 0.0, x)
        u_soft, _ = control(sp_soft, reg, reg, plant, 0.0, x)
        assert abs(u_soft) < abs(u_hard)

    def test_gain_inversion_error(self):
        plant = dataclasses.replace(benchmark_plant(), input_gain=_zero_gain)
        sp = SurfaceParams(p1=0.051)
        reg = make_regulator("sigmoid_ratio", 0.051, a=1.0, b=3.0, alpha=1.0)
        with pytest.raises(GainInversionError):
            control(sp, reg, reg, plant, 0.0, (1.0, 1.0))

    def test_enforces_matching_exponents(self):
        plant = benchmark_plant()
        sp = SurfaceParams(p1=0.051)
        good = make_regulator("power", 0.051)
        bad = make_regulator("power", 0.3)
        with pytest.raises(ConstructionError):
            control(sp, good, bad, plant, 0.0, (1.0, 1.0))


def _no_disturbance(t):
    return 0.0 * t


def _zero_gain(x1, x2):
    return 0.0 * x1
