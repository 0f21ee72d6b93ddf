import numpy as np
import pytest

from pretime import Direction, make_regulator
from pretime.errors import ConstructionError, DomainError, OverflowGuardError
from pretime.regulator import KINDS

from conftest import BOUNDED_KIND_EXAMPLES, KIND_EXAMPLES

# u-grid where every kind's slope is healthy; FD step scaled to the point
FD_GRID_U = np.logspace(-4, 0.5, 25)
FD_STEP = 6e-6


def _make(name, params, p=0.3):
    return make_regulator(name, p, **params)


class TestEval:
    def test_exp_complement_at_zero(self):
        reg = _make("exp_complement", {"b": 2.0, "alpha": 1.0}, p=0.5)
        assert reg.eval(0.0) == 1.0

    def test_exp_complement_closed_form(self):
        reg = _make("exp_complement", {"b": 2.0, "alpha": 1.0}, p=0.5)
        assert reg.eval(1.0) == pytest.approx(1.6321205588285577, rel=1e-15)

    def test_sigmoid_ratio_start_value(self):
        reg = _make("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}, p=0.051)
        assert reg.eval(0.0) == 1.5

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_value_at_zero_is_terminal(self, name, params):
        reg = _make(name, params)
        assert reg.eval(0.0) == reg.terminal

    @pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
    def test_rejects_bad_inputs(self, bad):
        reg = _make("exp_complement", {"b": 2.0, "alpha": 1.0})
        with pytest.raises(DomainError):
            reg.eval(bad)


class TestGradients:
    def test_sigmoid_ratio_slope_at_zero(self):
        reg = _make("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}, p=0.051)
        assert reg.grad_vp(0.0) == pytest.approx(0.75, rel=1e-15)

    def test_exp_offset_slope_at_zero(self):
        reg = _make("exp_offset", {"shift": 1.0, "alpha": 1.0}, p=0.05)
        assert reg.grad_vp(0.0) == -1.0

    def test_power_slope_everywhere(self):
        reg = _make("power", {}, p=0.5)
        for v in (0.0, 0.3, 7.0, 1e6):
            assert reg.grad_vp(v) == 1.0
            assert reg.grad2_vp(v) == 0.0

    def test_exp_complement_curvature(self):
        # at V**p = 1 the curvature is -alpha^2 e^{-alpha}
        reg = _make("exp_complement", {"b": 2.0, "alpha": 1.0}, p=0.5)
        assert reg.grad2_vp(1.0) == pytest.approx(-0.36787944117144233, rel=1e-15)

    def test_sigmoid_ratio_curvature_at_zero(self):
        reg = _make("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}, p=0.051)
        assert reg.grad2_vp(0.0) == 0.0

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_grad_matches_finite_difference(self, name, params):
        reg = _make(name, params)
        kind = reg.kind
        scale = max(abs(kind.dpsi_du(u)) for u in FD_GRID_U)
        for u in FD_GRID_U:
            h = FD_STEP * max(1.0, u)
            fd = (kind.psi_u(u + h) - kind.psi_u(u - h)) / (2.0 * h)
            exact = kind.dpsi_du(u)
            assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-9 * scale)

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_grad2_matches_finite_difference(self, name, params):
        reg = _make(name, params)
        kind = reg.kind
        scale = max(abs(kind.d2psi_du2(u)) for u in FD_GRID_U) or 1.0
        for u in FD_GRID_U:
            h = FD_STEP * max(1.0, u)
            fd = (kind.dpsi_du(u + h) - kind.dpsi_du(u - h)) / (2.0 * h)
            exact = kind.d2psi_du2(u)
            assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-6 * scale)


class TestGain:
    def test_sigmoid_ratio(self):
        reg = _make("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}, p=0.051)
        assert reg.gain(0.0) == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_exp_offset_magnitude(self):
        reg = _make("exp_offset", {"shift": 1.0, "alpha": 1.0}, p=0.05)
        assert reg.gain(0.0) == 1.0

    def test_power(self):
        reg = _make("power", {}, p=0.5)
        assert reg.gain(123.4) == 1.0

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_positive_for_both_directions(self, name, params):
        reg = _make(name, params)
        for v in (0.0, 0.5, 3.0):
            assert reg.gain(v) > 0.0

    def test_overflow_guard_is_loud(self):
        reg = _make("exp_complement", {"b": 2.0, "alpha": 1.0}, p=0.5)
        v = 1e7  # V**p = sqrt(1e7) ~ 3162 > 700
        with pytest.raises(OverflowGuardError):
            reg.gain(v)
        # evaluation itself saturates harmlessly at the same point
        assert reg.eval(v) == 2.0


class TestIntervalAndMonotonicity:
    @pytest.mark.parametrize("name,params", BOUNDED_KIND_EXAMPLES)
    def test_bounded_on_log_grid(self, name, params):
        reg = _make(name, params, p=0.1)
        grid = np.logspace(-8, 8, 1000)
        values = np.array([reg.eval(v) for v in grid])
        if reg.direction is Direction.INCREASING:
            assert (values >= reg.lower).all()
            assert (values < reg.upper).all()
        else:
            assert (values > reg.lower).all()
            assert (values <= reg.upper).all()

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_strictly_monotone(self, name, params):
        reg = _make(name, params, p=0.1)
        grid = np.logspace(-6, 6, 200)
        values = np.array([reg.eval(v) for v in grid])
        diffs = np.diff(values) * reg.direction.sign
        assert (diffs > 0.0).all()

    @pytest.mark.parametrize("name,params", KIND_EXAMPLES)
    def test_grad_sign_matches_direction(self, name, params):
        reg = _make(name, params)
        for v in np.logspace(-6, 4, 50):
            assert reg.grad_vp(v) * reg.direction.sign > 0.0


class TestConstruction:
    def test_every_kind_has_registry_name(self):
        assert set(KINDS) == {name for name, _ in KIND_EXAMPLES}

    @pytest.mark.parametrize(
        "name,params",
        [
            ("exp_complement", {"b": 2.0, "alpha": 0.0}),
            ("exp_complement", {"b": 2.0, "alpha": -1.0}),
            ("arctan_scaled", {"alpha": -1.0, "beta": 1.0}),
            ("rational_saturating", {"scale": 0.0, "k": 1.0}),
            ("tanh_scaled", {"m": 1.0, "n": -2.0}),
            ("exp_offset", {"shift": 0.0, "alpha": 1.0}),
            ("logistic_reciprocal", {"n": 1.0, "m": 0.0, "alpha": 1.0}),
            ("inverse_power", {"k": 0.0}),
            ("sigmoid_ratio", {"a": -1.0, "b": 3.0, "alpha": 1.0}),
        ],
    )
    def test_rejects_nonpositive_shape_parameters(self, name, params):
        with pytest.raises(ConstructionError):
            make_regulator(name, 0.3, **params)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5, float("nan")])
    def test_rejects_bad_exponent(self, p):
        with pytest.raises(ConstructionError):
            make_regulator("power", p)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ConstructionError):
            make_regulator("nope", 0.5)

    def test_rejects_unknown_parameter(self):
        with pytest.raises(ConstructionError):
            make_regulator("power", 0.5, bogus=1.0)

    def test_metadata_is_derived(self):
        reg = make_regulator("sigmoid_ratio", 0.051, a=1.0, b=3.0, alpha=1.0)
        assert reg.direction is Direction.INCREASING
        assert reg.bounded
        assert reg.lower == 1.5
        assert reg.upper == 3.0
        assert reg.span == 1.5
