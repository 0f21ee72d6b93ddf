import numpy as np
import pytest

from pretime import CampaignConfig, SimConfig, SurfaceParams, make_regulator

# one representative parameterization per regulator kind
KIND_EXAMPLES = [
    ("exp_complement", {"b": 2.0, "alpha": 1.0}),
    ("arcsin_tanh", {}),
    ("arctan_scaled", {"alpha": 1.0, "beta": 2.0}),
    ("rational_saturating", {"scale": 2.0, "k": 0.5}),
    ("tanh_scaled", {"m": 2.0, "n": 1.5}),
    ("exp_offset", {"shift": 1.0, "alpha": 1.0}),
    ("logistic_reciprocal", {"n": 2.0, "m": 1.0, "alpha": 1.0}),
    ("inverse_power", {"k": 2.0}),
    ("sigmoid_ratio", {"a": 1.0, "b": 3.0, "alpha": 1.0}),
    ("power", {}),
]

BOUNDED_KIND_EXAMPLES = [(name, params) for name, params in KIND_EXAMPLES if name != "power"]


def make_increasing_campaign(n_scenarios=100, dt=1e-5, stride=100, horizon=1.5, seed=42):
    """The increasing-regulator benchmark campaign configuration."""
    reg = make_regulator("sigmoid_ratio", 0.051, a=1.0, b=3.0, alpha=1.0)
    return CampaignConfig(
        surface=SurfaceParams(p1=0.051, q=2.0, eta0=1e-4, t1=0.5, t2=0.5, kappa=0.1),
        reg_slide=reg,
        reg_reach=reg,
        sim=SimConfig(dt=dt, horizon=horizon, record_stride=stride),
        n_scenarios=n_scenarios,
        seed=seed,
        corner_cases=True,
    )


def make_decreasing_campaign(n_scenarios=100, dt=1e-5, stride=100, horizon=1.5, seed=42):
    """The decreasing-regulator benchmark campaign configuration."""
    reg = make_regulator("exp_offset", 0.05, shift=1.0, alpha=1.0)
    return CampaignConfig(
        surface=SurfaceParams(p1=0.05, q=2.0, eta0=1e-4, t1=0.5, t2=0.5, kappa=0.1),
        reg_slide=reg,
        reg_reach=reg,
        sim=SimConfig(dt=dt, horizon=horizon, record_stride=stride),
        n_scenarios=n_scenarios,
        seed=seed,
        corner_cases=True,
    )


def ode_hitting_time(reg, v0, tc, eps):
    """Hitting time of dV/dt = required_decay(V) at V = eps, by quadrature.

    The ODE is separable: T = integral of -1/required_decay(V) dV from eps
    to v0.  Integrated in log space (V = e^y) so the v**(p-1) left-endpoint
    spike becomes a smooth exponential the quadrature resolves.
    """
    from scipy.integrate import quad

    from pretime import required_decay

    def integrand(y):
        v = np.exp(y)
        return -v / required_decay(reg, v, tc)

    value, err = quad(integrand, np.log(eps), np.log(v0), limit=200)
    assert err < 1e-8 * max(value, 1e-12)
    return value


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
