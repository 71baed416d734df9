import math

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from cdp_accountant.composition import (
    advanced_composition,
    basic_composition,
    compose_cdp,
    convolve_loss_rvs,
)
from cdp_accountant.distributions import PrivacyLossRV, privacy_loss_rv
from cdp_accountant.mechanisms import CdpBound, GaussianMechanismSpec, gaussian_cdp, randomized_response_pair
from cdp_accountant.subgaussian import sum_standard, verify_certificate


def advanced_oracle(k, eps, delta_prime, delta):
    with mp.workdps(50):
        k, eps, dp, d = mpf(k), mpf(eps), mpf(delta_prime), mpf(delta)
        return (mp.sqrt(2 * k * mp.log(1 / d)) * eps + k * eps * (mp.e**eps - 1) / 2, k * dp + d)


def test_compose_examples():
    assert compose_cdp([CdpBound(0.5, 1.0)] * 2) == CdpBound(1.0, math.sqrt(2))
    assert compose_cdp([]) == CdpBound(0.0, 0.0)
    assert compose_cdp([CdpBound(0.005, 0.1)] * 100) == CdpBound(0.5, 1.0)


@settings(max_examples=200)
@given(st.floats(0, 10), st.floats(0, 10), st.integers(1, 200))
def test_compose_homogeneous_exact(mu, tau, k):
    assert compose_cdp([CdpBound(mu, tau)] * k) == CdpBound(k * mu, math.sqrt(k) * tau)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 5)), max_size=20))
def test_compose_order_independent(pairs):
    bounds = [CdpBound(m, t) for m, t in pairs]
    a, b = compose_cdp(bounds), compose_cdp(bounds[::-1])
    assert a.mu == pytest.approx(b.mu, rel=1e-15, abs=0)
    assert a.tau == pytest.approx(b.tau, rel=1e-15, abs=0)


def test_compose_gaussians_is_gaussian():
    specs = [GaussianMechanismSpec(1.0, s) for s in (1.0, 2.0, 3.5, 10.0)]
    total = compose_cdp(gaussian_cdp(s) for s in specs)
    tau = math.sqrt(sum(s.tau**2 for s in specs))
    assert total.tau == pytest.approx(tau, rel=1e-15)
    assert total.mu == pytest.approx(tau**2 / 2, rel=1e-15)


@pytest.mark.parametrize(
    "k, eps, dprime, delta",
    [(1, 0.0, 0.0, 0.5), (100, 0.1, 0.0, 1e-6), (100, 0.1, 1e-8, 1e-6), (7, 1.3, 1e-5, 1e-3)],
)
def test_advanced_composition_matches_oracle(k, eps, dprime, delta):
    res = advanced_composition(k, eps, dprime, delta)
    e_ref, d_ref = advanced_oracle(k, eps, dprime, delta)
    assert res.epsilon == pytest.approx(float(e_ref), rel=1e-13, abs=1e-300)
    assert res.delta == pytest.approx(float(d_ref), rel=1e-13)


def test_advanced_composition_values():
    assert advanced_composition(100, 0.1, 0.0, 1e-6).epsilon == pytest.approx(5.78237636, abs=1e-8)
    assert advanced_composition(100, 0.1, 1e-8, 1e-6).delta == pytest.approx(2e-6, rel=1e-12)
    res = advanced_composition(1, 0.0, 0.01, 0.2)
    assert res.epsilon == 0.0
    assert res.delta == pytest.approx(0.21, rel=1e-15)


def test_advanced_composition_domain():
    with pytest.raises(ValueError):
        advanced_composition(0, 0.1, 0.0, 1e-6)
    with pytest.raises(ValueError):
        advanced_composition(1, 0.1, 0.0, 0.0)
    with pytest.raises(ValueError):
        advanced_composition(1, -0.1, 0.0, 0.1)


def test_advanced_composition_limits_and_monotonicity():
    eps = 0.4
    near_one = advanced_composition(1, eps, 0.0, 1 - 1e-12).epsilon
    assert near_one == pytest.approx(eps * math.expm1(eps) / 2, rel=1e-5)
    base = advanced_composition(10, eps, 0.0, 1e-3).epsilon
    assert advanced_composition(11, eps, 0.0, 1e-3).epsilon > base
    assert advanced_composition(10, eps * 1.01, 0.0, 1e-3).epsilon > base
    assert advanced_composition(10, eps, 0.0, 1e-4).epsilon > base


def test_basic_composition():
    assert basic_composition(1, 0.3).to_json() == {"epsilon": 0.3, "delta": 0.0}
    assert basic_composition(10, 0.1).epsilon == pytest.approx(1.0)
    assert basic_composition(5, 0.0).epsilon == 0.0


def test_convolve_examples():
    rv = privacy_loss_rv(*randomized_response_pair(0.4))
    assert convolve_loss_rvs([rv]) == rv
    two = convolve_loss_rvs([rv, rv])
    p = 1 / (1 + math.exp(-0.4))
    assert two.losses == pytest.approx([-0.8, 0.0, 0.8], abs=1e-15)
    assert two.probs == pytest.approx([(1 - p) ** 2, 2 * p * (1 - p), p**2], abs=1e-15)
    assert convolve_loss_rvs([]).atoms == ((0.0, 1.0),)


def test_convolve_mean_additive():
    rvs = [privacy_loss_rv(*randomized_response_pair(e)) for e in (0.1, 0.25, 0.7, 1.1, 0.3)]
    conv = convolve_loss_rvs(rvs)
    assert abs(conv.mean() - math.fsum(rv.mean() for rv in rvs)) <= 1e-10
    rv = rvs[0]
    assert abs(convolve_loss_rvs([rv] * 8).mean() - 8 * rv.mean()) <= 1e-10


def test_convolve_certificate_composes():
    epsilons = [0.3, 0.6, 0.15, 0.9]
    rvs = [privacy_loss_rv(*randomized_response_pair(e)) for e in epsilons]
    for rv, e in zip(rvs, epsilons):
        assert verify_certificate(rv, e).passed
    assert verify_certificate(convolve_loss_rvs(rvs), sum_standard(epsilons)).passed


def test_convolve_size_guard():
    rv = PrivacyLossRV(tuple((float(i), 1 / 1000) for i in range(1000)))
    with pytest.raises(ValueError):
        convolve_loss_rvs([rv, rv, rv])
