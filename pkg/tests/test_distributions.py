import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdp_accountant.distributions import (
    DiscreteDistribution,
    HeuristicDivergenceWarning,
    PrivacyLossRV,
    SupportMismatch,
    approx_max_divergence,
    empirical_subgaussian_standard,
    kl_divergence,
    max_divergence,
    privacy_loss_rv,
)
from cdp_accountant.mechanisms import randomized_response_pair

from conftest import dist, subset_max_log_ratio


def test_distribution_rejects_bad_input():
    with pytest.raises(ValueError):
        dist(0.5, 0.6)
    with pytest.raises(ValueError):
        dist(-0.1, 1.1)
    with pytest.raises(ValueError):
        DiscreteDistribution(("a", "a"), (0.5, 0.5))
    with pytest.raises(ValueError):
        DiscreteDistribution(("a",), (0.5, 0.5))


def test_distribution_does_not_renormalize():
    with pytest.raises(ValueError):
        dist(0.5, 0.5 + 1e-9)
    dist(0.5, 0.5 + 1e-13)


def test_json_round_trip():
    d = DiscreteDistribution(("x", "y"), (0.25, 0.75))
    assert DiscreteDistribution.from_json(d.to_json()) == d


@pytest.mark.parametrize(
    "p, q, expected",
    [
        (dist(0.5, 0.5), dist(0.5, 0.5), 0.0),
        (dist(0.5, 0.5), dist(0.25, 0.75), 0.14384103622589046),
    ],
)
def test_kl_examples(p, q, expected):
    assert kl_divergence(p, q) == pytest.approx(expected, abs=1e-15)


def test_kl_randomized_response():
    p, q = randomized_response_pair(1.0)
    assert kl_divergence(p, q) == pytest.approx(0.46211715726000976, abs=1e-14)
    assert kl_divergence(p, q) == pytest.approx(math.tanh(0.5), abs=1e-14)


def test_support_mismatch():
    with pytest.raises(SupportMismatch) as exc:
        kl_divergence(dist(0.5, 0.5), dist(1.0, 0.0))
    assert exc.value.outcome == 1
    assert exc.value.zero_side == "q"
    with pytest.raises(SupportMismatch) as exc:
        max_divergence(dist(1.0, 0.0), dist(0.5, 0.5))
    assert exc.value.zero_side == "p"


def test_zero_on_both_sides_is_dropped():
    p = dist(0.5, 0.0, 0.5)
    q = dist(0.25, 0.0, 0.75)
    assert kl_divergence(p, q) == pytest.approx(0.14384103622589046, abs=1e-15)


def test_outcomes_aligned_by_label():
    p = DiscreteDistribution(("a", "b"), (0.5, 0.5))
    q = DiscreteDistribution(("b", "a"), (0.75, 0.25))
    assert kl_divergence(p, q) == pytest.approx(0.14384103622589046, abs=1e-15)


@pytest.mark.parametrize(
    "p, q, expected",
    [
        (dist(0.3, 0.7), dist(0.3, 0.7), 0.0),
        (dist(0.5, 0.5), dist(0.25, 0.75), math.log(2)),
        (*randomized_response_pair(0.3), 0.3),
    ],
)
def test_max_divergence_examples(p, q, expected):
    assert max_divergence(p, q) == pytest.approx(expected, abs=1e-12)
    assert subset_max_log_ratio(p, q) == pytest.approx(expected, abs=1e-12)


def test_atom_max_equals_subset_max(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        p = dist(*(rng.dirichlet(np.ones(n))))
        q = dist(*(rng.dirichlet(np.ones(n))))
        assert abs(max_divergence(p, q) - subset_max_log_ratio(p, q)) <= 1e-12


@pytest.mark.parametrize(
    "p, q, delta, expected",
    [
        (dist(0.5, 0.5), dist(0.25, 0.75), 0.6, 0.0),
        (dist(0.9, 0.1), dist(0.5, 0.5), 0.15, math.log(1.8)),
    ],
)
def test_approx_max_divergence_examples(p, q, delta, expected):
    assert approx_max_divergence(p, q, delta) == pytest.approx(expected, abs=1e-12)
    assert subset_max_log_ratio(p, q, delta) == pytest.approx(expected, abs=1e-12)


def test_approx_max_divergence_zero_delta(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        p = dist(*(rng.dirichlet(np.ones(n))))
        q = dist(*(rng.dirichlet(np.ones(n))))
        assert approx_max_divergence(p, q, 0.0) == pytest.approx(max_divergence(p, q), abs=1e-12)


def test_approx_max_divergence_escaped_mass():
    p, q = dist(0.9, 0.1), dist(1.0, 0.0)
    # mass exactly delta outside q's support is accepted
    assert approx_max_divergence(p, q, 0.1) == pytest.approx(math.log(0.9), abs=1e-12)
    with pytest.raises(SupportMismatch):
        approx_max_divergence(p, q, 0.05)


def test_approx_max_divergence_heuristic_above_limit(rng):
    p = dist(*rng.dirichlet(np.ones(24)))
    q = dist(*rng.dirichlet(np.ones(24)))
    with pytest.warns(HeuristicDivergenceWarning):
        value = approx_max_divergence(p, q, 0.0)
    assert value == pytest.approx(max_divergence(p, q), abs=1e-12)


def test_privacy_loss_rv_examples():
    assert privacy_loss_rv(dist(0.2, 0.8), dist(0.2, 0.8)).atoms == ((0.0, 1.0),)
    rv = privacy_loss_rv(*randomized_response_pair(1.0))
    assert rv.losses == pytest.approx([-1.0, 1.0], abs=1e-15)
    assert rv.probs == pytest.approx([0.2689414213699951, 0.7310585786300049], abs=1e-15)
    rv = privacy_loss_rv(dist(0.5, 0.5), dist(0.25, 0.75))
    assert rv.losses == pytest.approx([math.log(2 / 3), math.log(2)], abs=1e-15)
    assert rv.probs == pytest.approx([0.5, 0.5])


def test_privacy_loss_rv_csv_round_trip():
    rv = privacy_loss_rv(dist(0.5, 0.5), dist(0.25, 0.75))
    text = rv.to_csv()
    assert text.splitlines()[0] == "loss,prob"
    assert PrivacyLossRV.from_csv(text) == rv


probs = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8)


def _normalize(ws):
    total = math.fsum(ws)
    return dist(*(w / total for w in ws))


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_mean_of_loss_is_kl(data):
    ws = data.draw(probs)
    vs = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(ws), max_size=len(ws)))
    p, q = _normalize(ws), _normalize(vs)
    kl = kl_divergence(p, q)
    assert abs(privacy_loss_rv(p, q).mean() - kl) <= 1e-12
    assert kl >= -1e-15


@settings(max_examples=200, deadline=None)
@given(probs)
def test_kl_zero_for_identical(ws):
    p = _normalize(ws)
    assert abs(kl_divergence(p, p)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_pure_dp_losses_bounded(data):
    ws = data.draw(probs)
    vs = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(ws), max_size=len(ws)))
    p, q = _normalize(ws), _normalize(vs)
    eps = max(max_divergence(p, q), max_divergence(q, p))
    rv = privacy_loss_rv(p, q)
    assert all(-eps - 1e-12 <= loss <= eps + 1e-12 for loss, _ in rv.atoms)


def test_empirical_standard_constant():
    assert empirical_subgaussian_standard(PrivacyLossRV(((0.3, 1.0),)), [1.0, -1.0]) == 0.0


def test_empirical_standard_randomized_response():
    rv = privacy_loss_rv(*randomized_response_pair(0.5))
    grid = [s * 0.5 * k for k in range(1, 17) for s in (1, -1)]
    value = empirical_subgaussian_standard(rv, grid)
    # closed-form two-atom MGF evaluated at 50 digits
    assert value == pytest.approx(0.49489257663023107, abs=1e-12)
    assert 0.4 <= value <= 0.5


def test_empirical_standard_discretized_gaussian():
    xs = np.linspace(-8, 8, 4001)
    w = np.exp(-xs**2 / 2)
    w /= w.sum()
    rv = PrivacyLossRV(tuple(zip(xs.tolist(), (w / math.fsum(w)).tolist())))
    value = empirical_subgaussian_standard(rv, [0.5, 1.0, 2.0, -0.5, -1.0, -2.0])
    assert abs(value - 1.0) <= 0.02


def test_empirical_standard_guards():
    rv = PrivacyLossRV(((-1.0, 0.5), (1.0, 0.5)))
    with pytest.raises(ValueError):
        empirical_subgaussian_standard(rv, [])
    with pytest.raises(ValueError):
        empirical_subgaussian_standard(rv, [0.0, 1.0])
    with pytest.raises(OverflowError):
        empirical_subgaussian_standard(rv, [1e3])
