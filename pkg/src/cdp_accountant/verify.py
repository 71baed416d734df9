"""Randomized property suites exposed through ``cdp-accountant verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import composition, group_privacy, mechanisms, reduction, subgaussian
from .distributions import DiscreteDistribution, kl_divergence, privacy_loss_rv
from .mechanisms import CdpBound, GaussianMechanismSpec

MAX_COUNTEREXAMPLES = 10


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    checks: int = 0
    failures: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, name: str, **details) -> None:
        self.checks += 1
        if not ok and len(self.failures) < MAX_COUNTEREXAMPLES:
            self.failures.append({"check": name, **details})
        elif not ok:
            self.failures[-1].setdefault("more", 0)
            self.failures[-1]["more"] += 1

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "checks": self.checks,
            "passed": self.passed,
            "params": self.params,
            "counterexamples": self.failures,
        }


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def suite_reduction(seed: int, trials: int = 10_000) -> SuiteReport:
    report = SuiteReport("reduction", seed, trials,
                         params={"dirichlet_alpha": 1.0, "support": [2, 8], "max_epsilon": 2.0})
    for d, dp in reduction.random_pairs(_rng(seed, 0), trials, max_epsilon=2.0):
        eps = reduction.symmetric_max_divergence(d, dp)
        kl = kl_divergence(d, dp)
        pair_json = {"d": list(d.probs), "d_prime": list(dp.probs)}
        report.check(kl <= reduction.kl_tight_bound(eps) + 1e-12, "kl_tight", eps=eps, kl=kl, **pair_json)
        pair = reduction.antipodalize(d, dp)
        report.check(reduction.verify_antipodal(pair), "antipodal", **pair_json)
        eps_m = reduction.symmetric_max_divergence(pair.m, pair.m_prime)
        report.check(abs(eps_m - eps) <= 1e-12, "epsilon_preserved", eps=eps, eps_m=eps_m, **pair_json)
        kl_m = kl_divergence(pair.m, pair.m_prime)
        report.check(kl_m - kl >= -1e-12, "kl_nondecrease", kl=kl, kl_m=kl_m, **pair_json)
        gap = reduction.kl_symmetry_gap(pair)
        report.check(gap <= 1e-12, "kl_symmetry", gap=gap, **pair_json)
        cert = subgaussian.verify_certificate(privacy_loss_rv(d, dp), eps)
        report.check(cert.passed, "pure_dp_subgaussian", violation=cert.max_violation, **pair_json)
    return report


def suite_composition(seed: int, trials: int = 200) -> SuiteReport:
    report = SuiteReport("composition", seed, trials, params={"max_k": 6, "max_epsilon": 1.0})
    rng = _rng(seed, 1)
    for _ in range(trials):
        k = int(rng.integers(1, 7))
        epsilons = rng.uniform(0.01, 1.0, size=k)
        rvs = [privacy_loss_rv(*mechanisms.randomized_response_pair(e)) for e in epsilons]
        conv = composition.convolve_loss_rvs(rvs)
        total_mean = math.fsum(rv.mean() for rv in rvs)
        report.check(abs(conv.mean() - total_mean) <= 1e-10, "mean_additive",
                     epsilons=epsilons.tolist(), mean=conv.mean(), expected=total_mean)
        tau = subgaussian.sum_standard(epsilons.tolist())
        cert = subgaussian.verify_certificate(conv, tau)
        report.check(cert.passed, "sum_standard", epsilons=epsilons.tolist(),
                     violation=cert.max_violation)
        bound = reduction.dp_to_cdp(float(epsilons[0]))
        composed = composition.compose_cdp([bound] * k)
        report.check(composed == CdpBound(k * bound.mu, math.sqrt(k) * bound.tau),
                     "homogeneous_exact", k=k, bound=bound.to_json())
        report.check(conv.mean() <= composition.compose_cdp(
            [reduction.dp_to_cdp(float(e)) for e in epsilons]).mu + 1e-12,
            "theorem_dominates_oracle", epsilons=epsilons.tolist())
    return report


def suite_gaussian(seed: int, trials: int = 1_000_000) -> SuiteReport:
    report = SuiteReport("gaussian", seed, trials, params={"generator": mechanisms.GENERATOR})
    spec = GaussianMechanismSpec(1.0, 1.0)
    bound = mechanisms.gaussian_cdp(spec)
    report.check(bound == CdpBound(0.5, 1.0), "closed_form", bound=bound.to_json())
    samples = mechanisms.sample_gaussian_loss(spec, trials, seed)
    mean, std = float(samples.mean()), float(samples.std())
    report.check(abs(mean - bound.mu) <= 3 * bound.tau / math.sqrt(trials), "sample_mean", mean=mean)
    report.check(abs(std - bound.tau) <= 0.01 * bound.tau, "sample_std", std=std)
    for t in (1, 2, 3):
        frac = float(np.mean(samples >= bound.mu + t * bound.tau))
        report.check(frac <= subgaussian.tail_bound(bound.tau, t), "tail", t=t, fraction=frac)
    return report


def chain_pair(epsilon: float, s: int) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Endpoints of a chain of binary distributions whose log-odds step by ``epsilon``."""
    def at(logit):
        return DiscreteDistribution((0, 1), (1 / (1 + math.exp(-logit)), 1 / (1 + math.exp(logit))))

    return at(0.0), at(s * epsilon)


CHAIN_CASES = ((2, 0.001), (2, 0.005), (2, 0.05), (4, 0.001), (4, 0.005))


def suite_group(seed: int, trials: int = 1000) -> SuiteReport:
    report = SuiteReport("group", seed, trials, params={"chain_cases": CHAIN_CASES})
    rng = _rng(seed, 3)
    for _ in range(trials):
        s = 1 << int(rng.integers(1, 6))
        limit = group_privacy.SMALLNESS_LIMIT / group_privacy.smallness(1.0, s)
        tau = float(limit * rng.uniform(0.0, 1.0))
        mu = float(tau * tau / 2 * rng.uniform(0.0, 1.0))
        rec = group_privacy.group_cdp_recursion(CdpBound(mu, tau), s).bound
        t_cf = group_privacy.group_tau_closed_form(tau, s)
        m_cf = group_privacy.group_mu_closed_form(tau, s)
        report.check(rec.tau <= t_cf and rec.mu <= m_cf, "closed_form_dominates",
                     tau=tau, mu=mu, s=s)
        report.check(rec.tau >= s * tau and rec.mu >= mu * s * s, "dominates_exact",
                     tau=tau, mu=mu, s=s)
    for s, eps in CHAIN_CASES:
        d, d_s = chain_pair(eps, s)
        res = group_privacy.group_cdp_recursion(reduction.dp_to_cdp(eps), s, inflate=True)
        rv = privacy_loss_rv(d, d_s)
        report.check(rv.mean() <= res.bound.mu, "chain_mean", s=s, epsilon=eps,
                     mean=rv.mean(), bound=res.bound.mu)
        cert = subgaussian.verify_certificate(rv, res.bound.tau)
        report.check(cert.passed, "chain_certificate", s=s, epsilon=eps,
                     violation=cert.max_violation)
        for step in res.steps:
            report.check(step.mu <= step.tau**2 / 2, "level_invariant", s=s, epsilon=eps)
    return report


SUITES = {
    "reduction": suite_reduction,
    "composition": suite_composition,
    "gaussian": suite_gaussian,
    "group": suite_group,
}
