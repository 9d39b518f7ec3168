"""Annealing-schedule partition-function estimation at desk scale.

The sampler for step ``i`` returns ``X = 1`` with probability
``tr(exp(-(b_{i+1} - b_i) H') sigma_{b_i}) = Z'_{b_{i+1}} / Z'_{b_i}`` where
``H' = H - E_min >= 0``. That probability is computed exactly from the
spectrum; an approximate block encoding is modelled by a seeded perturbation
of at most ``2 eps_b``. The product of per-step sample means times the known
``Z_{b_min}`` estimates ``Z_{b_max}`` (the shift is undone at the end).
"""

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from .spin_model import partition_value


def _shifted_log_z(H, beta):
    E = H.eigenvalues
    return float(np.log(np.exp(-beta * (E - E.min())).sum()))


@dataclass(frozen=True)
class AnnealingSchedule:
    betas: tuple
    ratio_bound: float  # max_i Z'_{b_i} / Z'_{b_{i+1}} for the shifted H'
    unshifted_ratio_bound: float  # same for H itself
    step_ratios: tuple  # Z'_{b_{i+1}} / Z'_{b_i}
    norm: float

    def __post_init__(self):
        if np.any(np.diff(self.betas) <= 0):
            raise ValueError("schedule must be strictly ascending")

    @property
    def length(self):
        return len(self.betas)


def exact_ratio(H, beta_i, beta_next):
    """``Z'_{beta_next} / Z'_{beta_i}`` for ``H' = H - E_min``; lies in (0, 1]."""
    if beta_next < beta_i:
        raise ValueError("need beta_next >= beta_i")
    return float(np.exp(_shifted_log_z(H, beta_next) - _shifted_log_z(H, beta_i)))


def build_uniform_schedule(H, beta_min, beta_max, c, beta_star=None):
    """Steps of ``c / ||H||`` from ``beta_min`` to ``beta_max`` (last step shortened).

    ``l = ceil((beta_max - beta_min) ||H|| / c) + 1`` points; a zero Hamiltonian
    with ``beta_min < beta_max`` gets the two endpoints.
    """
    if not 0 <= beta_min <= beta_max:
        raise ValueError("need 0 <= beta_min <= beta_max")
    if c <= 0:
        raise ValueError("step scale c must be positive")
    if beta_star is not None and beta_max > beta_star:
        warnings.warn(f"beta_max = {beta_max} exceeds the certified beta* = {beta_star}", stacklevel=2)
    norm = H.norm
    span = beta_max - beta_min
    if span == 0:
        betas = (float(beta_min),)
    elif norm == 0:
        betas = (float(beta_min), float(beta_max))
    else:
        l = math.ceil(span * norm / c - 1e-12) + 1
        step = c / norm
        betas = tuple(float(beta_min + i * step) for i in range(l - 1)) + (float(beta_max),)
    ratios = tuple(exact_ratio(H, a, b) for a, b in zip(betas[:-1], betas[1:]))
    B = max((1.0 / r for r in ratios), default=1.0)
    Bu = max((partition_value(H, a) / partition_value(H, b) for a, b in zip(betas[:-1], betas[1:])), default=1.0)
    return AnnealingSchedule(betas, float(B), float(Bu), ratios, float(norm))


@dataclass
class RatioSampler:
    step: int
    p: float
    block_error: float = 0.0
    seed: object = 0
    realized_p: float = field(init=False)
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("success probability must lie in [0, 1]")
        if self.block_error < 0:
            raise ValueError("block_error must be nonnegative")
        self._rng = np.random.default_rng(self.seed)
        shift = self._rng.uniform(-2, 2) * self.block_error if self.block_error > 0 else 0.0
        self.realized_p = float(np.clip(self.p + shift, 0.0, 1.0))


def sample_ratio(sampler, count):
    """``count`` independent Bernoulli(``realized_p``) outcomes as 0/1 integers."""
    return (sampler._rng.random(int(count)) < sampler.realized_p).astype(np.int8)


def samples_per_step(schedule, eps, block_error=0.0):
    """``ceil(16 B l / eps^2)`` with ``B`` doubled when ``block_error > 0``."""
    B = schedule.ratio_bound * (2 if block_error > 0 else 1)
    return math.ceil(16 * B * schedule.length / eps**2)


@dataclass
class EstimateReport:
    estimate: float
    target: float
    relative_error: float
    sample_counts: list
    seeds: list
    step_means: list
    step_probabilities: list
    failed: bool = False

    def to_dict(self):
        return asdict(self)


def dyer_frieze_estimate(H, schedule, eps, block_error=0.0, seed=0, trial=0):
    """Product estimator of ``Z_{beta_max}``; per-step seeds are ``(seed, trial, step)``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    betas = schedule.betas
    z0 = partition_value(H, betas[0])
    target = partition_value(H, betas[-1])
    count = samples_per_step(schedule, eps, block_error) if schedule.length > 1 else 0
    means, probs, seeds = [], [], []
    for i, p in enumerate(schedule.step_ratios):
        ss = np.random.SeedSequence([int(seed), int(trial), i])
        s = RatioSampler(i, p, block_error, ss)
        means.append(float(sample_ratio(s, count).mean()))
        probs.append(s.realized_p)
        seeds.append([int(seed), int(trial), i])
    E_min = float(H.eigenvalues.min())
    est = z0 * math.exp(-(betas[-1] - betas[0]) * E_min) * float(np.prod(means))
    return EstimateReport(
        estimate=est, target=target, relative_error=abs(est - target) / target,
        sample_counts=[count] * len(means), seeds=seeds, step_means=means,
        step_probabilities=probs, failed=any(m == 0 for m in means),
    )


def clopper_pearson_lower(successes, trials, confidence=0.99):
    """One-sided lower confidence bound on a binomial success rate."""
    if successes == 0:
        return 0.0
    return float(beta_dist.ppf(1 - confidence, successes, trials - successes + 1))


@dataclass
class HarnessReport:
    trials: int
    successes: int
    fraction: float
    lower_bound: float
    confidence: float
    eps: float
    block_error: float
    seed: int
    ratio_bound: float
    second_moment_ratios: list  # pooled E[X^2] / E[X]^2 per step
    reports: list = field(repr=False)
    threshold: float = 0.70

    @property
    def passed(self):
        return self.lower_bound >= self.threshold

    def summary(self):
        out = {k: v for k, v in asdict(self).items() if k != "reports"}
        out["passed"] = self.passed
        return out

    def to_json(self, **kw):
        return json.dumps(self.summary(), **kw)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "estimate", "target", "relative_error", "success"])
            for i, r in enumerate(self.reports):
                w.writerow([i, repr(r.estimate), repr(r.target), repr(r.relative_error),
                            int(r.relative_error <= self.eps and not r.failed)])


def success_probability_harness(H, beta_max, c, eps, block_error=0.0, trials=200, seed=0,
                                beta_min=0.0, confidence=0.99):
    """Repeat the estimator over seeded trials and bound the success rate from below."""
    if trials < 100:
        raise ValueError("use at least 100 trials")
    sched = build_uniform_schedule(H, beta_min, beta_max, c)
    reports = [dyer_frieze_estimate(H, sched, eps, block_error, seed, t) for t in range(trials)]
    ok = sum(r.relative_error <= eps and not r.failed for r in reports)
    # X is 0/1 so E[X^2] = E[X]; pooled ratio is 1 / mean
    pooled = [float(np.mean([r.step_means[i] for r in reports])) for i in range(sched.length - 1)]
    moments = [1.0 / m if m > 0 else math.inf for m in pooled]
    return HarnessReport(trials, ok, ok / trials, clopper_pearson_lower(ok, trials, confidence), confidence,
                         eps, block_error, seed, sched.ratio_bound, moments, reports)
