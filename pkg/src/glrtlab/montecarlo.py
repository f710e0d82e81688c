"""Reproducible trial engine.

Every trial owns a counter-based random stream keyed by
(master_seed, trial_index): the hypothesis draw comes from the stream's
reserved first block, the noise from the following blocks.  Results are
therefore bit-identical at any worker count and chunk size; worker
threads only shard trial ranges and the reduction is integer counting.

Ties resolve deterministically toward the lower hypothesis index and
count as errors whenever the winner is not the true hypothesis; tie
counts are reported separately.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .attacks import attack_vector
from .backend import kernels as _k
from .detectors import make_rule
from .kernels import soft_threshold
from .model import BinaryInstance

CHUNK = 1 << 16          # trials per work unit; affects speed only
SCALAR_BLOCK = 1 << 16   # draws per stream for scalar coordinate sampling
Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo error probability with a 95% normal-approximation CI."""

    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    errors: int
    ties: int
    seed: int

    def __post_init__(self):
        if not 0 <= self.errors <= self.trials:
            raise ValueError("errors must lie in [0, trials]")
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("confidence interval must bracket the estimate")

    @property
    def ci_half_width(self):
        return 0.5 * (self.ci_high - self.ci_low)


def _estimate(errors, ties, n, seed):
    p = errors / n
    half = Z95 * math.sqrt(p * (1.0 - p) / n)
    return ErrorEstimate(p_hat=p, ci_low=max(p - half, 0.0),
                         ci_high=min(p + half, 1.0),
                         trials=n, errors=errors, ties=ties, seed=seed)


def _normalize(instance):
    if isinstance(instance, BinaryInstance):
        means = np.stack([instance.mu, -instance.mu])
    else:
        means = np.stack(instance.means)
    return means, instance.sigma, instance.eps_des


def _attack_table(instance, attack, n_hyp, allow_over_budget):
    """Per-hypothesis attack vectors as an (K, d) array."""
    attack.check_budget(instance.eps_des, allow_over_budget)
    mu = instance.mu if isinstance(instance, BinaryInstance) else None
    if attack.kind != "none":
        if mu is None:
            raise ValueError("worst-case and explicit attacks are defined for "
                             "the binary symmetric model")
        return np.stack([attack_vector(attack, mu, k) for k in range(n_hyp)])
    d = instance.dimension
    return np.zeros((n_hyp, d))


def _resolve_rules(instance, detectors):
    rules = []
    for det in detectors:
        rules.append(make_rule(det, instance) if isinstance(det, str) else det)
    return rules


def _chunk_counts(means, sigma, attacks, rules, seed, lo, hi, hypothesis):
    """Errors and ties per rule over trials [lo, hi)."""
    n = hi - lo
    n_hyp, d = means.shape
    if hypothesis is None:
        u = _k.trial_uniforms(seed, lo, n)
        truth = np.minimum((u * n_hyp).astype(np.int64), n_hyp - 1)
    else:
        truth = np.full(n, hypothesis, dtype=np.int64)
    noise = _k.trial_normals(seed, lo, n, d)
    x = means[truth] + attacks[truth] + sigma * noise
    out = []
    for rule in rules:
        choices, ties = rule.decide_batch(x)
        out.append((int(np.count_nonzero(choices != truth)),
                    int(np.count_nonzero(ties))))
    return out


def run_trials_multi(instance, attack, detectors, n_trials, master_seed,
                     threads=1, hypothesis=None, allow_over_budget=False):
    """Run the same trials against several decision rules at once.

    Sharing the hypothesis/noise/attack draws across rules makes paired
    comparisons tight and costs one noise generation instead of several.
    Returns one :class:`ErrorEstimate` per rule, in order.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    means, sigma, _ = _normalize(instance)
    n_hyp = means.shape[0]
    if hypothesis is not None and not 0 <= hypothesis < n_hyp:
        raise ValueError("hypothesis index out of range")
    attacks = _attack_table(instance, attack, n_hyp, allow_over_budget)
    rules = _resolve_rules(instance, detectors)
    ranges = [(lo, min(lo + CHUNK, n_trials))
              for lo in range(0, n_trials, CHUNK)]

    def work(rng):
        return _chunk_counts(means, sigma, attacks, rules, master_seed,
                             rng[0], rng[1], hypothesis)

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_chunk = list(pool.map(work, ranges))
    else:
        per_chunk = [work(r) for r in ranges]

    estimates = []
    for i in range(len(rules)):
        errors = sum(c[i][0] for c in per_chunk)
        ties = sum(c[i][1] for c in per_chunk)
        estimates.append(_estimate(errors, ties, n_trials, master_seed))
    return estimates


def run_trials(instance, attack, detector, n_trials, master_seed,
               threads=1, allow_over_budget=False):
    """Uniform-prior error estimate for one decision rule.

    Each trial draws the hypothesis uniformly, applies the
    hypothesis-aware attack, adds white Gaussian noise and decides.
    """
    return run_trials_multi(instance, attack, [detector], n_trials,
                            master_seed, threads=threads,
                            allow_over_budget=allow_over_budget)[0]


def run_conditional_trials(instance, hypothesis, attack, detector, n_trials,
                           master_seed, threads=1, allow_over_budget=False):
    """Error estimate with the true hypothesis held fixed.

    Uses the same noise streams as :func:`run_trials` (the hypothesis
    block is simply ignored), which makes conditional and unconditional
    runs directly comparable.
    """
    return run_trials_multi(instance, attack, [detector], n_trials,
                            master_seed, threads=threads,
                            hypothesis=hypothesis,
                            allow_over_budget=allow_over_budget)[0]


def sample_coordinate_costs(abs_mu, eps_des, eps_act, sigma, n, master_seed):
    """Yield (C, Y) chunk pairs for one coordinate under H0 and the sign
    attack at eps_act.

    C and Y are evaluated on a shared noise sample:

        C = g(2 abs_mu + N - eps_act)^2 - g(N - eps_act)^2   (g at eps_des)
        Y = 1{N >= -t}(t + N)^2 - N^2,   t = 2(abs_mu - eps_des)

    C >= Y holds pointwise when eps_act == eps_des; on the branches where
    the two sides are equal in exact arithmetic (e.g. N < 0) the computed
    values differ by rounding ulps, so comparisons need representation
    slack.  Draw i comes from stream (master_seed, i // SCALAR_BLOCK), so
    any prefix is reproducible independently of chunking.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if abs_mu < 0 or eps_des < 0 or eps_act < 0 or not sigma > 0:
        raise ValueError("need abs_mu, eps_des, eps_act >= 0 and sigma > 0")
    t = 2.0 * (abs_mu - eps_des)
    for start in range(0, n, SCALAR_BLOCK):
        count = min(SCALAR_BLOCK, n - start)
        z = _k.standard_normals(master_seed, start // SCALAR_BLOCK, count)
        noise = sigma * z
        lead = soft_threshold(2.0 * abs_mu + noise - eps_act, eps_des)
        lag = soft_threshold(noise - eps_act, eps_des)
        c = lead * lead - lag * lag
        shifted = t + noise
        y = np.where(noise >= -t, shifted * shifted, 0.0) - noise * noise
        yield c, y


def streaming_moments(chunks):
    """(count, mean, variance) over an iterable of 1-D arrays.

    Chunks merge via the pairwise update of (count, mean, M2), so the
    result is deterministic for a fixed chunking.
    """
    count = 0
    mean = 0.0
    m2 = 0.0
    for chunk in chunks:
        k = chunk.size
        if k == 0:
            continue
        cmean = float(chunk.mean())
        cm2 = float(((chunk - cmean) ** 2).sum())
        delta = cmean - mean
        total = count + k
        mean += delta * k / total
        m2 += cm2 + delta * delta * count * k / total
        count = total
    if count == 0:
        raise ValueError("no samples")
    return count, mean, m2 / count
