"""Decision rules: matched filter, minimax linear rule, and the GLRT.

The GLRT jointly estimates the hypothesis and the perturbation: the
perturbation estimate under hypothesis k is the l-inf ball projection of
the residual X - mu_k (a separable clamp), and plugging it back in leaves
the soft-threshold cost ``||soft_threshold(X - mu_k, eps)||^2``.  The
minimax rule for the binary symmetric model is linear with weights
``soft_threshold(mu, eps)``; the clean (undefended) rule uses weights mu.

Tie-breaking is deterministic toward the lower hypothesis index.  In the
symmetric binary model with equal priors this leaves the averaged error
probability unchanged versus randomized tie-breaking.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .backend import kernels as _k
from .kernels import clamp_complement, soft_threshold

TIE_TOL = 1e-12  # two costs within this of each other count as tied


@dataclass(frozen=True)
class Decision:
    """Outcome of one decision: chosen index, tie flag, and the full cost
    vector (GLRT) or scalar statistic (linear rules) for post-hoc analysis."""

    chosen: int
    tie: bool
    costs: Optional[np.ndarray] = None
    statistic: Optional[float] = None


@dataclass(frozen=True)
class LinearDetector:
    """Binary rule: decide H0 when weights @ x > 0, H1 when < 0.

    An exact zero is a tie and resolves to H0.  All-zero weights are legal
    (every coordinate shrunk away): the rule then always declares H0.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite 1-D vector")
        object.__setattr__(self, "weights", w)

    @property
    def degenerate(self):
        return bool(np.all(self.weights == 0.0))


def estimate_perturbation(x, mu_k, eps):
    """Most plausible perturbation under hypothesis k: the residual
    x - mu_k clamped coordinate-wise to [-eps, eps].

    This is the exact minimizer of ||x - mu_k - e||^2 over the l-inf ball
    of radius eps (the projection is separable).
    """
    x = np.asarray(x, dtype=np.float64)
    mu_k = np.asarray(mu_k, dtype=np.float64)
    if x.shape != mu_k.shape:
        raise ValueError("dimension mismatch between observation and mean")
    return clamp_complement(x - mu_k, eps)


def glrt_costs(x, means, eps):
    """Per-hypothesis GLRT costs ||soft_threshold(x - mu_k, eps)||^2.

    Equal (to rounding) to the plug-in residual ||x - mu_k - e_hat_k||^2
    with e_hat_k from :func:`estimate_perturbation`.
    """
    x = np.asarray(x, dtype=np.float64)
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    if means.shape[1] != x.size:
        raise ValueError("dimension mismatch between observation and means")
    return _k.glrt_costs(x[None, :], means, eps)[0]


def glrt_decide(x, means, eps):
    """argmin_k of the GLRT costs, ties broken toward the lower index."""
    costs = glrt_costs(x, means, eps)
    chosen = int(np.argmin(costs))
    second = np.partition(costs, 1)[1] if costs.size > 1 else np.inf
    tie = bool(second - costs[chosen] <= TIE_TOL)
    return Decision(chosen=chosen, tie=tie, costs=costs)


def minimax_weights(mu, eps):
    """Minimax linear rule for the binary symmetric model: weights
    soft_threshold(mu, eps).  Coordinates whose sign the budget can flip
    are dropped; the rest are shrunk."""
    return LinearDetector(weights=soft_threshold(np.asarray(mu, dtype=np.float64), eps))


def clean_weights(mu):
    """Undefended matched filter: weights equal to the template."""
    return LinearDetector(weights=np.asarray(mu, dtype=np.float64))


def linear_decide(x, detector):
    """Evaluate a binary linear rule; exact zero is a tie resolved to H0."""
    x = np.asarray(x, dtype=np.float64)
    w = detector.weights
    if x.shape != w.shape:
        raise ValueError("dimension mismatch between observation and weights")
    stat = float(w @ x)
    if stat > 0.0:
        return Decision(chosen=0, tie=False, statistic=stat)
    if stat < 0.0:
        return Decision(chosen=1, tie=False, statistic=stat)
    return Decision(chosen=0, tie=True, statistic=stat)


class GlrtRule:
    """Batch GLRT rule over a fixed set of means, for the trial engine."""

    name = "glrt"

    def __init__(self, means, eps):
        self.means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        self.eps = float(eps)

    def decide_batch(self, x):
        """(choices, ties) over the rows of x."""
        costs = _k.glrt_costs(x, self.means, self.eps)
        choices = np.argmin(costs, axis=1)
        if costs.shape[1] == 2:
            ties = np.abs(costs[:, 1] - costs[:, 0]) <= TIE_TOL
        else:
            part = np.partition(costs, 1, axis=1)
            ties = part[:, 1] - part[:, 0] <= TIE_TOL
        return choices.astype(np.int64), ties


class LinearRule:
    """Batch binary linear rule for the trial engine."""

    def __init__(self, detector, name):
        self.detector = detector
        self.name = name

    def decide_batch(self, x):
        stat = x @ self.detector.weights
        choices = (stat < 0.0).astype(np.int64)
        ties = stat == 0.0
        return choices, ties


def make_rule(name, instance):
    """Build a batch rule ('clean' | 'minimax' | 'glrt') for an instance.

    The linear rules need the binary symmetric model; the GLRT applies to
    any instance.
    """
    from .model import BinaryInstance  # local import to avoid a cycle

    if name == "glrt":
        if isinstance(instance, BinaryInstance):
            means = np.stack([instance.mu, -instance.mu])
        else:
            means = np.stack(instance.means)
        return GlrtRule(means, instance.eps_des)
    if not isinstance(instance, BinaryInstance):
        raise ValueError(f"{name!r} detector needs a binary symmetric instance")
    if name == "clean":
        return LinearRule(clean_weights(instance.mu), "clean")
    if name == "minimax":
        return LinearRule(minimax_weights(instance.mu, instance.eps_des), "minimax")
    raise ValueError(f"unknown detector {name!r}")
