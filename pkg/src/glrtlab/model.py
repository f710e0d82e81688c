"""Problem definition: hypothesis means, noise level and design budget.

The binary symmetric instance (means +mu / -mu) is the setting every
closed-form result in :mod:`glrtlab.analysis` applies to; the general
K-ary instance is supported by the GLRT decision rule and the Monte
Carlo engine with attack kind "none".
"""

import math
from dataclasses import dataclass, field

import numpy as np


def _as_vector(v, name="vector"):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """K-ary Gaussian test: X = means[k] + e + N, N ~ N(0, sigma^2 I_d)."""

    means: tuple
    sigma: float
    eps_des: float

    def __post_init__(self):
        means = tuple(_as_vector(m, "mean") for m in self.means)
        if len(means) < 2:
            raise ValueError("need at least two hypotheses")
        d = means[0].size
        if any(m.size != d for m in means):
            raise ValueError("all mean vectors must share the same length")
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite and > 0")
        if self.eps_des < 0 or not math.isfinite(self.eps_des):
            raise ValueError("eps_des must be finite and >= 0")
        object.__setattr__(self, "means", means)

    @property
    def n_hypotheses(self):
        return len(self.means)

    @property
    def dimension(self):
        return self.means[0].size


@dataclass(frozen=True)
class BinaryInstance:
    """Symmetric binary test with means +mu (H0) and -mu (H1)."""

    mu: np.ndarray
    sigma: float
    eps_des: float

    def __post_init__(self):
        object.__setattr__(self, "mu", _as_vector(self.mu, "mu"))
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite and > 0")
        if self.eps_des < 0 or not math.isfinite(self.eps_des):
            raise ValueError("eps_des must be finite and >= 0")

    @property
    def dimension(self):
        return self.mu.size

    def as_problem(self):
        return ProblemInstance(means=(self.mu, -self.mu),
                               sigma=self.sigma, eps_des=self.eps_des)


@dataclass(frozen=True)
class TwoLevelTemplate:
    """Two-level signal template: round(p*d) strong coordinates at
    a*eps_des, the remainder at b*eps_des.

    Rounding of p*d is half-up (recorded in experiment metadata).  The
    strong block comes first; every decision rule here is
    permutation-covariant, so the layout is just a stable convention.
    """

    d: int
    p: float
    a: float
    b: float
    eps_des: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not self.a > 1.0:
            raise ValueError("a must exceed 1")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        if not self.eps_des > 0:
            raise ValueError("eps_des must be > 0")

    @property
    def n_strong(self):
        # round-half-up; python round() would round halves to even
        return int(math.floor(self.p * self.d + 0.5))


def build_two_level_template(template):
    """Mean vector of the two-level template (strong block first)."""
    n_strong = template.n_strong
    mu = np.empty(template.d, dtype=np.float64)
    mu[:n_strong] = template.a * template.eps_des
    mu[n_strong:] = template.b * template.eps_des
    return mu


def vulnerability_threshold(mu):
    """||mu||_2^2 / ||mu||_1: the smallest sign-attack strength at which the
    undefended matched filter is wrong at least half the time."""
    mu = _as_vector(mu, "mu")
    l1 = np.abs(mu).sum()
    if l1 == 0.0:
        raise ValueError("mu must be nonzero")
    return float(mu @ mu / l1)
