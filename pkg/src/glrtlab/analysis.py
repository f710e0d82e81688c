"""Analytical error predictors for the binary symmetric model.

Conditioned on H0 and the sign attack at strength eps_act, the GLRT
decision statistic is a sum of independent per-coordinate cost
differences

    C = soft_threshold(2|mu| + N - eps_act, eps_des)^2
        - soft_threshold(N - eps_act, eps_des)^2,      N ~ N(0, sigma^2).

Exact first and second moments of C come from deterministic piecewise
Gauss-Legendre quadrature against the Gaussian density
(:func:`coordinate_cost_moments`); a Gaussian approximation of the sum
then estimates the error probability (:func:`clt_error_probability`).

When the attack runs at the full design budget, C is bounded below
pointwise by

    Y = 1{N >= -t} (t + N)^2 - N^2,        t = 2(|mu| - eps),

whose moments have closed forms (:func:`bound_variable_moments`),
yielding a fast upper estimate of the same error probability.

Linear rules need no approximation: their statistics are exactly
Gaussian (:func:`linear_error_closed_form`).
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .kernels import q_function, soft_threshold, std_normal_pdf

QUAD_TOL = 1e-10     # absolute tolerance for the cost-difference moments
QUAD_RANGE = 10.0    # integration range in noise standard deviations


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the achieved tolerance."""

    def __init__(self, achieved, requested=QUAD_TOL):
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"quadrature reached absolute tolerance {achieved:.3e} "
            f"(requested {requested:.3e})"
        )


@dataclass(frozen=True)
class CoordinateMoments:
    """Mean and variance of one coordinate's cost difference."""

    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean) or not math.isfinite(self.variance):
            raise ValueError("moments must be finite")
        if self.variance < 0:
            raise ValueError("variance must be >= 0")


@dataclass(frozen=True)
class BoundVariableParams:
    """Parameters of the lower-bounding variable: t = 2(|mu| - eps), sigma."""

    t: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite and > 0")
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")


def bound_variable_moments(t, sigma):
    """Closed-form moments of Y = 1{N >= -t}(t + N)^2 - N^2, N ~ N(0, sigma^2).

    Limits: t -> -inf gives (-sigma^2, 2 sigma^4) (Y ~ -N^2); t -> +inf
    gives mean -> t^2 and variance -> 4 t^2 sigma^2 (Y ~ t^2 + 2Nt).
    """
    if not (sigma > 0):
        raise ValueError("sigma must be > 0")
    r = t / sigma
    q = q_function(-r)
    phi = std_normal_pdf(r)
    s2 = sigma * sigma
    mean = q * (t * t + s2) - s2 + sigma * t * phi
    second = (3.0 * s2 * s2
              + q * (t ** 4 + 4.0 * t * t * s2 - 3.0 * s2 * s2)
              + sigma * t * phi * (t * t + 3.0 * s2))
    variance = max(second - mean * mean, 0.0)
    return CoordinateMoments(mean=mean, variance=variance)


def _gauss_cells(sigma, eps_des, eps_act, abs_mu):
    """Integration cells: [-10 sigma, 10 sigma] split at the dead-zone
    breakpoints of the two soft thresholds, then refined to <= sigma width."""
    lo, hi = -QUAD_RANGE * sigma, QUAD_RANGE * sigma
    knots = {lo, hi}
    for b in (eps_act + eps_des, eps_act - eps_des,
              eps_act - 2.0 * abs_mu + eps_des, eps_act - 2.0 * abs_mu - eps_des):
        if lo < b < hi:
            knots.add(b)
    knots = sorted(knots)
    edges = []
    for left, right in zip(knots[:-1], knots[1:]):
        pieces = max(1, int(math.ceil((right - left) / sigma)))
        edges.append(np.linspace(left, right, pieces + 1))
    return edges


def _cost_difference(n, abs_mu, eps_des, eps_act):
    """h(n) = g(2|mu| + n - eps_act)^2 - g(n - eps_act)^2 with g at eps_des."""
    lead = soft_threshold(2.0 * abs_mu + n - eps_act, eps_des)
    lag = soft_threshold(n - eps_act, eps_des)
    return lead * lead - lag * lag


def _moment_pass(order, cells, abs_mu, eps_des, eps_act, sigma):
    nodes, weights = leggauss(order)
    m1 = 0.0
    m2 = 0.0
    inv = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    for edges in cells:
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        # all quadrature nodes of this smooth piece at once
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        w = half[:, None] * weights[None, :]
        h = _cost_difference(pts, abs_mu, eps_des, eps_act)
        dens = inv * np.exp(-0.5 * (pts / sigma) ** 2)
        m1 += float(np.sum(w * h * dens))
        m2 += float(np.sum(w * h * h * dens))
    return m1, m2


def coordinate_cost_moments(abs_mu, eps_des, eps_act, sigma):
    """Exact moments of the per-coordinate cost difference by quadrature.

    The integrand is piecewise smooth; cells are split at the dead-zone
    breakpoints, so Gauss-Legendre converges fast.  A doubled-order pass
    estimates the achieved tolerance; disagreement beyond QUAD_TOL raises
    :class:`QuadratureError`.
    """
    if not (sigma > 0):
        raise ValueError("sigma must be > 0")
    if eps_des < 0 or eps_act < 0:
        raise ValueError("eps_des and eps_act must be >= 0")
    if abs_mu < 0:
        raise ValueError("abs_mu must be >= 0 (the analysis is symmetric in "
                         "the sign of mu)")
    cells = _gauss_cells(sigma, eps_des, eps_act, abs_mu)
    m1a, m2a = _moment_pass(24, cells, abs_mu, eps_des, eps_act, sigma)
    m1b, m2b = _moment_pass(48, cells, abs_mu, eps_des, eps_act, sigma)
    achieved = max(abs(m1a - m1b), abs(m2a - m2b))
    if achieved > QUAD_TOL:
        raise QuadratureError(achieved)
    variance = m2b - m1b * m1b
    if variance < -QUAD_TOL:
        raise QuadratureError(abs(variance))
    return CoordinateMoments(mean=m1b, variance=max(variance, 0.0))


def clt_error_probability(moments):
    """Gaussian estimate of P(sum of cost differences < 0).

    Signed form: a negative aggregate mean yields a value above one half
    (strong attacks, weak signals).  All-zero variance degenerates to the
    deterministic limit 0 or 1 by the sign of the mean (0.5 at exactly 0).
    """
    moments = list(moments)
    if not moments:
        raise ValueError("need at least one coordinate")
    mean = sum(m.mean for m in moments)
    var = sum(m.variance for m in moments)
    if var == 0.0:
        return 0.5 if mean == 0.0 else (0.0 if mean > 0.0 else 1.0)
    return q_function(mean / math.sqrt(var))


def clt_error_upper_bound(params):
    """Gaussian estimate over the lower-bounding variables: an upper
    estimate of the GLRT error at the full-budget sign attack."""
    return clt_error_probability(
        bound_variable_moments(p.t, p.sigma) for p in params
    )


def minimax_snr(d, p, a, k, eps_des, sigma):
    """Effective SNR of the minimax rule on the two-level template under a
    sign attack at strength k*eps_des: (a - k)^2 d p (eps_des / sigma)^2.

    Assumes a > 1 >= b so that only the strong block is retained; the
    predicted error is q_function(sqrt(snr)).
    """
    if not (a > 1.0):
        raise ValueError("template needs a > 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return (a - k) ** 2 * d * p * (eps_des / sigma) ** 2


def glrt_snr(d, p, moments_a, moments_b):
    """Effective SNR of the GLRT on the two-level template:
    d (p m_a + (1-p) m_b)^2 / (p v_a + (1-p) v_b).

    Feed moments from :func:`coordinate_cost_moments` at |mu| = a*eps_des
    and b*eps_des.  The predicted error is q_function(sqrt(snr)) when the
    aggregate mean is positive; use the signed form otherwise.
    """
    mean = p * moments_a.mean + (1.0 - p) * moments_b.mean
    var = p * moments_a.variance + (1.0 - p) * moments_b.variance
    if var <= 0.0:
        raise ValueError("aggregate variance must be positive")
    return d * mean * mean / var


def two_level_glrt_prediction(d, p, moments_a, moments_b):
    """Signed-form predicted GLRT error on the two-level template."""
    mean = p * moments_a.mean + (1.0 - p) * moments_b.mean
    snr = glrt_snr(d, p, moments_a, moments_b)
    return q_function(math.copysign(math.sqrt(snr), mean))


def linear_error_closed_form(weights, mu, eps_act, sigma):
    """Exact error of a binary linear rule under the sign attack.

    The statistic w.X is Gaussian; under H0 with attack -eps*sign(mu) its
    mean is w.mu - eps * sum_i w_i sign(mu_i), so the error is
    Q(mean / (sigma ||w||)).  Degenerate all-zero weights give 0.5.
    """
    w = np.asarray(weights, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if w.shape != mu.shape:
        raise ValueError("dimension mismatch between weights and template")
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        return 0.5
    mean = float(w @ mu) - eps_act * float(w @ np.sign(mu))
    return q_function(mean / (sigma * norm))


def clean_error_closed_form(mu, eps_act, sigma):
    """Exact error of the undefended matched filter under the sign attack:
    Q((||mu||^2 - eps ||mu||_1) / (sigma ||mu||)).  Equals one half exactly
    at eps = ||mu||^2 / ||mu||_1."""
    mu = np.asarray(mu, dtype=np.float64)
    if not np.any(mu != 0.0):
        raise ValueError("mu must be nonzero")
    return linear_error_closed_form(mu, mu, eps_act, sigma)


def minimax_error_closed_form(mu, eps_des, eps_act, sigma):
    """Exact error of the minimax rule under the sign attack at eps_act."""
    mu = np.asarray(mu, dtype=np.float64)
    return linear_error_closed_form(soft_threshold(mu, eps_des), mu,
                                    eps_act, sigma)
