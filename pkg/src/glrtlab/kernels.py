"""Scalar/vector math shared by every module.

The two nonlinearities here are the workhorses of the whole package:
``soft_threshold`` (a double-sided ReLU with dead zone ``[-eps, eps]``)
and its complement ``clamp_complement`` (projection of a scalar onto
``[-eps, eps]``).  They satisfy, exactly in floating point,

    soft_threshold(x, eps) + clamp_complement(x, eps) == x

because the complement is literally computed as the difference.

Gaussian sampling is counter-based: a :class:`RandomStream` names a
(master_seed, stream_index) pair and always yields the same sequence, no
matter how work is sharded across workers.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .backend import kernels as _k

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _check_eps(eps):
    if not np.isscalar(eps) and np.ndim(eps) != 0:
        raise ValueError("eps must be a scalar")
    if not math.isfinite(eps) or eps < 0:
        raise ValueError(f"eps must be finite and >= 0, got {eps!r}")


def soft_threshold(x, eps):
    """sign(x) * max(0, |x| - eps), elementwise.

    Odd in x, shrinks toward zero, and kills the dead zone |x| <= eps.
    sign(0) is taken as 0.  eps < 0 is rejected.
    """
    _check_eps(eps)
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.maximum(np.abs(x) - eps, 0.0)
    return float(out) if out.ndim == 0 else out


def clamp_complement(x, eps):
    """x - soft_threshold(x, eps): x clipped to [-eps, eps], elementwise.

    Computed as the literal difference so that the identity
    ``soft_threshold + clamp_complement == x`` holds bit-exactly; the
    result can exceed eps by at most one rounding ulp of x.
    """
    _check_eps(eps)
    x = np.asarray(x, dtype=np.float64)
    out = x - soft_threshold(x, eps)
    return float(out) if out.ndim == 0 else out


def q_function(x):
    """Complementary standard normal CDF via the complementary error function."""
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * erfc(x / _SQRT2)
    return float(out) if out.ndim == 0 else out


def std_normal_pdf(x):
    """Standard normal density exp(-x^2/2) / sqrt(2 pi)."""
    x = np.asarray(x, dtype=np.float64)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RandomStream:
    """Name of one deterministic Gaussian stream.

    Identical (master_seed, stream_index) pairs yield identical sequences
    on every backend and at any worker count.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for field in ("master_seed", "stream_index"):
            v = getattr(self, field)
            if not 0 <= int(v) < 2 ** 64:
                raise ValueError(f"{field} must fit in an unsigned 64-bit value")


def sample_gaussian_vector(stream, d, sigma):
    """d independent N(0, sigma^2) draws, deterministic given the stream."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (sigma > 0) or not math.isfinite(sigma):
        raise ValueError("sigma must be finite and > 0")
    z = _k.standard_normals(stream.master_seed, stream.stream_index, d)
    return sigma * z
