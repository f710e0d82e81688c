"""numpy implementation of the hot kernels.

Two things live here: a counter-based random number generator (Philox-4x64-10,
bit-compatible with numpy's reference implementation) mapped to Gaussian
variates through the inverse normal CDF, and the batched soft-threshold cost
evaluation used by the detectors.  The compiled backend (`_fastkern`) exports
the same functions with identical numerical results for the random streams;
cost sums may differ by rounding only.

Streams are keyed by (master_seed, stream_index).  Within a stream, output
j comes from counter block ``j // 4``, lane ``j % 4``, so any slice of a
stream can be generated independently of execution order or worker count.
"""

import numpy as np
from scipy.special import ndtri

BACKEND_NAME = "python"

# Philox-4x64 round constants (Random123 reference values).
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

# Reserved counter block per trial stream: block 0 carries the hypothesis
# draw, noise lanes start at block 1.
TRIAL_NOISE_BLOCK_OFFSET = 1


def _mulhilo(a, b):
    """Full 64x64 -> 128 bit product as (high, low) uint64 words."""
    lo = a * b
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    t = a_lo * b_lo
    w = a_hi * b_lo + (t >> _S32)
    x = a_lo * b_hi + (w & _MASK32)
    hi = a_hi * b_hi + (w >> _S32) + (x >> _S32)
    return hi, lo


def philox4x64(key0, key1, ctr0):
    """10-round Philox-4x64 on counter (ctr0, 0, 0, 0).

    All arguments are broadcast-compatible uint64 arrays; returns an
    array of shape ``broadcast + (4,)`` with the four output words.
    """
    key0, key1, ctr0 = np.broadcast_arrays(
        np.asarray(key0, dtype=np.uint64),
        np.asarray(key1, dtype=np.uint64),
        np.asarray(ctr0, dtype=np.uint64),
    )
    k0 = key0.copy()
    k1 = key1.copy()
    x0 = ctr0.copy()
    x1 = np.zeros_like(x0)
    x2 = np.zeros_like(x0)
    x3 = np.zeros_like(x0)
    for _ in range(10):
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return np.stack([x0, x1, x2, x3], axis=-1)


def _bits_to_uniform(bits):
    # 53-bit mantissa, shifted into the open interval (0, 1) so that the
    # inverse CDF below never produces an infinity.
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def standard_normals(master_seed, stream_index, n, start=0):
    """``n`` standard normal variates from one stream, lanes [start, start+n)."""
    if n < 1:
        raise ValueError("need at least one variate")
    b0 = start // 4
    b1 = (start + n - 1) // 4
    blocks = np.arange(b0, b1 + 1, dtype=np.uint64)
    key0 = np.uint64(master_seed)
    key1 = np.uint64(stream_index)
    bits = philox4x64(key0, key1, blocks).reshape(-1)
    u = _bits_to_uniform(bits[start - 4 * b0: start - 4 * b0 + n])
    return ndtri(u)


def trial_normals(master_seed, trial_start, n_trials, d):
    """(n_trials, d) standard normals; row i uses stream trial_start + i."""
    if n_trials < 1 or d < 1:
        raise ValueError("need n_trials >= 1 and d >= 1")
    nb = (d + 3) // 4
    trials = np.arange(trial_start, trial_start + n_trials, dtype=np.uint64)
    blocks = np.arange(TRIAL_NOISE_BLOCK_OFFSET, TRIAL_NOISE_BLOCK_OFFSET + nb,
                       dtype=np.uint64)
    bits = philox4x64(np.uint64(master_seed),
                      trials[:, None], blocks[None, :])
    u = _bits_to_uniform(bits.reshape(n_trials, 4 * nb)[:, :d])
    return ndtri(u)


def trial_uniforms(master_seed, trial_start, n_trials):
    """One uniform (0,1) per trial from the reserved counter block 0."""
    if n_trials < 1:
        raise ValueError("need n_trials >= 1")
    trials = np.arange(trial_start, trial_start + n_trials, dtype=np.uint64)
    bits = philox4x64(np.uint64(master_seed), trials, np.uint64(0))
    return _bits_to_uniform(bits[..., 0])


def glrt_costs(x, means, eps):
    """Soft-threshold residual costs, one per (row of x, hypothesis).

    x is (B, d), means is (K, d); returns (B, K) with
    ``out[b, k] = sum_i max(|x[b,i] - means[k,i]| - eps, 0)^2``.
    """
    diff = np.abs(x[:, None, :] - means[None, :, :])
    np.subtract(diff, eps, out=diff)
    np.maximum(diff, 0.0, out=diff)
    np.square(diff, out=diff)
    return diff.sum(axis=2)
