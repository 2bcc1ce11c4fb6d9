"""Reproducible random streams.

Every Monte Carlo routine draws from a Philox (counter-based) generator keyed by
``SeedSequence(seed, spawn_key=(stream,))``.  Batches of paths are split into
chunks and chunk ``i`` always uses stream ``i``, so results depend only on
``(seed, chunk_size)`` and never on how the work is scheduled.  Gaussian
variates come from numpy's ziggurat sampler.
"""

from __future__ import annotations

import numpy as np

DEFAULT_CHUNK = 10_000


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for stream ``index`` of the 64-bit ``seed``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def chunks(total: int, size: int = DEFAULT_CHUNK):
    """Yield ``(stream_index, start, stop)`` covering ``range(total)``."""
    for i, start in enumerate(range(0, total, size)):
        yield i, start, min(start + size, total)


def quadratic_form_samples(weights, n_draws: int, seed: int, shift: float = 0.0,
                           chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Draws of ``shift + sum_k w_k xi_k^2`` with iid standard normal ``xi_k``."""
    w = np.asarray(weights, dtype=np.float64)
    out = np.empty(n_draws)
    for i, lo, hi in chunks(n_draws, chunk):
        xi = stream(seed, i).standard_normal((hi - lo, w.size))
        np.square(xi, out=xi)
        out[lo:hi] = xi @ w
    return out + shift
