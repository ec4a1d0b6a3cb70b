from numpy import ascontiguousarray, float64, random
from numpy.linalg import norm

from .core import minmax_jit


def unit_vectors_chunk(dim, size, seed, chunk_index):
    """Uniform unit vectors from normalized Gaussians.

    Chunk i always draws from SeedSequence(seed, spawn_key=(i,)), so a sample
    stream is reproducible for any worker count and a shorter stream is a
    prefix of a longer one.
    """
    rng = random.default_rng(random.SeedSequence(seed, spawn_key=(chunk_index,)))
    units = rng.standard_normal((size, dim))
    norms = norm(units, axis=1)
    keep = norms > 0.0
    return units[keep] / norms[keep, None]


def minmax(units, directions):
    """min over rows u of max_j u . d_j"""
    units = ascontiguousarray(units, dtype=float64)
    directions = ascontiguousarray(directions, dtype=float64)
    return float(minmax_jit(units, directions))
