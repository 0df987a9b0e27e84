"""Seed derivation and chunked Monte Carlo reduction.

All randomness comes from numpy's Philox4x64 counter-based generator.  A
(seed, stream, chunk) triple is hashed with BLAKE2b into the 128-bit Philox
key, so every chunk of every module gets an independent, reproducible
stream no matter which thread runs it.
"""
import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1


def derive_key(seed, stream, chunk=0):
    payload = f"{int(seed) & SEED_MASK}:{stream}:{int(chunk)}".encode()
    digest = hashlib.blake2b(payload, digest_size=16).digest()
    return int.from_bytes(digest, "little")


def derive_rng(seed, stream, chunk=0):
    """Generator for one (seed, stream, chunk) triple."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, stream, chunk)))


def max_threads():
    try:
        n = int(os.environ.get("QMEAS_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def chunk_sizes(n, chunk=CHUNK_SIZE):
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, n, seed, stream, chunk=CHUNK_SIZE):
    """Run ``fn(rng, size)`` over consecutive chunks, results in chunk order."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(derive_rng(seed, stream, i), size) for i, size in enumerate(sizes)]
    threads = min(max_threads(), len(jobs))
    if threads <= 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def reduce_chunks(fn, n, seed, stream, chunk=CHUNK_SIZE):
    """Sum the tuples ``fn(rng, size)`` returns, chunk by chunk in order."""
    total = None
    for parts in map_chunks(fn, n, seed, stream, chunk):
        parts = [np.asarray(x, dtype=float) for x in parts]
        total = parts if total is None else [t + x for t, x in zip(total, parts)]
    return total


def moments(block):
    """Per-column sum and sum of squares of a ``(size, k)`` block."""
    block = np.asarray(block, dtype=float)
    return block.sum(axis=0), (block * block).sum(axis=0)


def mean_stderr(total, total_sq, n):
    mean = total / n
    var = np.maximum(total_sq / n - mean * mean, 0.0)
    return mean, np.sqrt(var / max(n - 1, 1))


def mc_mean(fn, n, seed, stream, chunk=CHUNK_SIZE):
    """Mean and standard error of per-sample statistics.

    ``fn(rng, size)`` returns an array of shape ``(size, k)``.  Sums and
    sums of squares are combined in chunk order, so the result does not
    depend on the thread count.
    """
    total, total_sq = reduce_chunks(lambda rng, size: moments(fn(rng, size)), n, seed, stream, chunk)
    return mean_stderr(total, total_sq, n)
