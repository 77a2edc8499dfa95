"""Deterministic random substreams.

Replicates are processed in fixed-size blocks; block ``b`` of stream ``s``
draws from ``SeedSequence([seed, s, b])``. The block size does not depend on
the worker count, so output is bit-identical for any ``workers``.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 2048


def check_seed(seed):
    if seed is None or isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def block_rng(seed, stream, block):
    return np.random.default_rng(np.random.SeedSequence([check_seed(seed), stream, block]))


def map_blocks(fn, total, seed, stream=0, workers=1):
    """Call ``fn(rng, start, size)`` for each block; return results in block order."""
    check_seed(seed)
    jobs = [
        (b, start, min(BLOCK_SIZE, total - start))
        for b, start in enumerate(range(0, total, BLOCK_SIZE))
    ]

    def run(job):
        b, start, size = job
        return fn(block_rng(seed, stream, b), start, size)

    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
