"""Seeded replicate streams and the process pool that runs them.

Replicate ``i`` of a series always draws from the Philox stream keyed by
SeedSequence([master_seed, *stream, i]), so results do not depend on how replicates
are spread over workers. Normal variates come from numpy's ziggurat ``standard_normal``.
"""
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .exceptions import ReplicateError

logger = logging.getLogger(__name__)

_TASK = None


def replicate_rng(master_seed, index, stream=()):
    entropy = [int(master_seed), *(int(s) for s in stream), int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def make_rng(seed):
    """Accept an int, a (master_seed, index) pair or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return replicate_rng(*seed)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _install(task):
    global _TASK
    _TASK = task


def _run_chunk(task, start, stop, master_seed, stream):
    results = []
    for index in range(start, stop):
        try:
            results.append(task(index, replicate_rng(master_seed, index, stream)))
        except Exception as e:  # reported with the completed prefix
            return results, (index, f'{type(e).__name__}: {e}')
    return results, None


def _pooled_chunk(start, stop, master_seed, stream):
    return _run_chunk(_TASK, start, stop, master_seed, stream)


def chunk_bounds(replicates, workers):
    size = max(1, -(-replicates // (4 * workers)))
    return [(start, min(start + size, replicates)) for start in range(0, replicates, size)]


def run_replicates(task, replicates, master_seed, workers=1, stream=()):
    """Evaluate ``task(index, rng)`` for every replicate index, returned in index order.

    ``task`` must be picklable when ``workers > 1``. A failing replicate raises
    ReplicateError carrying the results of all earlier indices.
    """
    if replicates < 1:
        return []
    stream = tuple(stream)
    chunks = chunk_bounds(replicates, workers)
    if workers <= 1:
        outcomes = []
        for start, stop in chunks:
            outcomes.append(_run_chunk(task, start, stop, master_seed, stream))
            if outcomes[-1][1] is not None:
                break
    else:
        logger.debug('Running %d replicates over %d workers in %d chunks', replicates, workers, len(chunks))
        with ProcessPoolExecutor(max_workers=workers, initializer=_install, initargs=(task,)) as pool:
            futures = [pool.submit(_pooled_chunk, start, stop, master_seed, stream) for start, stop in chunks]
            outcomes = [future.result() for future in futures]

    results = []
    for chunk_results, failure in outcomes:
        results.extend(chunk_results)
        if failure is not None:
            index, cause = failure
            logger.error('Replicate %d failed: %s', index, cause)
            raise ReplicateError(index, results, cause)
    return results
