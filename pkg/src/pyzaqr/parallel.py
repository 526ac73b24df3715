# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines seeded replicate streams and their fan-out over worker processes.

Replicate ``b`` of stream ``s`` always draws from
``SeedSequence(seed, spawn_key=(s, b))``, so results do not depend on the
number of workers or on the order in which replicates finish.
"""

import functools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

#: int: stream of the envelope replicates
ENVELOPE_STREAM = 1

#: int: stream of the simulation replicates
SIMULATION_STREAM = 2

#: int: stream of the fixed simulation covariates
COVARIATE_STREAM = 3

#: int: largest accepted seed
SEED_MAX = 2 ** 64 - 1


def parse_seed(text: str) -> int:
    """Exact unsigned 64-bit seed from decimal, hex or octal text."""
    try:
        value = int(str(text).strip(), 0)
    except ValueError:
        raise ValueError(f'invalid seed {text!r}') from None
    if not 0 <= value <= SEED_MAX:
        raise ValueError('seed must be an unsigned 64-bit integer')
    return value


def replicate_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Generator of one replicate; independent of every other replicate."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, index)))


def resolve_workers(workers: Optional[int]) -> int:
    """Worker count; ``None`` or 0 means one per CPU."""
    if not workers:
        return os.cpu_count() or 1
    return max(1, int(workers))


def _call(task, payload, seed, stream, index):
    return task(payload, index, replicate_rng(seed, index, stream))


def map_replicates(
    task: Callable[[Any, int, np.random.Generator], Any],
    payload: Any,
    reps: int,
    seed: int,
    stream: int,
    workers: Optional[int] = 1,
) -> List[Any]:
    """Run ``task(payload, index, rng)`` for ``index`` in ``range(reps)``.

    Results come back in index order. ``task`` and ``payload`` must be
    picklable when more than one worker is used.
    """
    workers = min(resolve_workers(workers), max(reps, 1))
    call = functools.partial(_call, task, payload, seed, stream)
    if workers == 1:
        return [call(index) for index in range(reps)]
    logger.debug('running %d replicates on %d workers', reps, workers)
    chunksize = max(1, reps // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(call, range(reps), chunksize=chunksize))
