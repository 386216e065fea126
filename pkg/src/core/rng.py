"""Named random sub-streams derived from one run seed."""

from hashlib import sha256

import numpy as np

STREAMS: tuple[str, ...] = (
    'network',
    'mining',
    'sortition',
    'workload',
    'randshare',
    'adversary',
)


def stream_key(name: str) -> int:
    return int.from_bytes(sha256(name.encode('utf-8')).digest()[:4], 'big')


def substream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """
    Derive an independent generator for a named purpose.

    The same (seed, name, extra) always yields the same stream, and distinct
    names never share state, so adding draws to one stream leaves the others
    untouched.

    Args:
        seed: The run seed (unsigned 64-bit).
        name: Stream name, e.g. 'network' or 'mining'.
        extra: Further integers mixed into the spawn key (node id, run index).

    Returns:
        A numpy Generator seeded from the derived SeedSequence.
    """
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(stream_key(name), *extra)
    )
    return np.random.default_rng(sequence)
