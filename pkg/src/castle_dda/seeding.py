"""Deterministic random streams.

Every stream is a ``numpy.random.Generator`` over the PCG64 bit generator,
seeded by ``numpy.random.SeedSequence(entropy=master_seed, spawn_key=key)``.
Keys are integer tuples whose first element names the stream family:

    (0, agent_index)                                  agent skill draw
    (1, agent_index, condition_index, game_index)     one game

This derivation is part of the file-format contract: changing it changes
every trace, so bump ``FORMAT_VERSION`` in :mod:`castle_dda.serialize` if
it ever has to change.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(entropy=master_seed, spawn_key=key)"

AGENT_STREAM = 0
GAME_STREAM = 1

MAX_SEED = 2**64 - 1


def check_seed(master_seed: int) -> int:
    if isinstance(master_seed, bool) or not isinstance(master_seed, int):
        raise TypeError("master_seed must be an int")
    if not 0 <= master_seed <= MAX_SEED:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    return master_seed


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    check_seed(master_seed)
    if any(k < 0 for k in key):
        raise ValueError("stream labels must be non-negative")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def agent_rng(master_seed: int, agent_index: int) -> np.random.Generator:
    return derive_rng(master_seed, AGENT_STREAM, agent_index)


def game_rng(
    master_seed: int, agent_index: int, condition_index: int, game_index: int
) -> np.random.Generator:
    return derive_rng(master_seed, GAME_STREAM, agent_index, condition_index, game_index)
