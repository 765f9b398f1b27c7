"""Seedable counter-based random streams.

Every stream is a :class:`numpy.random.Generator` over the Philox4x64
counter-based bit generator. Streams are split with
:meth:`numpy.random.SeedSequence.spawn`:

* ``chain_streams(seed, n)`` gives one child per chain, indexed by chain number;
* within a chain, :func:`split_chain` derives an ``init`` stream (initial point)
  and a ``transition`` stream (lazy coin, oracle draw, accept/reject, in that
  order within every step).

The same seed therefore reproduces every chain bit for bit regardless of how
many chains run or in which order they are scheduled.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


def make_stream(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


class ChainStreams(NamedTuple):
    init: np.random.Generator
    transition: np.random.Generator


def split_chain(seq: np.random.SeedSequence) -> ChainStreams:
    init_seq, trans_seq = seq.spawn(2)
    return ChainStreams(make_stream(init_seq), make_stream(trans_seq))


def chain_streams(seed: int, n_chains: int) -> list:
    """Per-chain :class:`ChainStreams` for chains ``0..n_chains-1``."""
    root = np.random.SeedSequence(int(seed))
    return [split_chain(child) for child in root.spawn(n_chains)]
