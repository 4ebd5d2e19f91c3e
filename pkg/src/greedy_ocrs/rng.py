"""Counter-based random streams.

Every stream is a Philox4x64 generator keyed by ``(seed, stream_id)``; the
high counter word holds a block index.  A draw is therefore a pure function
of (seed, stream id, block, position in block), which is what lets trial
ranges be simulated on any number of workers with bit-identical results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# stream ids used by the library; callers may use any other non-negative id
STREAM_SIMULATION = 1
STREAM_ALPHA = 2
STREAM_INSTANCES = 3
STREAM_VERIFY = 4


def stream(seed: int, stream_id: int = 0, block: int = 0) -> np.random.Generator:
    if seed < 0 or stream_id < 0 or block < 0:
        raise ValueError("seed, stream_id and block must be non-negative")
    key = (seed & _MASK64) | ((stream_id & _MASK64) << 64)
    counter = np.array([0, 0, 0, block & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
