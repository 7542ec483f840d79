"""Counter-based random streams.

Every stream is a Philox generator keyed by SeedSequence([seed, stream]), so
replicate r of master seed s draws the same numbers regardless of which
worker runs it or in what order.
"""

import numpy as np

# Stream id reserved for pilot trajectories (never a replicate id in practice).
PILOT_STREAM = 2**31 - 1

MAX_SEED = 2**64 - 1


def make_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for stream `stream` of master seed `seed`."""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if stream < 0:
        raise ValueError(f"stream id must be nonnegative, got {stream}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def entropy_seed() -> int:
    """Fresh 64-bit seed drawn from OS entropy."""
    return int(np.random.SeedSequence().entropy) & MAX_SEED
