import numpy as np


def derive_seed(seed, *keys) -> int:
    """Deterministic child seed for ``(seed, *keys)``."""
    words = [int(seed)] + [int(k) for k in keys]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
