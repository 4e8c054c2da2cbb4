"""Deterministic seed splitting.

Every random stage draws its generator from the root seed plus a tuple of
integer keys, so stages never share a stream and re-runs are reproducible.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def normalize_seed(seed):
    """Map any Python integer (negative included) onto the unsigned 64-bit range."""
    return int(seed) & _MASK64


def derive_seed(root, *keys):
    ss = np.random.SeedSequence([normalize_seed(root), *[normalize_seed(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(root, *keys):
    if keys:
        return np.random.default_rng(derive_seed(root, *keys))
    return np.random.default_rng(normalize_seed(root))
