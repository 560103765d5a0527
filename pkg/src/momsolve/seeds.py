"""Per-trial seed derivation.

Trial i gets seed splitmix64(base + (i + 1) * GOLDEN), the standard
splitmix64 finalizer over a golden-ratio stride. Streams are independent of
worker scheduling because each trial derives its seed from (base, i) alone.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def trial_seed(base_seed: int, trial: int) -> int:
    return splitmix64((base_seed + (trial + 1) * _GOLDEN) & _MASK)
