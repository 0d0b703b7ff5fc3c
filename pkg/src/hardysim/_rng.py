"""Counter-based random streams for reproducible trial sampling.

Every random number consumed by a Monte Carlo trial is addressed by the
pair ``(seed, counter)`` where ``counter = trial_index * SLOTS_PER_TRIAL
+ slot``.  No generator state is carried between trials, so any
partition of the trial range over chunks, processes or threads produces
bitwise identical results, and the compiled kernel and the numpy
fallback agree exactly.

The mixing function is the splitmix64 finaliser applied to the
Weyl-sequence position ``seed + (counter + 1) * GOLDEN``; evaluated at
arbitrary positions it behaves as a stateless counter RNG.

Slot layout within a trial (stride ``SLOTS_PER_TRIAL = 16``):

====  =====================================================
slot  purpose
====  =====================================================
0     output-pattern selection
1..7  per-photon detection thinning, in detector order
8..11 dark-count draw for detectors c+, d+, c-, d-
====  =====================================================
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53

SLOTS_PER_TRIAL = 16
SLOT_PATTERN = 0
SLOT_THIN = 1
SLOT_DARK = 8


def counter_mix(seed: int, counter: int) -> int:
    """64-bit hash of a stream position; reference implementation."""
    z = (seed + (counter + 1) * GOLDEN) & MASK64
    z ^= z >> 30
    z = (z * MIX1) & MASK64
    z ^= z >> 27
    z = (z * MIX2) & MASK64
    z ^= z >> 31
    return z


def counter_uniform(seed: int, counter: int) -> float:
    """Uniform double in [0, 1) at the given stream position."""
    return (counter_mix(seed, counter) >> 11) * INV_2_53


def counter_uniform_vec(seed: int, counters: np.ndarray) -> np.ndarray:
    """Vectorised ``counter_uniform`` over a uint64 counter array.

    Bitwise identical to the scalar version and to the compiled kernel:
    all arithmetic is modulo 2**64 and the mantissa construction is the
    same ``(z >> 11) * 2**-53``.
    """
    z = np.uint64(seed) + (counters + np.uint64(1)) * np.uint64(GOLDEN)
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * INV_2_53
