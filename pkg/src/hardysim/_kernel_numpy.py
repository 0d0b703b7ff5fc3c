"""Vectorised trial-sampling kernel (fallback for the compiled one).

Implements exactly the algorithm of ``_mc_kernel.pyx`` with numpy array
arithmetic; the two must produce bitwise identical count tables for any
(seed, trial range).  See ``_rng`` for the stream layout shared by both.

Per trial: draw an output pattern by inverse CDF, thin every photon by
its detector's efficiency, OR in dark clicks, threshold to click /
no-click, then classify: exactly one left and one right click is a
coincidence; two clicks on a side (or, with number-resolving detectors,
two surviving photons in one detector) is ambiguous and discarded.
"""

from __future__ import annotations

import numpy as np

from ._rng import SLOT_DARK, SLOT_THIN, SLOTS_PER_TRIAL, counter_uniform_vec

_CHUNK = 1 << 19


def run_kernel(
    cum: np.ndarray,
    occ: np.ndarray,
    offsets: np.ndarray,
    efficiency: np.ndarray,
    dark: np.ndarray,
    number_resolving: bool,
    seed: int,
    start_trial: int,
    n_trials: int,
) -> tuple[np.ndarray, int]:
    """Count coincidences over trials [start_trial, start_trial + n_trials).

    ``cum`` is the inclusive CDF over patterns, ``occ[k, d]`` the photon
    count of pattern k at detector d, ``offsets[k, d]`` the number of
    photons of pattern k in detectors before d (the thinning-slot base).
    Returns (counts over the four pairs c+c-, c+d-, d+c-, d+d-,
    number of discarded ambiguous trials).
    """
    counts = np.zeros(4, dtype=np.int64)
    discarded = 0
    max_occ = occ.max(axis=0) if len(occ) else np.zeros(4, dtype=np.int64)

    for lo in range(start_trial, start_trial + n_trials, _CHUNK):
        hi = min(lo + _CHUNK, start_trial + n_trials)
        base = np.arange(lo, hi, dtype=np.uint64) * np.uint64(SLOTS_PER_TRIAL)
        u0 = counter_uniform_vec(seed, base)
        k = np.searchsorted(cum, u0, side="right")
        np.minimum(k, len(cum) - 1, out=k)

        survivors = np.zeros((hi - lo, 4), dtype=np.int64)
        for d in range(4):
            occ_d = occ[k, d]
            for j in range(int(max_occ[d])):
                present = occ_d > j
                slot = base + np.uint64(SLOT_THIN) + offsets[k, d].astype(np.uint64) + np.uint64(j)
                u = counter_uniform_vec(seed, slot)
                survivors[:, d] += present & (u < efficiency[d])

        clicks = survivors > 0
        for d in range(4):
            u = counter_uniform_vec(seed, base + np.uint64(SLOT_DARK + d))
            clicks[:, d] |= u < dark[d]

        left = clicks[:, 0].astype(np.int64) + clicks[:, 1]
        right = clicks[:, 2].astype(np.int64) + clicks[:, 3]
        bad = (left > 1) | (right > 1)
        if number_resolving:
            bad |= (survivors >= 2).any(axis=1)
        coincident = (left == 1) & (right == 1) & ~bad

        pair = 2 * clicks[:, 1].astype(np.int64) + clicks[:, 3]
        counts += np.bincount(pair[coincident], minlength=4)
        discarded += int(bad.sum())

    return counts, discarded
