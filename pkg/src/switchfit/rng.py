"""Seedable random draws with a fully specified algorithm.

Simulated fixtures must be reproducible bit for bit, also by
re-implementations in other languages, so every draw is pinned down:

- bit source: PCG64 (numpy's documented implementation), seeded
  through ``numpy.random.SeedSequence(seed)``;
- uniforms: 53-bit doubles in [0, 1), i.e. ``next_uint64 >> 11``
  scaled by 2**-53 (numpy ``Generator.random()``);
- standard normals: inverse CDF of a uniform, redrawing the uniform
  while it is exactly zero;
- categorical draws: one uniform u, returning the first index whose
  cumulative probability exceeds u (last index if rounding lets u
  reach the total).

Rejection-free, so the draw count per step is fixed and the stream
never desynchronizes across implementations.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def draw_normal(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return float(ndtri(u))


def draw_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    u = rng.random()
    acc = 0.0
    last = probs.shape[0] - 1
    for i in range(last):
        acc += probs[i]
        if u < acc:
            return i
    return last
