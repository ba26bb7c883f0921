"""Row layout of the stacked filter state.

Every tracked statistic is an N-vector (one component per regime the
chain could occupy now).  All of them are stored as rows of one
C-contiguous (rows, N) array so a filter step is a single weighted
matrix product plus cheap injections.  Row order, for N regimes and AR
order p:

    0                      state filter q
    jump  + r*N + s        expected transition counts r -> s
    occ   + r              occupation of regime r
    ta    + r*(p+1) + jj   cross moment lag*next; jj = 0 is next^2,
                           jj = 1+j pairs lag j with the next value
    tb    + r*ntri + k     lag-lag moments, upper triangle (i <= j)
    tc    + r              plain next-value moment
    td    + r*p + j        plain lag moments

The compiled kernel mirrors these offsets; keep the two in sync.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StatLayout:
    n: int
    p: int
    ntri: int
    jump: int
    occ: int
    ta: int
    tb: int
    tc: int
    td: int
    rows: int
    tri_i: np.ndarray
    tri_j: np.ndarray


def stat_layout(n: int, p: int) -> StatLayout:
    ntri = p * (p + 1) // 2
    jump = 1
    occ = jump + n * n
    ta = occ + n
    tb = ta + n * (p + 1)
    tc = tb + n * ntri
    td = tc + n
    rows = td + n * p
    tri_i = np.empty(ntri, dtype=np.intp)
    tri_j = np.empty(ntri, dtype=np.intp)
    k = 0
    for i in range(p):
        for j in range(i, p):
            tri_i[k] = i
            tri_j[k] = j
            k += 1
    return StatLayout(n, p, ntri, jump, occ, ta, tb, tc, td, rows, tri_i, tri_j)
