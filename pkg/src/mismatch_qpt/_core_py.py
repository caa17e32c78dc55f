"""Pure-numpy evaluation kernels (fallback backend).

A precompiled table reduces every coincidence probability or density
matrix entry to a sum over weighted Gaussian kernel products,

    out[cell] = sum_n w[n] * g[u1[n]] * g[u2[n]],
    g[k] = exp(-(diffs[k] . tau)^2 / 4),

where diffs holds the distinct label-difference vectors produced by the
circuit.  The compiled backend in _core implements the same contract with
explicit loops; summation happens in table order in both, so results agree
to floating-point noise.
"""

from __future__ import annotations

import numpy as np


def gaussian_factors(diffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
    x = diffs @ tau
    return np.exp(-0.25 * x * x)


def eval_cells_real(
    diffs: np.ndarray,
    tau: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    w: np.ndarray,
    cell: np.ndarray,
    ncells: int,
) -> np.ndarray:
    g = gaussian_factors(diffs, tau)
    return np.bincount(cell, weights=w * g[u1] * g[u2], minlength=ncells)


def eval_cells_complex(
    diffs: np.ndarray,
    tau: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    w_re: np.ndarray,
    w_im: np.ndarray,
    cell: np.ndarray,
    ncells: int,
) -> np.ndarray:
    g = gaussian_factors(diffs, tau)
    gg = g[u1] * g[u2]
    re = np.bincount(cell, weights=w_re * gg, minlength=ncells)
    im = np.bincount(cell, weights=w_im * gg, minlength=ncells)
    return re + 1j * im
