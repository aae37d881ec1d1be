"""Truncated singular kernels Omega(u/|u|)/|u|^n sampled on lattice offsets.

Both the direct principal-value sum and the lattice variant of the symbol
use these weights, so the two agree to rounding when their truncations
match.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = ["annulus_offsets", "lattice_kernel", "shell_sums"]

_SUBSAMPLES = {1: 64, 2: 16, 3: 8}


def _check_cutoffs(grid, eps, R):
    if R is None:
        R = grid.period / 2
    if not 0 <= eps < R:
        raise ValueError(f"need 0 <= eps < R, got eps={eps}, R={R}")
    if R > grid.period / 2 * (1 + 1e-12):
        raise ValueError(f"outer cutoff R={R} exceeds half the period")
    return float(eps), float(R)


def annulus_offsets(grid, eps, R, boundary="fraction"):
    """Nonzero lattice offsets u with eps <= |u| <= R and their quadrature weights.

    With ``boundary="fraction"`` a cell cut by either circle is weighted by
    the fraction of its area inside the annulus (estimated by midpoint
    subsampling); ``"sharp"`` keeps the plain indicator of the cell centre.
    Returns ``(offsets, weights)`` with offsets as an int array (m, n).
    """
    eps, R = _check_cutoffs(grid, eps, R)
    if boundary not in ("fraction", "sharp"):
        raise ValueError(f"unknown boundary rule {boundary!r}")
    h = np.array(grid.spacing)
    reach = [int(math.floor(R / hi + 0.5)) + 1 for hi in h]
    reach = [min(r, s // 2) for r, s in zip(reach, grid.sizes)]
    axes = [np.arange(-r, r + 1) for r in reach]
    u = np.array(list(itertools.product(*axes)), dtype=int).reshape(-1, grid.n)
    u = u[np.any(u != 0, axis=1)]
    r = np.linalg.norm(u * h, axis=1)
    if boundary == "sharp":
        keep = (r >= eps) & (r <= R)
        return u[keep], np.ones(int(keep.sum()))

    half_diag = 0.5 * float(np.linalg.norm(h))
    w = ((r >= eps) & (r <= R)).astype(float)
    cut = ((r - half_diag < eps) & (r + half_diag > eps)) | ((r - half_diag < R) & (r + half_diag > R))
    if np.any(cut):
        ns = _SUBSAMPLES[grid.n]
        s = (np.arange(ns) + 0.5) / ns - 0.5
        sub = np.array(list(itertools.product(s, repeat=grid.n))) * h
        for i in np.flatnonzero(cut):
            rr = np.linalg.norm(u[i] * h + sub, axis=1)
            w[i] = np.mean((rr >= eps) & (rr <= R))
    keep = w > 0
    return u[keep], w[keep]


def lattice_kernel(c, grid, eps, R, boundary="fraction"):
    """Offsets and quadrature-weighted kernel values K(u) * w(u) * cell volume."""
    u, w = annulus_offsets(grid, eps, R, boundary)
    x = u * np.array(grid.spacing)
    r = np.linalg.norm(x, axis=1)
    k = c.evaluate(x / r[:, None]) / r**grid.n
    return u, k * w * grid.cell_volume


def shell_sums(c, grid, eps, R, boundary="fraction"):
    """Sum of the weighted kernel over each radius shell (cancellation diagnostic).

    A zero sphere mean makes each symmetric shell sum vanish up to lattice
    anisotropy; large values flag a characteristic whose mean is not zero.
    Returns ``(radii, sums)``.
    """
    u, kw = lattice_kernel(c, grid, eps, R, boundary)
    r = np.round(np.linalg.norm(u * np.array(grid.spacing), axis=1), 12)
    radii, inv = np.unique(r, return_inverse=True)
    sums = np.zeros(radii.size, complex)
    np.add.at(sums, inv, kw)
    return radii, sums
