"""Two independent ways of applying a singular operator.

``apply_multiplier`` works in frequency space with a precomputed symbol.
``apply_pv`` sums the principal-value integral directly over lattice
offsets; it costs O(N * offsets) and exists only as the trusted oracle.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DimensionError
from .fields import Field, dft_forward, dft_inverse
from .kernels import lattice_kernel
from .symbol import Symbol

__all__ = ["apply_multiplier", "apply_pv", "thread_count"]


def thread_count(threads=None):
    """Worker count: explicit argument, else $SINGINT_THREADS, else 1."""
    if threads is None:
        threads = os.environ.get("SINGINT_THREADS", "1")
    try:
        return max(1, int(threads))
    except ValueError:
        return 1


def apply_multiplier(s: Symbol, f: Field) -> Field:
    """A f = F^{-1} (A^ * F f)."""
    if s.grid != f.grid:
        raise DimensionError("symbol and field live on different grids")
    return dft_inverse(Field(f.grid, s.values * dft_forward(f).values))


def _partial_sum(values, axes, offsets, weights, subtract):
    acc = np.zeros(values.shape, complex)
    for u, w in zip(offsets, weights):
        shifted = np.roll(values, tuple(-int(v) for v in u), axis=axes)
        if subtract:
            acc += w * (shifted - values)
        else:
            acc += w * shifted
    return acc


def apply_pv(c, f: Field, eps=None, R=None, *, subtract=True, boundary="fraction", threads=None) -> Field:
    """Direct principal-value sum over lattice offsets eps <= |u| <= R (torus metric).

    (Sf)(x) ~ sum_u K(u) (f(x + u) - f(x)) * cell volume.  The subtracted
    f(x) costs nothing in the limit (the kernel has zero sphere mean) but
    removes the worst of the singularity from the sum; ``subtract=False``
    gives the naive annulus sum for diagnostics.  Cells cut by the cutoff
    circles are weighted by their covered area (``boundary="sharp"`` turns
    this off).  Defaults: eps = 2 * spacing, R = L/4.
    """
    grid = f.grid
    if c.n != grid.n:
        raise DimensionError(f"characteristic has n={c.n}, field has n={grid.n}")
    h = max(grid.spacing)
    eps = 2 * h if eps is None else float(eps)
    R = grid.period / 4 if R is None else float(R)
    if not 0 < eps < R:
        raise ValueError(f"need 0 < eps < R, got eps={eps}, R={R}")
    offsets, kw = lattice_kernel(c, grid, eps, R, boundary)

    axes = tuple(range(grid.n))
    nthreads = min(thread_count(threads), max(1, len(kw)))
    chunks = np.array_split(np.arange(len(kw)), nthreads)
    if nthreads == 1:
        total = _partial_sum(f.values, axes, offsets, kw, subtract)
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(lambda idx: _partial_sum(f.values, axes, offsets[idx], kw[idx], subtract), chunks))
        # fixed summation order keeps results reproducible for a given thread count
        total = parts[0]
        for p in parts[1:]:
            total = total + p
    return Field(grid, total)
