"""Beurling and Cauchy transforms on the planar torus, and the principal solution of W_zbar = mu W_z.

With z = x + iy and the convention f^(xi) ~ int f e^{-i<xi,x>},

    d/dzbar  <->  i (xi_1 + i xi_2) / 2,
    d/dz     <->  i (xi_1 - i xi_2) / 2,

so the Cauchy transform (inverse of d/dzbar, zero mean) has multiplier
2 / (i (xi_1 + i xi_2)) and the Beurling transform Pi = d/dz o (d/dzbar)^{-1}
has the unimodular multiplier (xi_1 - i xi_2) / (xi_1 + i xi_2).  The latter
is what ``compute_symbol`` returns for the characteristic -(1/pi) e^{-2i theta}.

The homeomorphism is W(z) = z + mean(f) * zbar + C(f - mean(f)) where f
solves f - mu Pi f = mu.  The linear part is kept analytic; only the
correction C(f - mean f) is periodic.  The zbar term restores the mean that
the periodic Cauchy transform cannot carry, so that W_zbar = f and
W_z = 1 + Pi f hold exactly on the lattice.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characteristic import Characteristic
from .equations import MuField, NeumannResult, neumann_solve
from .errors import DimensionError
from .fields import Field, ell2_norm
from .operators import apply_multiplier
from .symbol import compute_symbol

__all__ = [
    "beurling_symbol",
    "beurling_apply",
    "cauchy_transform",
    "dz",
    "dzbar",
    "Homeomorphism",
    "build_homeomorphism",
    "beltrami_residual",
]


def _planar(grid):
    if grid.n != 2:
        raise DimensionError(f"planar operator needs n = 2, got n = {grid.n}")


@lru_cache(maxsize=16)
def beurling_symbol(grid, eps=0.0, R=None):
    """Cached symbol of Pi on ``grid`` (untruncated principal value by default)."""
    _planar(grid)
    return compute_symbol(Characteristic.beurling(), 0.0, grid, eps, R)


def beurling_apply(f: Field, eps=0.0, R=None) -> Field:
    _planar(f.grid)
    return apply_multiplier(beurling_symbol(f.grid, eps, R), f)


def _derivative_multipliers(grid):
    k1, k2 = grid.frequency_mesh()
    return 0.5j * (k1 + 1j * k2), 0.5j * (k1 - 1j * k2)


def dzbar(f: Field) -> Field:
    """Spectral d/dzbar."""
    _planar(f.grid)
    mb, _ = _derivative_multipliers(f.grid)
    return Field(f.grid, np.fft.ifft2(mb * np.fft.fft2(f.values)))


def dz(f: Field) -> Field:
    """Spectral d/dz."""
    _planar(f.grid)
    _, m = _derivative_multipliers(f.grid)
    return Field(f.grid, np.fft.ifft2(m * np.fft.fft2(f.values)))


def cauchy_transform(f: Field) -> Field:
    """Zero-mean periodic solution u of du/dzbar = f - mean(f).

    The zero-frequency component of f is discarded; callers that need it
    must carry mean(f) * zbar separately (``build_homeomorphism`` does).
    """
    _planar(f.grid)
    mb, _ = _derivative_multipliers(f.grid)
    inv = np.zeros_like(mb)
    nz = mb != 0
    inv[nz] = 1.0 / mb[nz]
    return Field(f.grid, np.fft.ifft2(inv * np.fft.fft2(f.values)))


def beltrami_residual(f: Field, pi_f: Field, mu: MuField) -> float:
    """||W_zbar - mu W_z|| / ||W_z|| on the central half-box, with W_zbar = f, W_z = 1 + Pi f."""
    mask = f.grid.central_mask()
    wz = 1.0 + pi_f.values[mask]
    r = f.values[mask] - mu.mu.values[mask] * wz
    return float(np.linalg.norm(r) / np.linalg.norm(wz))


@dataclass
class Homeomorphism:
    """W(z) = z + zbar_coeff * zbar + periodic, with derivative data and diagnostics."""

    grid: object
    density: Field
    pi_density: Field
    zbar_coeff: complex
    periodic: Field
    mu: MuField
    solve: NeumannResult | None = field(default=None, repr=False)

    def materialize(self) -> Field:
        x, y = self.grid.mesh()
        z = x + 1j * y
        return Field(self.grid, z + self.zbar_coeff * np.conj(z) + self.periodic.values)

    @property
    def w_z(self):
        return 1.0 + self.pi_density

    @property
    def w_zbar(self):
        return self.density

    def jacobian(self) -> Field:
        """|W_z|^2 - |W_zbar|^2."""
        return Field(self.grid, np.abs(self.w_z.values) ** 2 - np.abs(self.w_zbar.values) ** 2)

    @property
    def residual(self):
        return beltrami_residual(self.density, self.pi_density, self.mu)

    def diagnostics(self):
        jac = self.jacobian().values.real
        return {
            "beltrami_residual": self.residual,
            "jacobian_min": float(jac.min()),
            "jacobian_positive": bool(np.all(jac > 0)),
            "zbar_coefficient": [self.zbar_coeff.real, self.zbar_coeff.imag],
            "iterations": self.solve.iterations if self.solve else 0,
            "normalization": "f solves f - mu Pi f = mu (g = mu); W = z + mean(f) zbar + C(f - mean f)",
        }

    def write_csv(self, path):
        """Grid-point images: x, y, Re W, Im W."""
        w = self.materialize().values.ravel()
        x, y = (m.ravel() for m in self.grid.mesh())
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["x", "y", "re_w", "im_w"])
            for a, b, c in zip(x, y, w):
                out.writerow([repr(float(a)), repr(float(b)), repr(float(c.real)), repr(float(c.imag))])


def build_homeomorphism(mu: MuField, tol=1e-10, max_iter=500) -> Homeomorphism:
    """Principal solution of W_zbar - mu W_z = 0 normalised as W(z) = z + O(periodic)."""
    grid = mu.mu.grid
    _planar(grid)
    result = neumann_solve(mu, mu.mu, tol=tol, max_iter=max_iter)
    f = result.solution
    pf = beurling_apply(f)
    mean = f.mean()
    return Homeomorphism(grid, f, pf, mean, cauchy_transform(f), mu, result)
