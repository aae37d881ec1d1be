"""Periodic lattices, sampled complex fields and the elementary operations on them.

The whole space E^n is replaced by the torus [-L/2, L/2)^n sampled on a
uniform lattice.  Test densities are expected to live (numerically) in the
central half of the box; the wrap-around is an approximation that the
acceptance tolerances absorb.

Fourier conventions
-------------------
``dft_forward`` is the unitary DFT::

    F[f](xi_k) = N^{-1/2} sum_j f_j exp(-i <xi_k, j * spacing>)

with N the total number of lattice points and xi_k = 2*pi*k/L on the
folded index set (0, .., N/2-1, -N/2, .., -1) per axis.  A shift-invariant
operator acts as ``dft_inverse(symbol * dft_forward(f))``; the unitary
factors cancel, so a symbol sampled on the frequency lattice is directly the
continuum multiplier.  The continuum unitary transform carries the factor
(2*pi)^{-n/2}; equations written with that prefactor in front of the
singular integral are therefore represented by a symbol without it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "GridSpec",
    "Field",
    "BesovParams",
    "dft_forward",
    "dft_inverse",
    "circular_shift",
    "finite_difference",
    "lp_norm",
    "ell2_norm",
    "smooth_bump",
    "gaussian",
    "plane_wave",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic lattice on the box [-L/2, L/2)^n."""

    n: int
    sizes: tuple
    period: float

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.sizes))
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "period", float(self.period))
        if self.n not in (1, 2, 3):
            raise ValidationError(f"dimension must be 1, 2 or 3, got {self.n}")
        if len(sizes) != self.n:
            raise DimensionError(f"{len(sizes)} sizes given for n={self.n}")
        if min(sizes) < 8:
            raise ValidationError(f"every axis needs at least 8 points, got {sizes}")
        if not self.period > 0 or not math.isfinite(self.period):
            raise ValidationError(f"period must be positive, got {self.period}")

    @classmethod
    def square(cls, n, size, period=2 * math.pi):
        return cls(n, (size,) * n, period)

    @property
    def spacing(self):
        return tuple(self.period / s for s in self.sizes)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def npoints(self):
        return int(np.prod(self.sizes))

    @property
    def shape(self):
        return self.sizes

    def coordinates(self):
        """1-D coordinate arrays; index ``N // 2`` sits at the origin."""
        return [(np.arange(s) - s // 2) * h for s, h in zip(self.sizes, self.spacing)]

    def mesh(self):
        return np.meshgrid(*self.coordinates(), indexing="ij")

    def folded_indices(self):
        """Integer frequency (or offset) indices per axis in DFT storage order."""
        return [np.fft.fftfreq(s, d=1.0 / s).round().astype(int) for s in self.sizes]

    def frequencies(self):
        return [2 * np.pi * np.fft.fftfreq(s, d=h) for s, h in zip(self.sizes, self.spacing)]

    def frequency_mesh(self):
        return np.meshgrid(*self.frequencies(), indexing="ij")

    @property
    def nyquist(self):
        """Smallest per-axis Nyquist frequency pi / spacing."""
        return min(np.pi / h for h in self.spacing)

    def central_mask(self):
        """Boolean mask of the central half-box |x_i| < L/4."""
        masks = np.meshgrid(*[np.abs(x) < self.period / 4 for x in self.coordinates()], indexing="ij")
        return np.logical_and.reduce(masks)

    def to_json(self):
        return {"n": self.n, "sizes": list(self.sizes), "period": self.period}


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a ``GridSpec``; stored as an ndarray of shape ``grid.sizes``.

    The array is read-only after construction.  A flat sequence in row-major
    order is accepted as well.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.size != self.grid.npoints:
            raise DimensionError(f"{v.size} values for a grid of {self.grid.npoints} points")
        v = v.reshape(self.grid.sizes)
        if not np.all(np.isfinite(v)):
            raise ValidationError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.sizes))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.sizes, complex(c)))

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func(*mesh)`` on the lattice coordinates."""
        return cls(grid, func(*grid.mesh()))

    def _check(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise DimensionError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._check(other))

    def __rsub__(self, other):
        return Field(self.grid, self._check(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._check(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def conj(self):
        return Field(self.grid, self.values.conj())

    def mean(self):
        return complex(self.values.mean())

    def restrict(self, mask):
        return self.values[mask]

    def allclose(self, other, rtol=1e-12, atol=0.0):
        return np.allclose(self.values, self._check(other), rtol=rtol, atol=atol)

    @property
    def supnorm(self):
        return float(np.abs(self.values).max())


@dataclass(frozen=True)
class BesovParams:
    """Indices of B^l_{p,theta}: Lebesgue exponent, summation exponent, smoothness, difference order."""

    p: float = 2.0
    theta: float = 2.0
    l: float = 0.5
    m: int | None = None

    def __post_init__(self):
        m = math.floor(self.l) + 1 if self.m is None else self.m
        if int(m) != m:
            raise ValidationError(f"difference order must be an integer, got {m}")
        object.__setattr__(self, "m", int(m))
        if not self.l > 0:
            raise ValidationError(f"smoothness l must be positive, got {self.l}")
        if not self.m > self.l:
            raise ValidationError(f"need m > l, got m={self.m}, l={self.l}")
        if not 1 < self.p < math.inf:
            raise ValidationError(f"need 1 < p < inf, got {self.p}")
        if not 1 <= self.theta <= math.inf:
            raise ValidationError(f"need 1 <= theta <= inf, got {self.theta}")

    @classmethod
    def from_json(cls, d):
        theta = d.get("theta", 2.0)
        if isinstance(theta, str):
            theta = float(theta)  # accepts "inf"
        return cls(p=float(d.get("p", 2.0)), theta=theta, l=float(d.get("l", 0.5)), m=d.get("m"))

    def to_json(self):
        theta = "inf" if math.isinf(self.theta) else self.theta
        return {"p": self.p, "theta": theta, "l": self.l, "m": self.m}


def _axes(grid):
    return tuple(range(grid.n))


def dft_forward(f: Field) -> Field:
    """Unitary forward DFT; the result is stored in the folded frequency order."""
    return Field(f.grid, np.fft.fftn(f.values, axes=_axes(f.grid), norm="ortho"))


def dft_inverse(F: Field) -> Field:
    return Field(F.grid, np.fft.ifftn(F.values, axes=_axes(F.grid), norm="ortho"))


def _offset(grid, h):
    h = tuple(int(v) for v in np.atleast_1d(h))
    if len(h) != grid.n:
        raise DimensionError(f"offset {h} does not match dimension {grid.n}")
    return h


def circular_shift(f: Field, h) -> Field:
    """Lattice translation (tau_h f)(x) = f(x + h * spacing) with periodic wrap."""
    h = _offset(f.grid, h)
    return Field(f.grid, np.roll(f.values, tuple(-v for v in h), axis=_axes(f.grid)))


def finite_difference(f: Field, h, m: int = 1) -> Field:
    """m-th forward difference along the lattice vector h, by m-fold iteration of tau_h - I."""
    if int(m) != m or m < 1:
        raise ValueError(f"difference order must be a positive integer, got {m}")
    h = _offset(f.grid, h)
    v = f.values
    shift = tuple(-s for s in h)
    axes = _axes(f.grid)
    for _ in range(int(m)):
        v = np.roll(v, shift, axis=axes) - v
    return Field(f.grid, v)


def lp_norm(f: Field, p: float = 2.0) -> float:
    """Riemann-sum L_p norm (sum |f|^p * cell volume)^(1/p); max modulus for p = inf."""
    if not p >= 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    if p == 2:
        return float(math.sqrt(np.vdot(a, a).real * f.grid.cell_volume))
    return float((np.sum(a**p) * f.grid.cell_volume) ** (1.0 / p))


def ell2_norm(f: Field) -> float:
    """Plain sequence norm sqrt(sum |f_j|^2), preserved by the unitary DFT."""
    return float(np.linalg.norm(f.values.ravel()))


def smooth_bump(grid, center=None, radius=None, amplitude=1.0):
    """C-infinity bump exp(1 - 1/(1 - r^2/radius^2)), exactly zero outside the ball."""
    center = np.zeros(grid.n) if center is None else np.asarray(center, float)
    radius = grid.period / 8 if radius is None else float(radius)
    mesh = grid.mesh()
    r2 = sum((x - c) ** 2 for x, c in zip(mesh, center)) / radius**2
    inside = r2 < 1
    v = np.zeros(grid.sizes)
    v[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return Field(grid, amplitude * v)


def gaussian(grid, center=None, width=None, amplitude=1.0):
    center = np.zeros(grid.n) if center is None else np.asarray(center, float)
    width = grid.period / 20 if width is None else float(width)
    mesh = grid.mesh()
    r2 = sum((x - c) ** 2 for x, c in zip(mesh, center))
    return Field(grid, amplitude * np.exp(-r2 / (2 * width**2)))


def plane_wave(grid, index):
    """exp(i <xi_k, x>) for the folded frequency index k."""
    index = _offset(grid, index)
    xi = [2 * np.pi * k / grid.period for k in index]
    phase = sum(k * x for k, x in zip(xi, grid.mesh()))
    return Field(grid, np.exp(1j * phase))
