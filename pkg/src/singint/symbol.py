"""Symbols A^(xi) = a + F(Omega(theta)/r^n) sampled on the frequency lattice.

Convention: the singular operator acts as
``(Sf)(x) = pv int K(y - x) f(y) dy`` with ``K(u) = Omega(u/|u|)/|u|^n``,
so a plane wave e^{i<xi,x>} is multiplied by

    A^(xi) = a + pv int K(u) e^{i<xi,u>} du.

The default ``method="continuum"`` evaluates this integral for the kernel
restricted to eps <= |u| <= R in polar form: the radial integral is done in
closed form,

    int_eps^R e^{isr} dr/r = Phi(sR) - Phi(s*eps) + log(R/eps),
    Phi(x) = int_0^x (e^{it} - 1) dt/t = -Cin(x) + i Si(x),

and the angular integral by quadrature over the characteristic's sphere
rule.  The constant log(R/eps) is annihilated by the mean-zero condition,
which is what makes the limits eps -> 0 and (for n <= 2) R -> infinity
exist; both limits are available (``eps=0``, ``R=None``).  For n = 2 the
untruncated coefficients int e^{ik psi}(-log|cos psi| + i pi/2 sgn cos psi)
are tabulated once by adaptive quadrature.

``method="lattice"`` is the discrete Fourier series of the sampled,
truncated kernel.  It is the exact multiplier of the direct lattice sum
performed by ``apply_pv`` and serves as its FFT counterpart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .characteristic import Characteristic, validate_characteristic
from .errors import DimensionError, ValidationError
from .kernels import lattice_kernel

__all__ = [
    "Symbol",
    "SymbolBounds",
    "compute_symbol",
    "symbol_bounds",
    "adjoint_symbol",
]


@dataclass(frozen=True, eq=False)
class Symbol:
    grid: object
    a: complex
    values: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict, repr=False)
    warnings: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128).reshape(self.grid.sizes)
        if not np.all(np.isfinite(v)):
            raise ValidationError("symbol values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "a", complex(self.a))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, c, np.full(grid.sizes, complex(c)), {"kind": "constant"})

    def _same(self, other):
        if other.grid != self.grid:
            raise DimensionError("symbols live on different grids")

    def __add__(self, other):
        if isinstance(other, Symbol):
            self._same(other)
            return Symbol(self.grid, self.a + other.a, self.values + other.values, {"kind": "sum"})
        return Symbol(self.grid, self.a + other, self.values + other, {"kind": "shifted"})

    __radd__ = __add__

    def __mul__(self, s):
        return Symbol(self.grid, self.a * s, self.values * s, {"kind": "scaled"})

    __rmul__ = __mul__

    def without_constant(self):
        """The pure singular part: symbol minus its constant a."""
        return Symbol(self.grid, 0.0, self.values - self.a, {"kind": "singular part"})

    def maxmod(self):
        return float(np.abs(self.values).max())

    def header(self):
        return {"kind": "symbol", "a": [self.a.real, self.a.imag]}


# -- radial integrals ---------------------------------------------------------

_CIN_SERIES = np.array([(-1) ** (k + 1) / (2 * k * math.factorial(2 * k)) for k in range(1, 13)])


def _cin(x):
    """Cin(x) = int_0^x (1 - cos t)/t dt (even, entire)."""
    x = np.abs(np.asarray(x, float))
    out = np.empty_like(x)
    small = x < 1.0
    xs2 = x[small] ** 2
    acc = np.zeros_like(xs2)
    for c in _CIN_SERIES[::-1]:
        acc = (acc + c) * xs2
    out[small] = acc
    xl = x[~small]
    _, ci = special.sici(xl)
    out[~small] = np.euler_gamma + np.log(xl) - ci
    return out


def _phi(x):
    """Phi(x) = int_0^x (e^{it} - 1) dt/t = -Cin(x) + i Si(x)."""
    si, _ = special.sici(np.asarray(x, float))
    return -_cin(x) + 1j * si


def _phi_inf(s):
    """Untruncated counterpart of Phi: -gamma - log|s| + i pi/2 sgn(s) (log of the cutoff dropped)."""
    s = np.asarray(s, float)
    with np.errstate(divide="ignore"):
        return -np.euler_gamma - np.log(np.abs(s)) + 0.5j * np.pi * np.sign(s)


def _radial(s, eps, R):
    """int_eps^R e^{isr} dr/r modulo constants; R=None means untruncated."""
    out = _phi_inf(s) if R is None else _phi(s * R)
    if eps > 0:
        out = out - _phi(s * eps)
    return out


@lru_cache(maxsize=None)
def _pv_harmonic(k):
    """int_0^{2pi} e^{ik psi} (-log|cos psi| + i pi/2 sgn cos psi) dpsi for k != 0."""
    even = 1 + (-1) ** k
    odd = 1 - (-1) ** k
    log_part = 0.0
    if even:
        with warnings.catch_warnings():
            # endpoint log singularities trip QUADPACK's roundoff detector at ~1e-15
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            log_part, _ = integrate.quad(lambda p: -math.cos(k * p) * math.log(math.cos(p)),
                                         -math.pi / 2, math.pi / 2, limit=400, epsabs=1e-15, epsrel=1e-14)
    jump = 2 * math.sin(k * math.pi / 2) / k
    return complex(even * log_part, 0.5 * math.pi * odd * jump)


def _harmonic_table(x, ks):
    """T_k(x) = int_0^{2pi} e^{ik psi} Phi(x cos psi) dpsi by the trapezoid rule.

    The integrand is entire and 2pi-periodic, so the rule converges
    geometrically once the node count exceeds the oscillation x + |k|.
    """
    x = np.asarray(x, float)
    out = np.zeros((x.size, len(ks)), complex)
    if x.size == 0:
        return out
    kmax = max((abs(k) for k in ks), default=0)
    order = np.argsort(x)
    xs = x[order]
    for start in range(0, xs.size, 256):
        chunk = xs[start:start + 256]
        m = int(2 * math.ceil(chunk[-1]) + 2 * kmax + 64)
        m += (-m) % 8
        psi = 2 * np.pi * np.arange(m) / m
        phase = np.exp(1j * np.outer(psi, ks)) * (2 * np.pi / m)
        out[order[start:start + 256]] = _phi(np.outer(chunk, np.cos(psi))) @ phase
    return out


def _continuum_1d(c, xi, eps, R):
    plus, minus = c.values
    with np.errstate(invalid="ignore"):
        return plus * _radial(xi, eps, R) + minus * _radial(-xi, eps, R)


def _continuum_2d(c, grid, eps, R):
    k1, k2 = grid.frequency_mesh()
    rho = np.hypot(k1, k2)
    phi = np.arctan2(k2, k1)
    ks = [int(k) for k in c.modes]
    if not ks:
        return np.zeros(grid.sizes, complex)
    # radii repeat heavily on the lattice; work on the distinct ones
    key = np.round(rho.ravel() * grid.period / (2 * np.pi), 9)
    uniq, inv = np.unique(key, return_inverse=True)
    radii = uniq * 2 * np.pi / grid.period
    G = np.zeros((radii.size, len(ks)), complex)
    nz = radii > 0
    if R is None:
        for j, k in enumerate(ks):
            if k == 0:
                G[nz, j] = 2 * np.pi * (math.log(2) - np.euler_gamma - np.log(radii[nz]))
            else:
                G[:, j] = _pv_harmonic(k)
    else:
        G += _harmonic_table(radii * R, ks)
    if eps > 0:
        G -= _harmonic_table(radii * eps, ks)
    G = G[inv].reshape(grid.sizes + (len(ks),))
    out = np.zeros(grid.sizes, complex)
    for j, (k, cval) in enumerate(zip(ks, c.values)):
        out += cval * np.exp(1j * k * phi) * G[..., j]
    return out


def _continuum_3d(c, grid, eps, R):
    mesh = grid.frequency_mesh()
    xi = np.stack([m.ravel() for m in mesh], axis=1)
    dirs, w, v = c.quadrature()
    wv = w * v
    out = np.empty(xi.shape[0], complex)
    step = max(1, 2_000_000 // len(wv))
    for i in range(0, xi.shape[0], step):
        s = xi[i:i + step] @ dirs.T
        out[i:i + step] = _radial(s, eps, R) @ wv
    return out.reshape(grid.sizes)


def _lattice(c, grid, eps, R, boundary):
    u, kw = lattice_kernel(c, grid, eps, R, boundary)
    arr = np.zeros(grid.sizes, complex)
    idx = tuple((u[:, i] % grid.sizes[i]) for i in range(grid.n))
    np.add.at(arr, idx, kw)
    # sum_u K(u) e^{+i<xi,u>}: numpy's inverse DFT up to its 1/N factor
    return np.fft.ifftn(arr) * grid.npoints


def _raw_symbol(c, grid, eps, R, method, boundary):
    if method == "continuum":
        if grid.n == 1:
            vals = _continuum_1d(c, grid.frequencies()[0], eps, R)
        elif grid.n == 2:
            vals = _continuum_2d(c, grid, eps, R)
        else:
            vals = _continuum_3d(c, grid, eps, R)
    elif method == "lattice":
        vals = _lattice(c, grid, eps, R, boundary)
    else:
        raise ValueError(f"unknown method {method!r}")
    return vals


def compute_symbol(c: Characteristic, a, grid, eps=0.0, R=None, *, method="continuum",
                   boundary="fraction", stability_tol=1e-2) -> Symbol:
    """Symbol a + F(K) of the operator a I + S on ``grid``.

    ``eps`` and ``R`` truncate the kernel to eps <= |u| <= R.  With the
    continuum method ``eps=0`` is the principal-value limit and ``R=None``
    the untruncated kernel (n <= 2; for n = 3 it means R = L/2).  The lattice
    method needs a finite R (default L/2).  When eps > 0 the computation is
    repeated with eps/2 and a warning is attached if sup|A^| moves by more
    than ``stability_tol`` relative.
    """
    if c.n != grid.n:
        raise DimensionError(f"characteristic has n={c.n}, grid has n={grid.n}")
    report = validate_characteristic(c)
    if not report.passed:
        raise ValidationError(f"characteristic fails validation (mean residual {report.mean_residual:.3e})")
    if R is None and (method == "lattice" or grid.n == 3):
        R = grid.period / 2
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    if R is not None:
        if not eps < R:
            raise ValueError(f"need eps < R, got eps={eps}, R={R}")
        if R > grid.period / 2 * (1 + 1e-12):
            raise ValueError(f"R={R} exceeds half the period {grid.period / 2}")

    vals = _raw_symbol(c, grid, eps, R, method, boundary)
    vals = complex(a) + vals
    vals.flat[0] = complex(a)

    notes = []
    if eps > 0:
        coarse = complex(a) + _raw_symbol(c, grid, eps / 2, R, method, boundary)
        coarse.flat[0] = complex(a)
        s1, s2 = np.abs(vals).max(), np.abs(coarse).max()
        change = abs(s1 - s2) / max(s2, 1e-300)
        if change > stability_tol:
            notes.append(f"sup|A^| changed by {change:.2e} when halving eps; principal value not settled")

    prov = {"characteristic": c.to_json(), "eps": float(eps), "R": None if R is None else float(R),
            "method": method}
    if method == "lattice":
        prov["boundary"] = boundary
    return Symbol(grid, a, vals, prov, tuple(notes))


@dataclass(frozen=True)
class SymbolBounds:
    minmod: float
    maxmod: float
    argmin: tuple


def symbol_bounds(s: Symbol, tie_tol=1e-12) -> SymbolBounds:
    """Ellipticity scan: min |A^| over nonzero frequencies, max over all, and the argmin.

    Near-ties (within ``tie_tol * maxmod``) go to the lexicographically
    smallest folded frequency index.
    """
    mod = np.abs(s.values)
    maxmod = float(mod.max())
    nonzero = mod.copy()
    nonzero.flat[0] = np.inf
    minmod = float(nonzero.min())
    cand = np.argwhere(nonzero <= minmod + tie_tol * maxmod)
    folded = [np.where(cand[:, i] < n - n // 2, cand[:, i], cand[:, i] - n) for i, n in enumerate(s.grid.sizes)]
    folded = np.stack(folded, axis=1)
    best = min(map(tuple, folded.tolist()))
    return SymbolBounds(minmod, maxmod, tuple(int(v) for v in best))


def adjoint_symbol(s: Symbol) -> Symbol:
    """Symbol of the adjoint operator: the pointwise complex conjugate."""
    prov = dict(s.provenance)
    prov["adjoint"] = not prov.get("adjoint", False)
    return Symbol(s.grid, s.a.conjugate(), s.values.conj(), prov, s.warnings)
