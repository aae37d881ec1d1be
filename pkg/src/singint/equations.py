"""Singular equations with constant coefficients and their compact and contraction perturbations.

* ``solve_multiplier_equation``: a f + S f = g, i.e. A^ * F f = F g.
* ``solve_perturbed``: A f + T f = g with T a smoothing convolution,
  rewritten as the second-kind system f + C T f = C g with C = A^{-1}.
* ``neumann_solve``: f - mu * Pi f = g with |mu| <= q < 1.

Invertibility is decided from the symbol alone: A is invertible when
|A^| stays away from zero at every nonzero frequency (and at zero
frequency, where A^ = a, for the discrete solve).  When it is not, a
sequence of unit-norm spectral bumps collapsing onto the near-zero makes
||A y_k|| small: a finite rendition of a generalized zero divisor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import ConvergenceError, DimensionError, EllipticityError, PreconditionError, ValidationError
from .fields import Field, dft_forward, dft_inverse, ell2_norm
from .operators import apply_multiplier
from .symbol import Symbol, symbol_bounds

__all__ = [
    "EquationSpec",
    "MuField",
    "CompactKernel",
    "InvertibilityDecision",
    "NeumannResult",
    "check_invertible",
    "solve_multiplier_equation",
    "zero_divisor_witness",
    "solve_perturbed",
    "neumann_solve",
    "fixed_point_residual",
    "write_trace_csv",
]

DENSE_LIMIT = 64


@dataclass(frozen=True)
class EquationSpec:
    symbol: Symbol
    rhs: Field

    def __post_init__(self):
        if self.symbol.grid != self.rhs.grid:
            raise DimensionError("symbol and right-hand side live on different grids")


@dataclass(frozen=True)
class MuField:
    """Dilatation mu with the recorded contraction bound sup|mu| <= q < 1."""

    mu: Field
    q: float
    support_tol: float = 1e-10

    def __post_init__(self):
        if not 0 <= self.q < 1:
            raise PreconditionError(f"contraction bound must satisfy 0 <= q < 1, got {self.q}")
        if self.mu.supnorm > self.q * (1 + 1e-12):
            raise ValidationError(f"sup|mu| = {self.mu.supnorm:.6g} exceeds q = {self.q}")
        outside = ~self.mu.grid.central_mask()
        if np.any(np.abs(self.mu.values[outside]) > self.support_tol):
            raise ValidationError("mu must vanish outside the central half-box")

    @classmethod
    def tight(cls, mu):
        """Record q as the measured sup|mu|."""
        return cls(mu, mu.supnorm)


@dataclass(frozen=True, eq=False)
class CompactKernel:
    """Smooth convolution kernel k; (Tf)(x) = sum_y k(x - y) f(y) * cell volume.

    ``kernel`` is stored with the zero offset at index 0 (DFT order).  Its
    multiplier must decay below 1e-8 of its peak on the Nyquist shell, which
    makes T compact to working precision.
    """

    kernel: Field
    decay_tol: float = 1e-8

    def __post_init__(self):
        mult = self.multiplier
        peak = np.abs(mult).max()
        rho = np.sqrt(sum(k**2 for k in self.kernel.grid.frequency_mesh()))
        band = rho >= 0.9 * self.kernel.grid.nyquist
        if peak > 0 and np.abs(mult[band]).max() > self.decay_tol * peak:
            raise ValidationError("kernel spectrum does not decay below tolerance at the Nyquist band")

    @property
    def multiplier(self):
        g = self.kernel.grid
        return np.fft.fftn(self.kernel.values) * g.cell_volume

    @property
    def spectral_norm(self):
        return float(np.abs(self.multiplier).max())

    def apply(self, f):
        return Field(f.grid, np.fft.ifftn(self.multiplier * np.fft.fftn(f.values)))

    @classmethod
    def gaussian(cls, grid, width, norm=0.5, phase=1.0):
        """Periodic Gaussian scaled so the spectral norm equals ``norm``."""
        idx = grid.folded_indices()
        mesh = np.meshgrid(*[i * h for i, h in zip(idx, grid.spacing)], indexing="ij")
        k = np.exp(-sum(x**2 for x in mesh) / (2 * width**2)).astype(complex)
        peak = np.abs(np.fft.fftn(k) * grid.cell_volume).max()
        return cls(Field(grid, k * (norm / peak) * phase))


@dataclass(frozen=True)
class InvertibilityDecision:
    invertible: bool
    minmod: float
    maxmod: float
    tol: float
    witness: tuple | None

    def __bool__(self):
        return self.invertible


def check_invertible(s: Symbol, tol=None) -> InvertibilityDecision:
    """Invertible iff min |A^| over nonzero frequencies >= tol (default 1e-6 * max|A^|)."""
    b = symbol_bounds(s)
    if tol is None:
        tol = max(1e-6 * b.maxmod, np.finfo(float).tiny)
    elif not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    ok = b.minmod >= tol
    return InvertibilityDecision(ok, b.minmod, b.maxmod, float(tol), None if ok else b.argmin)


def _require_invertible(s, tol):
    d = check_invertible(s, tol)
    if not d.invertible:
        raise EllipticityError(f"symbol nearly vanishes (min |A^| = {d.minmod:.3e} < {d.tol:.3e})",
                               frequency=d.witness, minmod=d.minmod)
    if abs(s.values.flat[0]) < d.tol:
        raise EllipticityError("symbol vanishes at zero frequency (a = 0): constants are in the kernel",
                               frequency=(0,) * s.grid.n, minmod=abs(s.values.flat[0]))
    return d


def solve_multiplier_equation(spec: EquationSpec, tol=None) -> Field:
    """f = F^{-1} (F g / A^)."""
    _require_invertible(spec.symbol, tol)
    return Field(spec.rhs.grid, np.fft.ifftn(np.fft.fftn(spec.rhs.values) / spec.symbol.values))


def _bump_spectrum(grid, center, radius):
    """cos^2 bump in index space of the given radius, centred (periodically) at ``center``."""
    idx = grid.folded_indices()
    d2 = 0.0
    for i, (ax, c, n) in enumerate(zip(idx, center, grid.sizes)):
        d = (ax - c + n // 2) % n - n // 2
        shape = [1] * grid.n
        shape[i] = n
        d2 = d2 + (d.astype(float) ** 2).reshape(shape)
    r = np.sqrt(d2)
    return np.where(r < radius, np.cos(0.5 * np.pi * r / radius) ** 2, 0.0)


@dataclass
class WitnessSequence:
    fields: list
    norms: list
    images: list
    center: tuple
    radii: list

    @property
    def monotone(self):
        return all(b <= a * (1 + 1e-12) for a, b in zip(self.images, self.images[1:]))

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)


def zero_divisor_witness(s: Symbol, count=5, tol=None) -> WitnessSequence:
    """Unit-norm fields y_k concentrating spectrally at the near-zero of A^.

    y_k is a smooth bump of radius 2^{-k} * (Nyquist index) around the
    argmin frequency, normalised in the sequence l2 norm.  ``images`` holds
    ||A y_k||_2, which for a symbol vanishing at the centre decreases with k.
    """
    d = check_invertible(s, tol)
    if d.invertible:
        raise PreconditionError("symbol is invertible; no zero-divisor witness exists")
    grid = s.grid
    nyq = min(grid.sizes) // 2
    fields, norms, images, radii = [], [], [], []
    for k in range(1, int(count) + 1):
        radius = max(nyq / 2**k, 1.0)
        spec = _bump_spectrum(grid, d.witness, radius)
        spec = spec / np.linalg.norm(spec)
        y = dft_inverse(Field(grid, spec))
        fields.append(y)
        norms.append(ell2_norm(y))
        images.append(ell2_norm(apply_multiplier(s, y)))
        radii.append(radius)
    return WitnessSequence(fields, norms, images, d.witness, radii)


def _dense_operator(mult):
    """Dense matrix of the circulant operator with the given multiplier."""
    grid_shape = mult.shape
    kernel = np.fft.ifftn(mult)
    n = kernel.size
    idx = np.indices(grid_shape).reshape(len(grid_shape), -1)
    diff = tuple((idx[i][:, None] - idx[i][None, :]) % grid_shape[i] for i in range(len(grid_shape)))
    mat = kernel[diff]
    mat[np.diag_indices(n)] += 1.0
    return mat


def solve_perturbed(spec: EquationSpec, kernel: CompactKernel, tol=1e-10, *, method="auto",
                    max_iter=500, inv_tol=None) -> Field:
    """Solve A f + T f = g through f + C T f = C g, C = A^{-1}.

    ``method``: ``"dense"`` (LU of the assembled matrix; the default when the
    lattice has at most 64^n points), ``"gmres"`` (the default otherwise) or
    ``"neumann"`` (fixed-point f <- C g - C T f; needs ||C T|| < 1).
    """
    s = spec.symbol
    g = spec.rhs
    if kernel.kernel.grid != g.grid:
        raise DimensionError("kernel and right-hand side live on different grids")
    _require_invertible(s, inv_tol)
    grid = g.grid
    cmult = 1.0 / s.values
    ct = cmult * kernel.multiplier
    cg = np.fft.ifftn(cmult * np.fft.fftn(g.values))

    if method == "auto":
        method = "dense" if grid.npoints <= DENSE_LIMIT**grid.n else "gmres"

    def residual(fv):
        af = np.fft.ifftn((s.values + kernel.multiplier) * np.fft.fftn(fv))
        return float(np.linalg.norm(af - g.values))

    gnorm = float(np.linalg.norm(g.values))
    history = []
    if method == "dense":
        mat = _dense_operator(ct)
        lu = scipy.linalg.lu_factor(mat, overwrite_a=True, check_finite=False)
        fv = scipy.linalg.lu_solve(lu, cg.ravel(), check_finite=False).reshape(grid.sizes)
        # one step of iterative refinement against the original equation
        r = g.values - np.fft.ifftn((s.values + kernel.multiplier) * np.fft.fftn(fv))
        fv = fv + scipy.linalg.lu_solve(lu, np.fft.ifftn(cmult * np.fft.fftn(r)).ravel(),
                                        check_finite=False).reshape(grid.sizes)
        history.append(residual(fv))
    elif method == "gmres":
        def matvec(x):
            x = x.reshape(grid.sizes)
            return (x + np.fft.ifftn(ct * np.fft.fftn(x))).ravel()

        op = LinearOperator((grid.npoints, grid.npoints), matvec=matvec, dtype=complex)
        cgn = float(np.linalg.norm(cg))
        fv, info = gmres(op, cg.ravel(), rtol=tol * 1e-2, atol=0.0, restart=min(50, grid.npoints),
                         maxiter=max_iter, callback=lambda pr: history.append(float(pr) * cgn),
                         callback_type="pr_norm")
        fv = fv.reshape(grid.sizes)
        history.append(residual(fv))
        if info > 0 and history[-1] > tol * gnorm:
            raise ConvergenceError(f"GMRES stopped after {info} iterations", history)
    elif method == "neumann":
        fv = cg.copy()
        for _ in range(max_iter):
            new = cg - np.fft.ifftn(ct * np.fft.fftn(fv))
            step = float(np.linalg.norm(new - fv))
            fv = new
            history.append(residual(fv))
            if step <= 1e-2 * tol * max(gnorm, 1e-300) or history[-1] <= 1e-2 * tol * gnorm:
                break
        else:
            raise ConvergenceError("Neumann iteration did not converge", history)
    else:
        raise ValueError(f"unknown method {method!r}")

    if history[-1] > tol * gnorm:
        raise ConvergenceError(f"residual {history[-1]:.3e} above target {tol * gnorm:.3e}", history)
    return Field(grid, fv)


@dataclass
class NeumannResult:
    solution: Field
    trace: list = field(default_factory=list)
    converged: bool = True

    @property
    def ratios(self):
        """Increment contraction ratios ||f_{j+1} - f_j|| / ||f_j - f_{j-1}||."""
        inc = [row[1] for row in self.trace]
        return [b / a for a, b in zip(inc, inc[1:]) if a > 0]

    @property
    def iterations(self):
        return len(self.trace)


def fixed_point_residual(mu: MuField, g: Field, f: Field, pi_f: Field | None = None) -> Field:
    """f - mu * Pi f - g."""
    if pi_f is None:
        from .beltrami import beurling_apply

        pi_f = beurling_apply(f)
    return f - mu.mu * pi_f - g


def neumann_solve(mu: MuField, g: Field, tol=1e-10, max_iter=500) -> NeumannResult:
    """Iterate f_{j+1} = g + mu * Pi f_j from f_0 = g until ||f_{j+1} - f_j|| <= tol ||g||.

    Pi has unit L2 norm, so the map is a q-contraction and the increments
    shrink at least by the factor q.  Trace rows are
    (iteration, ||f_j - f_{j-1}||, ||f_j - mu Pi f_j - g||).
    """
    from .beltrami import beurling_apply

    if g.grid.n != 2:
        raise DimensionError("the Beltrami-type equation is planar (n = 2)")
    if mu.mu.grid != g.grid:
        raise DimensionError("mu and g live on different grids")
    gnorm = ell2_norm(g)
    target = tol * gnorm
    f = g
    pf = beurling_apply(f)
    trace = []
    for j in range(1, int(max_iter) + 1):
        new = g + mu.mu * pf
        step = ell2_norm(new - f)
        f = new
        pf = beurling_apply(f)
        res = ell2_norm(f - mu.mu * pf - g)
        trace.append((j, step, res))
        if step <= target:
            return NeumannResult(f, trace, True)
    raise ConvergenceError(f"no convergence in {max_iter} iterations (last increment {trace[-1][1]:.3e})",
                           trace)


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "increment", "residual"])
        for j, inc, res in trace:
            w.writerow([j, repr(float(inc)), repr(float(res))])
