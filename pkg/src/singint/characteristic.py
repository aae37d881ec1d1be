"""Characteristics Omega(theta) on the unit sphere and their admissibility checks.

Representation by dimension:

* n = 1: the sphere is {+1, -1}; Omega is two complex numbers.
* n = 2: a finite Fourier series sum_{|k| <= K} c_k e^{ik theta}.
* n = 3: values on a sphere quadrature (nodes, weights); evaluation between
  nodes is nearest-neighbour.

Omega is only ever evaluated on the sphere, so homogeneity of degree zero
holds by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "Characteristic",
    "ValidationReport",
    "validate_characteristic",
    "eval_characteristic",
    "MEAN_ZERO_TOL",
]

MEAN_ZERO_TOL = 1e-10
DEFAULT_ORDER = 8


@dataclass(frozen=True, eq=False)
class Characteristic:
    n: int
    values: np.ndarray = field(repr=False)
    modes: np.ndarray | None = field(default=None, repr=False)
    nodes: np.ndarray | None = field(default=None, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)
    order: int = DEFAULT_ORDER
    name: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128).ravel()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.n == 1:
            if vals.size != 2:
                raise ValidationError("n=1 characteristic needs exactly (Omega(+1), Omega(-1))")
        elif self.n == 2:
            modes = np.array(self.modes, dtype=int).ravel()
            if modes.size != vals.size:
                raise ValidationError("one coefficient per Fourier mode is required")
            if modes.size and np.abs(modes).max() > self.order:
                raise ValidationError(f"mode {np.abs(modes).max()} exceeds truncation order {self.order}")
            if len(set(modes.tolist())) != modes.size:
                raise ValidationError("duplicate Fourier modes")
            modes.flags.writeable = False
            object.__setattr__(self, "modes", modes)
        elif self.n == 3:
            nodes = np.array(self.nodes, dtype=float).reshape(-1, 3)
            weights = np.array(self.weights, dtype=float).ravel()
            if not (nodes.shape[0] == weights.size == vals.size):
                raise ValidationError("nodes, weights and values must have equal length")
            if not np.allclose(np.linalg.norm(nodes, axis=1), 1.0, atol=1e-12):
                raise ValidationError("sphere nodes must be unit vectors")
            nodes.flags.writeable = False
            weights.flags.writeable = False
            object.__setattr__(self, "nodes", nodes)
            object.__setattr__(self, "weights", weights)
        else:
            raise ValidationError(f"unsupported dimension {self.n}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("characteristic values must be finite")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_values(cls, plus, minus, name=""):
        """One-dimensional characteristic (Omega(+1), Omega(-1))."""
        return cls(1, [plus, minus], name=name)

    @classmethod
    def from_coefficients(cls, coeffs, order=DEFAULT_ORDER, name=""):
        """Planar characteristic from a mapping ``{k: c_k}``."""
        items = sorted(coeffs.items())
        return cls(2, [c for _, c in items], modes=[k for k, _ in items], order=order, name=name)

    @classmethod
    def from_samples(cls, nodes, weights, values, name=""):
        return cls(3, values, nodes=nodes, weights=weights, name=name)

    @classmethod
    def on_sphere(cls, func, n_polar=24, n_azimuth=48, name=""):
        """Sample ``func(unit_vectors)`` on a Gauss-Legendre x trapezoid product rule."""
        nodes, weights = sphere_quadrature(n_polar, n_azimuth)
        return cls.from_samples(nodes, weights, func(nodes), name=name)

    @classmethod
    def beurling(cls):
        """-(1/pi) e^{-2i theta}: the kernel of the planar Beurling transform."""
        return cls.from_coefficients({-2: -1.0 / math.pi}, name="beurling")

    @classmethod
    def zero(cls, n=2):
        if n == 1:
            return cls.from_values(0, 0, name="zero")
        if n == 2:
            return cls.from_coefficients({}, name="zero")
        nodes, weights = sphere_quadrature(4, 8)
        return cls.from_samples(nodes, weights, np.zeros(len(weights)), name="zero")

    # -- structure ------------------------------------------------------------

    @property
    def coefficients(self):
        if self.n != 2:
            raise ValidationError("Fourier coefficients exist only for n=2")
        return dict(zip(self.modes.tolist(), self.values.tolist()))

    def rotated(self, alpha):
        """Omega(theta - alpha) for n = 2."""
        if self.n != 2:
            raise ValidationError("rotation is implemented for n=2 only")
        return Characteristic(2, self.values * np.exp(-1j * self.modes * alpha), modes=self.modes,
                              order=self.order, name=self.name)

    def __add__(self, other):
        if self.n != other.n:
            raise ValidationError("cannot add characteristics of different dimension")
        if self.n == 1:
            return Characteristic.from_values(*(self.values + other.values))
        if self.n == 2:
            acc = dict(self.coefficients)
            for k, c in other.coefficients.items():
                acc[k] = acc.get(k, 0) + c
            return Characteristic.from_coefficients(acc, order=max(self.order, other.order))
        if self.nodes.shape != other.nodes.shape or not np.array_equal(self.nodes, other.nodes):
            raise ValidationError("n=3 characteristics must share their sphere quadrature to be added")
        return Characteristic.from_samples(self.nodes, self.weights, self.values + other.values)

    def __mul__(self, s):
        out = Characteristic(self.n, self.values * complex(s), modes=self.modes, nodes=self.nodes,
                             weights=self.weights, order=self.order, name=self.name)
        return out

    __rmul__ = __mul__

    def quadrature(self, min_nodes=0):
        """Sphere quadrature ``(directions, weights, values)`` used for integrals of Omega."""
        if self.n == 1:
            return np.array([[1.0], [-1.0]]), np.ones(2), self.values
        if self.n == 2:
            m = max(1024, 16 * self.order, int(min_nodes))
            t = 2 * np.pi * np.arange(m) / m
            dirs = np.stack([np.cos(t), np.sin(t)], axis=1)
            return dirs, np.full(m, 2 * np.pi / m), self._fourier(t)
        return self.nodes, self.weights, self.values

    def _fourier(self, t):
        t = np.asarray(t, float)
        out = np.zeros(t.shape, complex)
        for k, c in zip(self.modes, self.values):
            out += c * np.exp(1j * k * t)
        return out

    def evaluate(self, directions):
        """Vectorised evaluation on an array of unit vectors of shape (..., n)."""
        d = np.asarray(directions, float)
        if self.n == 1:
            d = d.reshape(d.shape[:-1]) if d.ndim and d.shape[-1:] == (1,) else d
            return np.where(d > 0, self.values[0], self.values[1])
        if self.n == 2:
            return self._fourier(np.arctan2(d[..., 1], d[..., 0]))
        flat = d.reshape(-1, 3)
        idx = np.argmax(flat @ self.nodes.T, axis=1)
        return self.values[idx].reshape(d.shape[:-1])

    # -- serialisation --------------------------------------------------------

    def to_json(self):
        if self.n == 1:
            p, m = self.values
            return {"n": 1, "plus": {"re": p.real, "im": p.imag}, "minus": {"re": m.real, "im": m.imag}}
        if self.n == 2:
            return {"n": 2, "order": self.order,
                    "coeffs": [{"k": int(k), "re": c.real, "im": c.imag} for k, c in zip(self.modes, self.values)]}
        return {"n": 3, "samples": [
            {"x": x, "y": y, "z": z, "w": w, "re": v.real, "im": v.imag}
            for (x, y, z), w, v in zip(self.nodes.tolist(), self.weights.tolist(), self.values.tolist())]}

    @classmethod
    def from_json(cls, d):
        try:
            n = int(d["n"])
            if n == 1:
                return cls.from_values(complex(d["plus"]["re"], d["plus"].get("im", 0.0)),
                                       complex(d["minus"]["re"], d["minus"].get("im", 0.0)))
            if n == 2:
                coeffs = {}
                for e in d["coeffs"]:
                    k = int(e["k"])
                    coeffs[k] = coeffs.get(k, 0) + complex(e.get("re", 0.0), e.get("im", 0.0))
                order = int(d.get("order", max([DEFAULT_ORDER] + [abs(k) for k in coeffs])))
                return cls.from_coefficients(coeffs, order=order)
            if n == 3:
                s = d["samples"]
                nodes = [[e["x"], e["y"], e["z"]] for e in s]
                return cls.from_samples(nodes, [e["w"] for e in s],
                                        [complex(e.get("re", 0.0), e.get("im", 0.0)) for e in s])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed characteristic descriptor: {exc}") from exc
        raise ValidationError(f"unsupported dimension {d.get('n')}")


def sphere_quadrature(n_polar, n_azimuth):
    """Product rule on S^2: Gauss-Legendre in cos(colatitude), uniform in azimuth."""
    x, wx = np.polynomial.legendre.leggauss(n_polar)
    phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1 - ct**2)
    nodes = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    weights = np.repeat(wx * (2 * np.pi / n_azimuth), n_azimuth)
    return nodes, weights


@dataclass(frozen=True)
class ValidationReport:
    n: int
    gamma: float
    mean_residual: float
    lgamma_norm: float
    mean_zero: bool
    integrable: bool
    homogeneous: bool = True
    quadrature: str = ""

    @property
    def passed(self):
        return self.mean_zero and self.integrable and self.homogeneous

    def to_json(self):
        return {
            "n": self.n, "gamma": self.gamma, "mean_residual": self.mean_residual,
            "lgamma_norm": self.lgamma_norm, "mean_zero": self.mean_zero,
            "integrable": self.integrable, "homogeneous": self.homogeneous,
            "quadrature": self.quadrature, "passed": self.passed,
        }


_QUADRATURE_NAMES = {
    1: "two-point counting measure on {+1,-1}",
    2: "trapezoid rule on the circle",
    3: "Gauss-Legendre x trapezoid product rule on the sphere",
}


def validate_characteristic(c: Characteristic, gamma: float = 2.0) -> ValidationReport:
    """Check mean zero over the sphere and finiteness of the L^gamma sphere norm.

    The mean residual is |sphere average of Omega|; for n = 2 it is exactly |c_0|.
    """
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    if c.n == 2:
        coeffs = c.coefficients
        residual = abs(coeffs.get(0, 0.0))
    else:
        _, w, v = c.quadrature()
        residual = abs(np.sum(w * v)) / np.sum(w)
    _, w, v = c.quadrature()
    norm = float(np.sum(w * np.abs(v) ** gamma) ** (1.0 / gamma))
    return ValidationReport(
        n=c.n, gamma=float(gamma), mean_residual=float(residual), lgamma_norm=norm,
        mean_zero=bool(residual <= MEAN_ZERO_TOL), integrable=bool(math.isfinite(norm)),
        quadrature=_QUADRATURE_NAMES[c.n],
    )


def eval_characteristic(c: Characteristic, direction) -> complex:
    d = np.atleast_1d(np.asarray(direction, float))
    if d.shape != (c.n,):
        raise ValueError(f"direction must have {c.n} components")
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return complex(c.evaluate(d[None, :])[0])
