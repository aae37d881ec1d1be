import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from singint import (Characteristic, GridSpec, Symbol, adjoint_symbol, apply_multiplier, apply_pv, compute_symbol,
                     smooth_bump, symbol_bounds)
from singint.errors import DimensionError, ValidationError


def polar(grid):
    k1, k2 = grid.frequency_mesh()
    return np.hypot(k1, k2), np.arctan2(k2, k1)


def test_zero_characteristic(grid64):
    s = compute_symbol(Characteristic.zero(), 3, grid64)
    assert np.all(s.values == 3)
    assert symbol_bounds(s).minmod == symbol_bounds(s).maxmod == 3


def test_beurling_matches_closed_form(grid64):
    k1, k2 = grid64.frequency_mesh()
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = (k1 - 1j * k2) / (k1 + 1j * k2)
    exact[0, 0] = 0
    s = compute_symbol(Characteristic.beurling(), 0, grid64)
    assert np.abs(s.values - exact).max() <= 1e-12
    b = symbol_bounds(s)
    assert abs(b.minmod - 1) <= 2e-2 and abs(b.maxmod - 1) <= 2e-2


@pytest.mark.parametrize("k", [1, -1, 2, 3, -4, 5, 6, -7, 8])
def test_planar_harmonics_closed_form(grid64, k):
    # even k = 2j: pi (-1)^j / |j|;  odd k: 2 pi i (-1)^{(|k|-1)/2} / |k|   (times e^{ik phi})
    j = abs(k)
    const = math.pi * (-1) ** (j // 2) / (j // 2) if k % 2 == 0 else 2j * math.pi * (-1) ** ((j - 1) // 2) / j
    rho, phi = polar(grid64)
    exact = const * np.exp(1j * k * phi)
    exact[0, 0] = 0
    s = compute_symbol(Characteristic.from_coefficients({k: 1.0}), 0, grid64)
    assert np.abs(s.values - exact).max() <= 1e-12


def test_hilbert_type_symbol():
    g = GridSpec.square(1, 64)
    xi = g.frequencies()[0]
    s = compute_symbol(Characteristic.from_values(1, -1), 0.5, g)
    exact = 0.5 + 1j * math.pi * np.sign(xi)
    exact[0] = 0.5
    assert np.abs(s.values - exact).max() <= 1e-14
    assert np.ptp(np.abs(s.values[1:])) <= 1e-14


def test_three_dimensional_odd_kernel():
    # Omega = x_3: only the sign part survives, giving i pi^2 xi_3 / |xi|; R = L/2 leaves an O(1/(|xi| R)) ripple
    g = GridSpec.square(3, 16)
    s = compute_symbol(Characteristic.on_sphere(lambda x: x[:, 2]), 0, g)
    k1, k2, k3 = g.frequency_mesh()
    rho = np.sqrt(k1**2 + k2**2 + k3**2)
    far = rho >= 4
    exact = 1j * math.pi**2 * k3[far] / rho[far]
    assert np.abs(s.values[far] - exact).max() <= 1e-2 * math.pi**2


@pytest.mark.parametrize("coeffs", [{-2: -1 / math.pi}, {1: 1.0, 3: -0.5j}])
def test_lattice_symbol_is_the_pv_sum(grid64, coeffs):
    c = Characteristic.from_coefficients(coeffs)
    h = grid64.spacing[0]
    s = compute_symbol(c, 0, grid64, 2 * h, grid64.period / 4, method="lattice")
    f = smooth_bump(grid64, (0.3, 0.0), grid64.period / 6)
    a = apply_multiplier(s, f).values
    b = apply_pv(c, f, 2 * h, grid64.period / 4).values
    assert np.linalg.norm(a - b) <= 1e-12 * np.linalg.norm(b)


def test_continuum_truncated_matches_lattice_at_low_frequency(grid64):
    c = Characteristic.beurling()
    h = grid64.spacing[0]
    cont = compute_symbol(c, 0, grid64, 2 * h, grid64.period / 4)
    lat = compute_symbol(c, 0, grid64, 2 * h, grid64.period / 4, method="lattice")
    rho, _ = polar(grid64)
    low = rho <= 0.25 * grid64.nyquist
    assert np.abs(cont.values[low] - lat.values[low]).max() <= 1e-2


def test_zero_frequency_is_a(grid64):
    for method in ("continuum", "lattice"):
        s = compute_symbol(Characteristic.beurling(), 2 - 1j, grid64, method=method)
        assert s.values[0, 0] == 2 - 1j


@given(st.dictionaries(st.integers(-6, 6).filter(bool), st.complex_numbers(max_magnitude=2), min_size=1,
                       max_size=3),
       st.dictionaries(st.integers(-6, 6).filter(bool), st.complex_numbers(max_magnitude=2), min_size=1,
                       max_size=3))
def test_linearity(c1, c2):
    g = GridSpec.square(2, 16)
    a = Characteristic.from_coefficients(c1)
    b = Characteristic.from_coefficients(c2)
    lhs = compute_symbol(a + b, 0, g).values
    rhs = compute_symbol(a, 0, g).values + compute_symbol(b, 0, g).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())


def test_homogeneity_along_rays():
    g = GridSpec.square(2, 128)
    s = compute_symbol(Characteristic.from_coefficients({1: 1.0, -2: 0.3, 4: 1j}), 0, g)
    nyq = g.sizes[0] // 2
    rho, _ = polar(g)
    band = (rho >= nyq / 8) & (rho <= nyq / 3)
    checked = 0
    for direction in [(1, 0), (1, 1), (2, 1), (-1, 3)]:
        for r in range(1, nyq):
            k = [r * d for d in direction]
            k2 = [2 * r * d for d in direction]
            if max(map(abs, k2)) >= nyq or not (band[tuple(k)] and band[tuple(k2)]):
                continue
            assert abs(s.values[tuple(k)] - s.values[tuple(k2)]) <= 1e-12
            checked += 1
    assert checked >= 5


def test_stability_warning(grid64):
    h = grid64.spacing[0]
    assert compute_symbol(Characteristic.beurling(), 0, grid64, 2 * h, grid64.period / 2).warnings == ()
    s = compute_symbol(Characteristic.beurling(), 0, grid64, 8 * h, grid64.period / 2)
    assert s.warnings and "halving" in s.warnings[0]


def test_argument_checks(grid64):
    with pytest.raises(ValueError):
        compute_symbol(Characteristic.beurling(), 0, grid64, 1.0, 0.5)
    with pytest.raises(ValueError):
        compute_symbol(Characteristic.beurling(), 0, grid64, 0.1, grid64.period)
    with pytest.raises(ValidationError):
        compute_symbol(Characteristic.from_coefficients({0: 1.0}), 0, grid64)
    with pytest.raises(DimensionError):
        compute_symbol(Characteristic.from_values(1, -1), 0, grid64)


def test_one_plus_beurling_has_a_near_zero(grid64):
    s = compute_symbol(Characteristic.beurling(), 1, grid64)
    b = symbol_bounds(s)
    assert b.minmod <= 1e-12 and abs(b.maxmod - 2) <= 1e-12
    # |1 + e^{-2 i phi}| = 2 |cos phi| vanishes on the xi_2 axis; smallest index there is (0, -32)
    assert b.argmin == (0, -32)


def test_bounds_tie_break(grid64):
    assert symbol_bounds(Symbol.constant(grid64, 3)).argmin == (-32, -32)
    z = symbol_bounds(Symbol.constant(grid64, 0))
    assert z.minmod == z.maxmod == 0 and z.argmin == (-32, -32)


def test_adjoint(grid64, rng):
    s = compute_symbol(Characteristic.from_coefficients({1: 1.0, -2: 0.5j}), 0.3 + 0.2j, grid64)
    t = adjoint_symbol(s)
    assert np.array_equal(adjoint_symbol(t).values, s.values)
    assert adjoint_symbol(Symbol.constant(grid64, 1j)).values[3, 4] == -1j
    real = Symbol.constant(grid64, 2.5)
    assert np.array_equal(adjoint_symbol(real).values, real.values)
    for _ in range(5):
        f, g = random_field(grid64, rng), random_field(grid64, rng)
        lhs = np.vdot(g.values, apply_multiplier(s, f).values)
        rhs = np.vdot(apply_multiplier(t, g).values, f.values)
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_symbol_never_reads_fields(grid64, monkeypatch):
    import singint.fields as fields_mod

    def boom(*a, **k):
        raise AssertionError("field touched")

    monkeypatch.setattr(fields_mod.Field, "__post_init__", boom)
    compute_symbol(Characteristic.beurling(), 0, grid64)
