import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_field
from singint import (Characteristic, CompactKernel, EquationSpec, Field, GridSpec, MuField, Symbol,
                     apply_multiplier, beltrami_residual, beurling_apply, check_invertible, compute_symbol,
                     ell2_norm, fixed_point_residual, gaussian, neumann_solve, smooth_bump, solve_multiplier_equation,
                     solve_perturbed, zero_divisor_witness)
from singint.equations import write_trace_csv
from singint.errors import (ConvergenceError, DimensionError, EllipticityError, PreconditionError,
                            ValidationError)

G32 = GridSpec.square(2, 32)


def beurling(grid, a):
    return compute_symbol(Characteristic.beurling(), a, grid)


# -- invertibility ------------------------------------------------------------

def test_constant_symbols(grid64):
    assert check_invertible(Symbol.constant(grid64, 2)).invertible
    d = check_invertible(Symbol.constant(grid64, 0))
    assert not d.invertible and d.witness == (-32, -32)


def test_one_plus_beurling_not_invertible(grid64):
    d = check_invertible(beurling(grid64, 1))
    assert not d and d.minmod < d.tol and d.witness == (0, -32)
    assert check_invertible(beurling(grid64, 3))


def test_tolerance_must_be_positive(grid64):
    with pytest.raises(ValueError):
        check_invertible(Symbol.constant(grid64, 1), 0.0)


# -- multiplier equation ------------------------------------------------------

def test_scalar_equation(grid64, rng):
    g = random_field(grid64, rng)
    s = compute_symbol(Characteristic.zero(), 2, grid64)
    f = solve_multiplier_equation(EquationSpec(s, g))
    assert np.abs(f.values - g.values / 2).max() <= 1e-14 * g.supnorm


def test_zero_rhs(grid64):
    f = solve_multiplier_equation(EquationSpec(beurling(grid64, 3), Field.zeros(grid64)))
    assert f.supnorm == 0


def test_round_trip_and_residual(grid64, rng):
    s = beurling(grid64, 3)
    sing = s.without_constant()
    for _ in range(5):
        f0 = random_field(grid64, rng, smooth=True)
        g = 3 * f0 + apply_multiplier(sing, f0)
        f = solve_multiplier_equation(EquationSpec(s, g))
        assert ell2_norm(f - f0) <= 1e-10 * ell2_norm(f0)
        assert ell2_norm(3 * f + apply_multiplier(sing, f) - g) <= 1e-10 * ell2_norm(g)


def test_non_invertible_raises(grid64, rng):
    with pytest.raises(EllipticityError) as exc:
        solve_multiplier_equation(EquationSpec(beurling(grid64, 1), random_field(grid64, rng)))
    assert exc.value.frequency == (0, -32)


def test_zero_frequency_obstruction(grid64, rng):
    # a = 0 with a unimodular singular part: nonzero frequencies are fine but constants are annihilated
    with pytest.raises(EllipticityError):
        solve_multiplier_equation(EquationSpec(beurling(grid64, 0), random_field(grid64, rng)))


def test_grid_mismatch(grid64):
    with pytest.raises(DimensionError):
        EquationSpec(beurling(grid64, 3), Field.zeros(G32))


def test_solver_operator_duality(grid64):
    s = compute_symbol(Characteristic.from_coefficients({1: 1.0, -2: 0.5j}), 4 - 1j, grid64)
    r = np.random.default_rng(7)
    for _ in range(100):
        g = random_field(grid64, r)
        back = apply_multiplier(s, solve_multiplier_equation(EquationSpec(s, g)))
        assert ell2_norm(back - g) <= 1e-10 * ell2_norm(g)


# -- zero-divisor witness -----------------------------------------------------

def test_witness_for_zero_symbol(grid64):
    w = zero_divisor_witness(Symbol.constant(grid64, 0), 4)
    assert len(w) == 4 and all(i == 0 for i in w.images)
    assert all(abs(n - 1) <= 1e-14 for n in w.norms)


def test_witness_for_one_plus_beurling(grid64):
    w = zero_divisor_witness(beurling(grid64, 1), 5)
    assert all(abs(n - 1) <= 1e-14 for n in w.norms)
    assert w.monotone and w.images[-1] <= 0.1


def test_witness_monotone_for_point_zero():
    g = GridSpec.square(2, 256)
    k1, k2 = g.frequency_mesh()
    xi0 = (10, -7)
    dist = np.hypot(k1 - xi0[0], k2 - xi0[1])
    s = Symbol(g, 1.0, np.minimum(dist, 5.0) * np.exp(1j * np.arctan2(k2, k1)) + 0.0)
    w = zero_divisor_witness(s, 6)
    assert w.center == xi0
    assert all(b <= a for a, b in zip(w.images, w.images[1:]))
    # the last image is bounded by the largest |A^| on the smallest bump
    assert w.images[-1] <= np.abs(s.values[dist <= w.radii[-1]]).max()


def test_witness_requires_non_invertible(grid64):
    with pytest.raises(PreconditionError):
        zero_divisor_witness(beurling(grid64, 3), 3)


# -- compact perturbation -----------------------------------------------------

def test_kernel_norm_and_decay(grid64):
    k = CompactKernel.gaussian(grid64, grid64.period / 20)
    assert math.isclose(k.spectral_norm, 0.5, rel_tol=1e-12)
    spike = np.zeros(grid64.sizes)
    spike[0, 0] = 1
    with pytest.raises(ValidationError):
        CompactKernel(Field(grid64, spike))


def test_zero_perturbation_reduces(grid64, rng):
    s = beurling(grid64, 3)
    g = random_field(grid64, rng, smooth=True)
    spec = EquationSpec(s, g)
    zero = CompactKernel(Field.zeros(grid64))
    direct = solve_multiplier_equation(spec)
    for method in ("gmres", "neumann"):
        f = solve_perturbed(spec, zero, method=method)
        assert ell2_norm(f - direct) <= 1e-12 * ell2_norm(direct)


def test_identity_plus_smoothing(rng):
    g32 = G32
    s = Symbol.constant(g32, 1)
    k = CompactKernel.gaussian(g32, g32.period / 14)
    g = random_field(g32, rng)
    for method in ("dense", "neumann", "gmres"):
        f = solve_perturbed(EquationSpec(s, g), k, 1e-10, method=method)
        assert ell2_norm(f + k.apply(f) - g) <= 1e-10 * ell2_norm(g)


def test_manufactured_solution_large_grid(grid128, rng):
    s = beurling(grid128, 3)
    k = CompactKernel.gaussian(grid128, grid128.period / 20, phase=-1j)
    f0 = random_field(grid128, rng, smooth=True)
    g = apply_multiplier(s, f0) + k.apply(f0)
    f = solve_perturbed(EquationSpec(s, g), k, 1e-10)
    assert ell2_norm(f - f0) <= 1e-9 * ell2_norm(f0)


def test_small_perturbation_limit(rng):
    s = beurling(G32, 3)
    g = random_field(G32, rng, smooth=True)
    spec = EquationSpec(s, g)
    base = solve_multiplier_equation(spec)
    dist = []
    for eps in (1e-1, 1e-2, 1e-3):
        k = CompactKernel.gaussian(G32, G32.period / 14, norm=eps)
        dist.append(ell2_norm(solve_perturbed(spec, k, method="dense") - base))
    assert dist[0] > dist[1] > dist[2] > 0


def test_perturbed_errors(rng):
    g = random_field(G32, rng)
    k = CompactKernel.gaussian(G32, G32.period / 14)
    with pytest.raises(EllipticityError):
        solve_perturbed(EquationSpec(beurling(G32, 1), g), k)
    with pytest.raises(ConvergenceError) as exc:
        solve_perturbed(EquationSpec(Symbol.constant(G32, 0.3), g), k, method="neumann", max_iter=30)
    assert len(exc.value.history) == 30 and exc.value.history[-1] > exc.value.history[0]
    with pytest.raises(ValueError):
        solve_perturbed(EquationSpec(Symbol.constant(G32, 1), g), k, method="cholesky")


# -- contraction equation ------------------------------------------------------

def bump_mu(grid, q, center=(0.1, -0.2)):
    return MuField(smooth_bump(grid, center, grid.period / 8, q), q)


def test_mu_field_checks(grid64):
    with pytest.raises(PreconditionError):
        MuField(smooth_bump(grid64, amplitude=0.5), 1.0)
    with pytest.raises(ValidationError):
        MuField(smooth_bump(grid64, amplitude=0.6), 0.5)
    with pytest.raises(ValidationError):
        MuField(Field.constant(grid64, 0.1), 0.5)
    assert MuField.tight(smooth_bump(grid64, amplitude=0.4)).q == pytest.approx(0.4)


def test_zero_mu(grid64, rng):
    g = random_field(grid64, rng)
    r = neumann_solve(MuField(Field.zeros(grid64), 0.0), g)
    assert r.iterations == 1 and np.array_equal(r.solution.values, g.values)


def test_zero_rhs_neumann(grid64):
    r = neumann_solve(bump_mu(grid64, 0.5), Field.zeros(grid64))
    assert r.solution.supnorm == 0


def test_contraction(grid128):
    mu = bump_mu(grid128, 0.5)
    g = gaussian(grid128, (0.0, 0.1), grid128.period / 16)
    r = neumann_solve(mu, g, 1e-10)
    assert all(x <= 0.55 for x in r.ratios[1:])
    res = fixed_point_residual(mu, g, r.solution)
    assert ell2_norm(res) <= 1e-8 * ell2_norm(g)
    # independent check with a fresh Beurling application
    pi_f = compute_symbol(Characteristic.beurling(), 0, grid128)
    alt = r.solution - mu.mu * apply_multiplier(pi_f, r.solution) - g
    assert ell2_norm(alt) <= 1e-8 * ell2_norm(g)


def test_neumann_errors(grid64):
    mu = bump_mu(grid64, 0.9)
    g = gaussian(grid64)
    with pytest.raises(ConvergenceError) as exc:
        neumann_solve(mu, g, 1e-14, max_iter=3)
    assert len(exc.value.history) == 3
    g1 = GridSpec.square(1, 64)
    with pytest.raises(DimensionError):
        neumann_solve(MuField(Field.zeros(g1), 0.5), Field.zeros(g1))


def test_fixed_point_residual_matches_beltrami(grid64):
    mu = bump_mu(grid64, 0.3)
    f = neumann_solve(mu, mu.mu, 1e-4).solution
    pf = beurling_apply(f)
    mask = grid64.central_mask()
    res = fixed_point_residual(mu, mu.mu, f, pf).values[mask]
    expect = np.linalg.norm(res) / np.linalg.norm(1 + pf.values[mask])
    assert abs(beltrami_residual(f, pf, mu) - expect) <= 1e-12 * expect


def test_trace_csv(tmp_path, grid64):
    r = neumann_solve(bump_mu(grid64, 0.5), gaussian(grid64))
    write_trace_csv(tmp_path / "t.csv", r.trace)
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["iteration", "increment", "residual"] and len(rows) == r.iterations + 1
    assert float(rows[-1][1]) == r.trace[-1][1]
