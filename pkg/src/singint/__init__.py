"""Singular integral operators with homogeneous kernels on periodic grids."""

from .beltrami import (Homeomorphism, beltrami_residual, beurling_apply, beurling_symbol, build_homeomorphism,
                       cauchy_transform)
from .besov import BesovQuadrature, BoundReport, besov_norm, besov_seminorm, verify_operator_bound
from .characteristic import Characteristic, ValidationReport, eval_characteristic, validate_characteristic
from .equations import (CompactKernel, EquationSpec, MuField, check_invertible, fixed_point_residual, neumann_solve,
                        solve_multiplier_equation, solve_perturbed, zero_divisor_witness)
from .errors import (ConvergenceError, DimensionError, EllipticityError, PreconditionError, SingIntError,
                     ValidationError)
from .fields import (BesovParams, Field, GridSpec, circular_shift, dft_forward, dft_inverse, ell2_norm,
                     finite_difference, gaussian, lp_norm, plane_wave, smooth_bump)
from .operators import apply_multiplier, apply_pv
from .symbol import Symbol, adjoint_symbol, compute_symbol, symbol_bounds

__version__ = "0.1.0"
