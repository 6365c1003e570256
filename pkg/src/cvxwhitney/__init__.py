"""Polynomial approximation of convex functions on convex bodies.

Grid-based best uniform approximation with dual certificates, moduli of
smoothness, convexity-preserving repairs of quadratic approximants and the
witness functions used to chart Whitney-type ratios E_{m-1} / omega_m.
"""

from .approx import (ApproxSolution, best_uniform, best_uniform_on_points, e1_convex,
                     e1_dual_certificate, symmetric_linear_approx, verify_certificate)
from .convexify import RepairResult, convexify_in_position, convexify_quadratic, convexify_smooth
from .errors import (CertificateUnavailable, DegenerateBodyError, DegenerateGridError, InputError,
                     LPError, NotAWitness, PreconditionError, VerificationFailed, WhitneyError)
from .geometry import (AffineMap, ConvexBody, GridSpec, banach_mazur_upper, canonical_position,
                       contains, sample_grid, transform)
from .polynomials import (Polynomial, hessian_min_eig_on, is_convex_on, parse_polynomial,
                          quadratic_parts, symm_eig)
from .smoothness import ScalarField, finite_difference, lattice_modulus, modulus
from .whitney import WhitneyEstimate, WitnessFunction, entropy_fn, prop18_f, ramp, whitney_ratio

__version__ = "0.1.0"
