"""Cone-degenerate differential operators, their model wedge operators and ray conditions.

Operators are ``A = x^{-m} sum_j x^j L_j(x D_x)`` on ``(0, 1]`` with ``N x N`` matrix
coefficients. The package computes boundary spectra, singular-function bases of the
domain quotients, the map ``theta`` between operator and model quotients, finite
difference realizations of closed extensions, bordered reductions to the boundary and
resolvent probes along rays.
"""
from .border import (BorderedFamily, IndexJump, SpectrumHit, arc_samples, border_family, extend_homogeneous,
                     homogeneity_relation_residual, reduce_to_boundary, resolvent)
from .discrete import (MAXIMAL, MINIMAL, Cutoff, DiscreteOperator, DiscreteSpace, DiscretizationError,
                       DminNonsimple, ExtensionSpec, a_tau, assemble, build_space, eigenvalues, graph_norm,
                       homogeneity_residual, injectivity_modulus, ker_coker, kappa_discrete, resolvent_norm)
from .io import RunConfig, ValidationError, load_extension, problem_from_json, problem_to_json, validate_problem
from .mellin import (BoundarySpectrum, ConeProblem, ConormalFamily, LaurentSeries, LaurentVerificationFailed,
                     NotConeElliptic, boundary_spectrum, conjugate_weight, conormal_family, formal_adjoint,
                     laurent_inverse)
from .probes import (a_tau_convergence, bg_spectrum_scan, csymbol_ray_check, f_vs_fwedge, ktilde_estimates,
                     minimal_growth_sweep, reduction_comparison, relative_index_ladder, smax_condition_check)
from .singular import (NonSimpleDomain, SingularFunction, apply_b_operator, mellin_singular_part,
                       quotient_dimension, singular_from_principal_part, strip_sigma, wedge_quotient_basis)
from .theta import (AmbiguousAttribution, L_rho, domain_transfer, e_recursion, e_rho, kappa_on_singular,
                    kappa_tilde, theta, theta_forward, theta_inverse)

__version__ = "0.1.0"
