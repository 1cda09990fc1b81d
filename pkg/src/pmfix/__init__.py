"""Probabilistic metric spaces, contraction checks and certified Picard iteration."""

from .algebra import (LUKASIEWICZ, MIN, PRODUCT, TNorm, TriangleMode, apply_tnorm, check_tnorm_axioms,
                      check_triangle_axioms, is_idempotent_dominant, tau_pointwise, tau_star)
from .contraction import (SelfMap, b_contraction_check, estimate_min_k, h_contraction_check,
                          tsr_defect, tsr_p_defect)
from .ddf import H0, Ddf, dirac, geq, is_h0, plateau
from .solver import IterationTrace, picard, picard_in_sphere, power_picard, verify_uniqueness
from .space import (PMSpace, SphereSpec, SequenceDiagnostics, build_space, check_axioms,
                    check_cauchy_prefix, check_convergence, check_joint_limit, is_t_closed,
                    simple_space, sphere_members, ultrametric_plateau_space)

__version__ = "0.1.0"
