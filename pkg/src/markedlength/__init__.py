"""Marked length spectra, contracting projections and Manhattan curves on
free groups and free products of free and free abelian groups."""

from .contracting import (ContractingAxis, contraction_constant, elementary_membership,
                          elliptic_radical, lemma_audit, proj_diameter, project,
                          quasiconvexity_audit, weakly_independent)
from .errors import (DegenerateError, DivergenceRiskError, GroupInputError, MarkedLengthError,
                     PrecisionError, ResourceBudgetError, UnsupportedError, WindowExhaustedError)
from .groups import (ConjugacyKey, GroupElement, MarkedGroup, conjugacy_key, cyclic_reduce,
                     enumerate_ball, enumerate_conjugacy_reps, enumerate_sphere, inverse,
                     is_conjugate, multiply, power, sphere_size)
from .manhattan import (conj_growth_rate, critical_exponent, growth_rate, line_test,
                        manhattan_curve, poincare_partial)
from .metrics import (CombinedMetric, FreeProductMetric, GreenMetric, RandomWalkMeasure,
                      ScaledMetric, WordMetric, delta_estimate, distance, geodesic, green_distance,
                      green_function, gromov_product, spectral_radius_estimate)
from .mls import (algebraic_length, coarse_additivity_check, confined_check, dilation_bounds,
                  length_profile, mls_compare, rough_isometry_certificate, stable_length,
                  stable_length_profile)
from .paths import (AdmissiblePathSpec, Segment, check_admissible, extension_certificate,
                    extension_search, perturbation_search, simultaneous_extension)

__version__ = "0.1.0"
