"""Rigorous desk-scale machinery for Carleman classes with uniform
asymptotic expansions: weight-sequence growth conditions, certified
expansion arithmetic under product and composition, the characteristic
transform, and remainder verification sweeps on sectors of the Riemann
surface of the logarithm."""

from .basis_fn import (EvaluableFunction, constant_minus, e_tilde,
                       f_alpha_alphaprime, gamma_real, k_rs, k_rs_fn,
                       mittag_leffler, registry_get)
from .char_transform import (TransformResult, characteristic_for, r_seq,
                             transform_eval, transform_expansion,
                             transform_fn)
from .expansion import (CertifiedExpansion, PowerBoundTable, compose,
                        compose_certificate_map, power_certificate,
                        power_coeffs, product, product_certificate_map,
                        product_remainder_formula, shift_subtract)
from .sector import (LogPoint, Sector, bisected, contains, default_grid,
                     is_proper_subsector, sample_grid)
from .verify import (CompositionClosureReport, ProductNecessityReport,
                     RemainderReport, SectorImageReport, coefficient_equivalence,
                     composition_closure_experiment, ctilde_estimate,
                     measure_remainders, product_necessity_experiment,
                     sector_image_check, sign_pattern)
from .weight_seq import (EquivalenceFit, QuotientSequence, TwoParamFit,
                         WeightSequence, check_alg, check_dc, check_fdb,
                         check_mg, composition_sum, equivalence_fit, gevrey,
                         is_log_convex, pointwise_product, power_gevrey,
                         quotients)

__version__ = "0.1.0"
