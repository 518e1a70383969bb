"""Series expansion of solutions of x' = sum_i C(n,i) u_i(t) x^i, x(0) = 0.

The solution is written as a shuffle-algebra series Z whose homogeneous
parts are mapped to iterated integrals of the coefficients u_i.
"""

from .combinatorics import (
    cf_coefficient,
    enumerate_M0,
    partition_count,
    tree_count_product,
    tree_count_recurrence,
)
from .quadrature import (
    ControlGrid,
    ExpansionTable,
    RadiusReport,
    convergence_radius,
    evaluate_series,
    expansion_via_products,
    homomorphism_check,
    iterated_integral,
    remainder_bound,
)
from .series import (
    EquationSpec,
    GradedSeries,
    GuardExceeded,
    Normalization,
    expand_general,
    expand_linear_closed_form,
    expand_riccati,
    n1_identity_check,
    omega_series,
    two_term_expand,
    verify_algebraic_equation,
)
from .shuffle import (
    Alphabet,
    NCPolynomial,
    coefficient,
    concat,
    shuffle,
    shuffle_exp_truncated,
    shuffle_power,
    word_norm,
)

__version__ = "0.1.0"
