"""Maximal operators, commutators, BMO and Muckenhoupt quantities on finite
spaces of homogeneous type."""
from . import kernels
from .errors import *  # noqa: F401,F403
from .examples import (
    admissible_centers,
    make_bessel_halfline,
    make_counterexample_pair,
    make_finite_torus,
    make_grid_1d,
)
from .function_norms import (
    ball_average,
    bmo_norm,
    distribution_function,
    holder_gap,
    llogl_functional,
    lp_norm,
    luxemburg_norm,
    rearrangement,
)
from .operators import (
    commutator,
    delta_variant,
    iterated_maximal,
    maximal,
    maximal_commutator,
    maximal_llogl,
    naive_maximal,
    naive_maximal_commutator,
    naive_sharp_maximal,
    sharp_maximal,
)
from .space import (
    Ball,
    BallFamily,
    Space,
    ball_at,
    build_space,
    doubling_constant,
    enumerate_balls,
    quasi_triangle_constant,
    subset_measure,
    upper_dimension_estimate,
)
from .weights import (
    Weight,
    a1_constant,
    ap_constant,
    exp_weight_scan,
    weighted_char_quantity,
)

__version__ = "0.1.0"
