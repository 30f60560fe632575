"""Low-discrepancy point sets for general measures on the unit cube.

Points are produced by repeatedly halving an i.i.d. sample with
low-discrepancy red-blue colorings, and every run carries a measured
certificate on the star discrepancy of its output.
"""

from .coloring import (
    AlternatingOrder,
    BalancedRandom,
    DyadicPotential,
    LocalSearch,
    build_dyadic_system,
    color,
    color_alternating,
    greedy_potential_color,
    local_search,
    order_points,
    parse_strategy,
)
from .discrepancy import (
    DiscrepancyReport,
    box_counts,
    combinatorial_disc,
    critical_grid,
    geometric_disc,
    star_discrepancy,
    star_discrepancy_lower_bound,
)
from .measures import (
    Clayton2D,
    Discrete,
    Measure,
    Mixture,
    PiecewiseConstantDyadic,
    ProductPower,
    Uniform,
    atoms,
    box_measure,
    measure_from_dict,
    sample,
)
from .pointset import PointSet
from .quadrature import hk_variation, kh_check, mc_baseline, qmc_estimate, true_integral
from .transference import GenerationConfig, TransferenceTrace, generate, halving_step, initial_approximation, ledger_bound

__version__ = "0.1.0"
