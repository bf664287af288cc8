"""Strongly polynomial primal-dual solvers for concave cost facility
location, lot-sizing and joint replenishment."""

from .concave import (
    AffineFixed,
    ConcaveFunction,
    DomainError,
    FixedCharge,
    NoZeroTangent,
    PiecewiseLinearMin,
    Power,
    Tangent,
    tangent_lines,
)
from .facility import (
    expand_pwl_instance,
    solve_classical_flpd,
    solve_concave_flpd,
    solve_expanded_flpd,
)
from .generate import GeneratorSpec, generate
from .instances import (
    FacilityInstance,
    InstanceError,
    JrpInstance,
    LotSizingInstance,
    dumps_instance,
    instance_from_json,
    is_metric,
    load_instance,
)
from .jrp import item_wave, solve_concave_jrppd, solve_generalized_jrppd
from .lotsizing import (
    compute_tight_positions,
    recover_duals,
    solve_classical_lspd,
    solve_concave_lspd,
    solve_expanded_lspd,
)
from .oracles import (
    brute_force_flp,
    brute_force_jrp,
    brute_force_lot_sizing,
    check_certificate,
    dp_lot_sizing,
)
from .tangent import (
    RateProfile,
    compute_breakpoints,
    first_tight_general,
    first_tight_mixed,
    first_tight_zero_budgets,
)

__version__ = "0.1.0"
